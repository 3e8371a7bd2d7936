#pragma once

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gpcqp/gpc.hpp"
#include "gpcqp/qp.hpp"

namespace gpcqp {

/// Parse failure with the offending line and field in the message.
class ParseError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

struct Token {
  std::string text;
  int line = 0;
};

/// Whitespace-separated tokens with line tracking; '#' comments run to
/// end of line.
inline std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> tokens;
  int line = 1;
  std::string cur;
  int cur_line = 1;
  bool comment = false;
  auto flush = [&] {
    if (!cur.empty()) {
      tokens.push_back({cur, cur_line});
      cur.clear();
    }
  };
  for (char ch : text) {
    if (ch == '\n') {
      flush();
      comment = false;
      ++line;
      continue;
    }
    if (comment) continue;
    if (ch == '#') {
      flush();
      comment = true;
      continue;
    }
    if (ch == ' ' || ch == '\t' || ch == '\r' || ch == ',') {
      flush();
      continue;
    }
    if (cur.empty()) cur_line = line;
    cur.push_back(ch);
  }
  flush();
  return tokens;
}

inline bool parse_real(const std::string& s, double& out) {
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end != nullptr && *end == '\0' && end != s.c_str();
}

inline bool parse_int(const std::string& s, long& out) {
  char* end = nullptr;
  out = std::strtol(s.c_str(), &end, 10);
  return end != nullptr && *end == '\0' && end != s.c_str();
}

class FieldReader {
public:
  FieldReader(const std::string& text, std::string what)
      : tokens_(tokenize(text)), what_(std::move(what)) {}

  bool done() const { return pos_ >= tokens_.size(); }

  const Token& peek() const { return tokens_[pos_]; }

  std::string next_field() {
    const Token& tok = tokens_[pos_++];
    double dummy;
    if (parse_real(tok.text, dummy))
      fail(tok, "expected a field name, found number '" + tok.text + "'");
    return tok.text;
  }

  long read_int(const std::string& field) {
    if (done()) fail_eof(field);
    const Token& tok = tokens_[pos_++];
    long v;
    if (!parse_int(tok.text, v))
      fail(tok, "field '" + field + "': expected an integer, found '" + tok.text + "'");
    return v;
  }

  double read_real(const std::string& field) {
    if (done()) fail_eof(field);
    const Token& tok = tokens_[pos_++];
    double v;
    if (!parse_real(tok.text, v))
      fail(tok, "field '" + field + "': expected a real, found '" + tok.text + "'");
    return v;
  }

  std::vector<double> read_reals(const std::string& field, std::size_t count) {
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(read_real(field));
    return out;
  }

  /// Reads numeric tokens until the next field name or end of input.
  std::vector<double> read_reals_until_field(const std::string& field) {
    std::vector<double> out;
    while (!done()) {
      double v;
      if (!parse_real(tokens_[pos_].text, v)) break;
      out.push_back(v);
      ++pos_;
    }
    if (out.empty()) {
      if (done()) fail_eof(field);
      fail(tokens_[pos_], "field '" + field + "': expected at least one real");
    }
    return out;
  }

  [[noreturn]] void fail(const Token& tok, const std::string& msg) const {
    throw ParseError(what_ + ":" + std::to_string(tok.line) + ": " + msg);
  }

  [[noreturn]] void fail_eof(const std::string& field) const {
    throw ParseError(what_ + ": unexpected end of input while reading field '" + field + "'");
  }

  [[noreturn]] void fail_global(const std::string& msg) const {
    throw ParseError(what_ + ": " + msg);
  }

private:
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::string what_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

/// QP problem document: fields `n`, `m`, `G` (row-major n*n reals), `c`,
/// `A` (row-major m*n), `b`. n and m must appear before the arrays they
/// size; '#' starts a comment.
inline QpProblem parse_qp_text(const std::string& text,
                               const std::string& what = "<qp>") {
  detail::FieldReader r(text, what);
  long n = -1, m = -1;
  std::vector<double> G, c, A, b;
  bool have_G = false, have_c = false, have_A = false, have_b = false;

  while (!r.done()) {
    const auto tok = r.peek();
    const std::string field = r.next_field();
    auto need_dims = [&](const char* who) {
      if (n < 0 || m < 0)
        r.fail(tok, std::string("field '") + who + "' requires n and m first");
    };
    if (field == "n") {
      n = r.read_int("n");
      if (n < 1) r.fail(tok, "n must be >= 1");
    } else if (field == "m") {
      m = r.read_int("m");
      if (m < 1) r.fail(tok, "m must be >= 1");
    } else if (field == "G") {
      need_dims("G");
      G = r.read_reals("G", static_cast<std::size_t>(n * n));
      have_G = true;
    } else if (field == "c") {
      need_dims("c");
      c = r.read_reals("c", static_cast<std::size_t>(n));
      have_c = true;
    } else if (field == "A") {
      need_dims("A");
      A = r.read_reals("A", static_cast<std::size_t>(m * n));
      have_A = true;
    } else if (field == "b") {
      need_dims("b");
      b = r.read_reals("b", static_cast<std::size_t>(m));
      have_b = true;
    } else {
      r.fail(tok, "unknown field '" + field + "' (expected n, m, G, c, A, b)");
    }
  }
  if (n < 1) r.fail_global("missing field 'n'");
  if (m < 1) r.fail_global("missing field 'm'");
  if (!have_G) r.fail_global("missing field 'G'");
  if (!have_c) r.fail_global("missing field 'c'");
  if (!have_A) r.fail_global("missing field 'A'");
  if (!have_b) r.fail_global("missing field 'b'");

  MatrixXd Gm(n, n), Am(m, n);
  for (long i = 0; i < n; ++i)
    for (long j = 0; j < n; ++j) Gm(i, j) = G[static_cast<std::size_t>(i * n + j)];
  for (long i = 0; i < m; ++i)
    for (long j = 0; j < n; ++j) Am(i, j) = A[static_cast<std::size_t>(i * n + j)];
  VectorXd cv = Eigen::Map<VectorXd>(c.data(), n);
  VectorXd bv = Eigen::Map<VectorXd>(b.data(), m);
  try {
    return QpProblem(std::move(Gm), std::move(cv), std::move(Am), std::move(bv));
  } catch (const std::invalid_argument& e) {
    throw ParseError(what + ": " + e.what());
  }
}

inline QpProblem parse_qp_file(const std::string& path) {
  return parse_qp_text(detail::slurp(path), path);
}

struct ModelFile {
  CarimaModel model;
  GpcConfig config;
};

/// GPC model document: fields `a`, `b` (polynomial coefficients ascending
/// in z^-1), `d`, `N`, `Nu`, `eta`, `umin`, `umax`. All eight are required.
inline ModelFile parse_model_text(const std::string& text,
                                  const std::string& what = "<model>") {
  detail::FieldReader r(text, what);
  std::vector<double> a, b;
  long d = -1, N = -1, Nu = -1;
  double eta = -1.0, umin = 0.0, umax = 0.0;
  bool have_eta = false, have_umin = false, have_umax = false;

  while (!r.done()) {
    const auto tok = r.peek();
    const std::string field = r.next_field();
    if (field == "a") a = r.read_reals_until_field("a");
    else if (field == "b") b = r.read_reals_until_field("b");
    else if (field == "d") d = r.read_int("d");
    else if (field == "N") N = r.read_int("N");
    else if (field == "Nu") Nu = r.read_int("Nu");
    else if (field == "eta") { eta = r.read_real("eta"); have_eta = true; }
    else if (field == "umin") { umin = r.read_real("umin"); have_umin = true; }
    else if (field == "umax") { umax = r.read_real("umax"); have_umax = true; }
    else r.fail(tok, "unknown field '" + field +
                         "' (expected a, b, d, N, Nu, eta, umin, umax)");
  }
  if (a.empty()) r.fail_global("missing field 'a'");
  if (b.empty()) r.fail_global("missing field 'b'");
  if (d < 0) r.fail_global("missing or negative field 'd'");
  if (N < 1) r.fail_global("missing field 'N'");
  if (Nu < 1) r.fail_global("missing field 'Nu'");
  if (!have_eta) r.fail_global("missing field 'eta'");
  if (!have_umin) r.fail_global("missing field 'umin'");
  if (!have_umax) r.fail_global("missing field 'umax'");

  try {
    CarimaModel model(Polynomial(a), Polynomial(b), static_cast<int>(d));
    GpcConfig cfg;
    cfg.N = static_cast<int>(N);
    cfg.Nu = static_cast<int>(Nu);
    cfg.eta = eta;
    cfg.u_min = umin;
    cfg.u_max = umax;
    cfg.validate();
    return ModelFile{std::move(model), cfg};
  } catch (const std::invalid_argument& e) {
    throw ParseError(what + ": " + e.what());
  }
}

inline ModelFile parse_model_file(const std::string& path) {
  return parse_model_text(detail::slurp(path), path);
}

}  // namespace gpcqp
