#pragma once

#include "gpcqp/bench.hpp"
#include "gpcqp/closed_loop.hpp"
#include "gpcqp/gpc.hpp"
#include "gpcqp/io.hpp"
#include "gpcqp/kkt.hpp"
#include "gpcqp/mehrotra.hpp"
#include "gpcqp/oracle.hpp"
#include "gpcqp/qp.hpp"
#include "gpcqp/revised.hpp"
