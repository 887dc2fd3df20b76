#pragma once

#include "cfsp/baselines.hpp"
#include "cfsp/constraints.hpp"
#include "cfsp/error.hpp"
#include "cfsp/graph.hpp"
#include "cfsp/graph_io.hpp"
#include "cfsp/inner.hpp"
#include "cfsp/lovasz.hpp"
#include "cfsp/max_flow.hpp"
#include "cfsp/problems.hpp"
#include "cfsp/ratio_dca.hpp"
#include "cfsp/set_function.hpp"
