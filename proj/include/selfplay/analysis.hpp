#pragma once

#include "selfplay/analysis/agreement.hpp"
#include "selfplay/analysis/evaluation.hpp"
#include "selfplay/analysis/kuhn_solver.hpp"
#include "selfplay/analysis/lp.hpp"
#include "selfplay/analysis/ttt_solver.hpp"
