// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <optional>

#include "ddn/types.hpp"

namespace ddn {

/// Dense LP in computational form: maximize obj.v subject to row senses and
/// per-variable bounds (infinities allowed). An optional deadline makes the
/// solve give up with IterationLimit so anytime callers keep their budget.
struct LpProblem {
  Matrix a;                 // m x n
  Vector rhs;               // m
  std::vector<char> sense;  // '<', '>', '='
  Vector obj;               // n
  Vector lb, ub;            // n
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct LpSolution {
  enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };
  Status status = Status::IterationLimit;
  double objective = 0.0;
  Vector x;
  int iterations = 0;
};

/// Two-phase primal simplex with bounded variables on a dense tableau.
/// Dantzig pricing with a Bland's-rule fallback after a run of degenerate
/// pivots. Adequate for the problem sizes the encoder emits (tens of labels).
LpSolution solve_lp(const LpProblem& lp);

}  // namespace ddn
