// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ddn/types.hpp"

namespace ddn {

/// Outcome of one MPE inference call, shared by all engines. `score` is the
/// exact dependency-network log-probability of `assignment`, recomputed with
/// true softplus regardless of how the engine searched.
struct InferenceResult {
  BitVec assignment;
  double score = 0.0;
  std::optional<Vector> marginals;        // Gibbs only
  std::string engine;
  double elapsed_s = 0.0;
  std::optional<bool> optimal;            // MILP only
  std::optional<double> objective;        // MILP objective (piecewise-linear)
  bool fallback = false;                  // true if no incumbent was found in time
  long nodes = 0;                         // branch-and-bound nodes / states visited
  std::vector<double> incumbent_trace;    // filled only when tracing is requested
};

}  // namespace ddn
