// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "ddn/model.hpp"
#include "ddn/result.hpp"

namespace ddn {

struct LocalSearchConfig {
  /// Flip budget per restart; 0 is a valid zero budget (the seeded initial
  /// assignment is returned). Negative means the default 50 * n_labels.
  int max_flips = -1;
  /// Greedy only: probability of flipping a uniformly random label instead
  /// of the best-improvement label.
  double noise_p = 0.3;
  /// Additional independent runs beyond the first; each run draws its start
  /// and flips from its own RNG substream.
  int restarts = 0;
  std::uint64_t seed = 0;
  std::optional<double> time_limit_s;
  /// Record the incumbent score after every flip (for monotonicity checks).
  bool record_trace = false;
};

/// Random walk: start uniform, flip one uniformly random label per step,
/// return the best-scoring assignment visited.
InferenceResult random_walk_mpe(const DdnModel& model,
                                const Eigen::Ref<const Vector>& features,
                                const LocalSearchConfig& cfg);

/// Greedy local search with noise: with probability noise_p flip a random
/// label, otherwise flip the label with the best score delta (ties to the
/// lowest index). With noise_p = 0 a run stops at the first local optimum
/// (all deltas <= 0) and control passes to the next restart.
InferenceResult greedy_mpe(const DdnModel& model,
                           const Eigen::Ref<const Vector>& features,
                           const LocalSearchConfig& cfg);

}  // namespace ddn
