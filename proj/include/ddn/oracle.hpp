// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <utility>

#include "ddn/model.hpp"

namespace ddn {

/// Exhaustive ground truth for small instances. Everything here recomputes
/// scores from scratch (no incremental updates) so it stays independent of
/// the search engines it is used to check.

/// Enumerates all 2^n assignments (n <= 24) in lexicographic order and
/// returns the score-maximal one with exact softplus scoring. Ties resolve
/// to the lexicographically smallest assignment.
std::pair<BitVec, double> brute_force_mpe(const DdnModel& model,
                                          const Eigen::Ref<const Vector>& features);

struct StationaryResult {
  Eigen::VectorXd state_probs;  // length 2^n, indexed lexicographically
  Vector marginals;             // per-label P(x_i = 1)
  long iterations = 0;
};

/// Stationary distribution of the random-scan Gibbs chain (uniform label
/// pick, then conditional resample), solved by power iteration to 1e-12
/// residual. n <= 12. For consistent models this equals the joint the
/// conditionals came from; for inconsistent ones it is the random-scan
/// reference distribution.
StationaryResult gibbs_stationary(const DdnModel& model,
                                  const Eigen::Ref<const Vector>& features,
                                  long max_iterations = 2000000);

/// State index <-> assignment maps used by the enumerating oracles.
/// Index treats label 0 as the most significant bit, so ascending index is
/// ascending lexicographic order on assignments.
BitVec state_to_assignment(long s, Eigen::Index n);
long assignment_to_state(const BitVec& x);

}  // namespace ddn
