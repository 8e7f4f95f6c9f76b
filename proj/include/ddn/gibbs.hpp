// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "ddn/model.hpp"
#include "ddn/result.hpp"

namespace ddn {

struct GibbsConfig {
  int n_samples = 1000;
  /// Sweeps discarded before estimation. Unset means n_samples / 10; pass 0
  /// to average over every sweep.
  std::optional<int> burn_in;
  std::uint64_t seed = 0;
  std::optional<double> time_limit_s;
};

/// Mixture-estimator marginals P(x_i = 1 | e) from fixed-order Gibbs
/// sampling: every sweep draws a fresh random label permutation, resamples
/// each label from its conditional, then contributes the conditional
/// probabilities of the post-sweep state to the running average.
/// Deterministic given the seed (when the time limit does not bind).
Vector gibbs_marginals(const DdnModel& model, const Eigen::Ref<const Vector>& features,
                       const GibbsConfig& cfg);

/// Max-marginal decoding: x_i = 1 iff the estimated marginal is >= 0.5
/// (ties decode to 1). Carries the marginals and the exact score.
InferenceResult gibbs_mpe(const DdnModel& model, const Eigen::Ref<const Vector>& features,
                          const GibbsConfig& cfg);

}  // namespace ddn
