// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ddn/model.hpp"
#include "ddn/rng.hpp"

namespace ddnt {

/// Two labels, one inert feature: b = (0.5, -0.5), v12 = v21 = 2. The MPE is
/// (1,1); worked scores for all four assignments are pinned in the tests.
inline ddn::DdnModel two_label_model() {
  ddn::DdnModel m = ddn::DdnModel::zeros(2, 1);
  m.b << 0.5, -0.5;
  m.v << 0.0, 2.0, 2.0, 0.0;
  return m;
}

inline ddn::Vector zero_features(Eigen::Index f = 1) { return ddn::Vector::Zero(f); }

inline ddn::BitVec bits(std::initializer_list<int> vals) {
  ddn::BitVec x(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (int v : vals) x[i++] = v;
  return x;
}

/// Dense random model with entries scaled to keep logits moderate.
inline ddn::DdnModel random_model(ddn::Rng& rng, int n, int f, double w_scale = 0.8,
                                  double v_scale = 0.8, double b_scale = 0.8) {
  ddn::DdnModel m = ddn::DdnModel::zeros(n, f);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < f; ++k) m.w(i, k) = w_scale * rng.next_normal();
  for (int i = 0; i < n; ++i) m.b[i] = b_scale * rng.next_normal();
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      if (i != k) m.v(i, k) = v_scale * rng.next_normal();
  return m;
}

inline ddn::Vector random_features(ddn::Rng& rng, int f) {
  ddn::Vector e(f);
  for (int k = 0; k < f; ++k) e[k] = rng.next_normal();
  return e;
}

inline ddn::BitVec random_bits(ddn::Rng& rng, int n) {
  ddn::BitVec x(n);
  for (int i = 0; i < n; ++i) x[i] = rng.bernoulli(0.5) ? 1 : 0;
  return x;
}

/// Independent reference route for the score: sum of x log p + (1-x) log(1-p)
/// with the logs evaluated stably from the logits.
inline double log_prob_score(const ddn::DdnModel& m, const ddn::Vector& e,
                             const ddn::BitVec& x) {
  const ddn::Vector z = ddn::compute_logits(m, e, x);
  double s = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i)
    s += x[i] ? ddn::log_sigmoid(z[i]) : ddn::log_sigmoid(-z[i]);
  return s;
}

}  // namespace ddnt
