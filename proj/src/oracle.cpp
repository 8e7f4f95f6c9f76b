// SPDX-License-Identifier: Apache-2.0
#include "ddn/oracle.hpp"

namespace ddn {

BitVec state_to_assignment(long s, Eigen::Index n) {
  BitVec x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = static_cast<int>((s >> (n - 1 - i)) & 1);
  return x;
}

long assignment_to_state(const BitVec& x) {
  long s = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s = (s << 1) | (x[i] ? 1 : 0);
  return s;
}

std::pair<BitVec, double> brute_force_mpe(const DdnModel& model,
                                          const Eigen::Ref<const Vector>& features) {
  const Eigen::Index n = model.n_labels();
  if (n > 24)
    throw Error("brute_force_mpe: n_labels = " + std::to_string(n) + " exceeds cap 24");
  const Vector c = evidence_logits(model, features);

  double best = -std::numeric_limits<double>::infinity();
  BitVec best_x;
  const long total = 1L << n;
  for (long s = 0; s < total; ++s) {
    const BitVec x = state_to_assignment(s, n);
    const Vector z = c + model.v * to_real(x);
    const double sc = score_from_logits(x, z);
    // Ascending s is ascending lexicographic order, so keeping strict
    // improvements leaves the lexicographically smallest tie winner.
    if (sc > best) {
      best = sc;
      best_x = x;
    }
  }
  return {best_x, best};
}

StationaryResult gibbs_stationary(const DdnModel& model,
                                  const Eigen::Ref<const Vector>& features,
                                  long max_iterations) {
  const Eigen::Index n = model.n_labels();
  if (n > 12)
    throw Error("gibbs_stationary: n_labels = " + std::to_string(n) + " exceeds cap 12");
  const Vector c = evidence_logits(model, features);
  const long states = 1L << n;

  // p(s, i) = P(x_i = 1 | rest of state s).
  Matrix p(states, n);
  for (long s = 0; s < states; ++s) {
    const BitVec x = state_to_assignment(s, n);
    const Vector z = c + model.v * to_real(x);
    for (Eigen::Index i = 0; i < n; ++i) p(s, i) = sigmoid(z[i]);
  }

  Eigen::VectorXd pi = Eigen::VectorXd::Constant(states, 1.0 / static_cast<double>(states));
  Eigen::VectorXd next(states);
  const double inv_n = 1.0 / static_cast<double>(n);

  StationaryResult out;
  for (long it = 0; it < max_iterations; ++it) {
    next.setZero();
    for (long s = 0; s < states; ++s) {
      const double mass = pi[s] * inv_n;
      if (mass == 0.0) continue;
      for (Eigen::Index i = 0; i < n; ++i) {
        const long bit = 1L << (n - 1 - i);
        const double p1 = p(s, i);
        next[s | bit] += mass * p1;
        next[s & ~bit] += mass * (1.0 - p1);
      }
    }
    next /= next.sum();
    const double residual = (next - pi).cwiseAbs().sum();
    pi.swap(next);
    if (residual <= 1e-12) {
      out.iterations = it + 1;
      break;
    }
    if (it + 1 == max_iterations)
      throw Error("gibbs_stationary: power iteration did not reach 1e-12 residual in " +
                  std::to_string(max_iterations) + " iterations");
  }

  out.state_probs = pi;
  out.marginals = Vector::Zero(n);
  for (long s = 0; s < states; ++s)
    for (Eigen::Index i = 0; i < n; ++i)
      if ((s >> (n - 1 - i)) & 1) out.marginals[i] += pi[s];
  return out;
}

}  // namespace ddn
