// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "ddn/types.hpp"

namespace ddn {

/// Conditional dependency network over n binary labels given a fixed feature
/// vector e. Each label carries a logistic conditional
///   P(x_i = 1 | x_-i, e) = sigmoid(b_i + w_i.e + sum_{k != i} v_ik x_k).
/// Immutable after construction; safe to share across threads.
struct DdnModel {
  Matrix w;  // n_labels x n_features
  Matrix v;  // n_labels x n_labels, diagonal identically zero
  Vector b;  // n_labels

  Eigen::Index n_labels() const { return b.size(); }
  Eigen::Index n_features() const { return w.cols(); }

  static DdnModel zeros(Eigen::Index n_labels, Eigen::Index n_features);

  /// Checks shape consistency, zero diagonal and finiteness. Throws on
  /// violation.
  void validate() const;
};

/// One example: evidence features plus (for training/evaluation) the
/// ground-truth label bit-vector.
struct Instance {
  Vector features;
  std::optional<BitVec> labels;
};

using Dataset = std::vector<Instance>;

inline double softplus(double z) {
  // max(z,0) + log1p(exp(-|z|)); finite for any finite z.
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// log(sigmoid(z)) without going through the probability value.
inline double log_sigmoid(double z) { return -softplus(-z); }

/// Per-label evidence contribution c = b + w.e; constant while labels vary.
Vector evidence_logits(const DdnModel& model, const Eigen::Ref<const Vector>& features);

/// z_i = b_i + w_i.e + sum_{k != i} v_ik x_k for all i.
Vector compute_logits(const DdnModel& model, const Eigen::Ref<const Vector>& features,
                      const BitVec& x);

/// P(x_i = 1 | x_-i, e); strictly inside (0, 1).
double conditional_probability(const DdnModel& model,
                               const Eigen::Ref<const Vector>& features,
                               const BitVec& x, Eigen::Index i);

/// sum_i [x_i z_i - softplus(z_i)] for precomputed logits.
double score_from_logits(const BitVec& x, const Vector& z);

/// Log-probability of the full assignment under the dependency network,
/// sum_i log P_i(x_i | x_-i, e), evaluated in the stable x.z - softplus form.
double score(const DdnModel& model, const Eigen::Ref<const Vector>& features,
             const BitVec& x);

/// Mutable (assignment, logits) pair kept in sync under single-label flips.
/// A flip of label i shifts every z_k by +-v_ki; logits are rebuilt from
/// scratch every 1024 flips to bound floating-point drift.
class AssignmentState {
 public:
  AssignmentState(const DdnModel& model, Vector evidence, BitVec x0);

  const BitVec& assignment() const { return x_; }
  const Vector& logits() const { return z_; }

  void flip(Eigen::Index i);
  void set_label(Eigen::Index i, int value);

  /// Score change that flip(i) would cause; O(n).
  double flip_delta(Eigen::Index i) const;

  /// Score of the current assignment from the maintained logits; O(n).
  double current_score() const { return score_from_logits(x_, z_); }

  void rebuild();

 private:
  const DdnModel* model_;
  Vector c_;  // b + w.e
  BitVec x_;
  Vector z_;
  int flips_since_rebuild_ = 0;
};

}  // namespace ddn
