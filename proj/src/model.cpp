// SPDX-License-Identifier: Apache-2.0
#include "ddn/model.hpp"

namespace ddn {

DdnModel DdnModel::zeros(Eigen::Index n_labels, Eigen::Index n_features) {
  DdnModel m;
  m.w = Matrix::Zero(n_labels, n_features);
  m.v = Matrix::Zero(n_labels, n_labels);
  m.b = Vector::Zero(n_labels);
  return m;
}

void DdnModel::validate() const {
  const Eigen::Index n = b.size();
  if (n < 1) throw DataError("model must have at least one label");
  if (w.rows() != n) throw DimensionError("w.rows", n, w.rows());
  if (v.rows() != n) throw DimensionError("v.rows", n, v.rows());
  if (v.cols() != n) throw DimensionError("v.cols", n, v.cols());
  if (w.cols() < 1) throw DataError("model must have at least one feature");
  if (!w.allFinite() || !v.allFinite() || !b.allFinite())
    throw DataError("model parameters contain non-finite values");
  for (Eigen::Index i = 0; i < n; ++i)
    if (v(i, i) != 0.0)
      throw DataError("v diagonal must be exactly zero (entry " +
                      std::to_string(i) + " is " + std::to_string(v(i, i)) + ")");
}

Vector evidence_logits(const DdnModel& model, const Eigen::Ref<const Vector>& features) {
  if (features.size() != model.n_features())
    throw DimensionError("features", model.n_features(), features.size());
  return model.b + model.w * features;
}

Vector compute_logits(const DdnModel& model, const Eigen::Ref<const Vector>& features,
                      const BitVec& x) {
  if (x.size() != model.n_labels())
    throw DimensionError("labels", model.n_labels(), x.size());
  return evidence_logits(model, features) + model.v * to_real(x);
}

double conditional_probability(const DdnModel& model,
                               const Eigen::Ref<const Vector>& features,
                               const BitVec& x, Eigen::Index i) {
  if (i < 0 || i >= model.n_labels())
    throw Error("label index " + std::to_string(i) + " out of range [0, " +
                std::to_string(model.n_labels()) + ")");
  const Vector z = compute_logits(model, features, x);
  return sigmoid(z[i]);
}

double score_from_logits(const BitVec& x, const Vector& z) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i)
    s += (x[i] ? z[i] : 0.0) - softplus(z[i]);
  return s;
}

double score(const DdnModel& model, const Eigen::Ref<const Vector>& features,
             const BitVec& x) {
  return score_from_logits(x, compute_logits(model, features, x));
}

AssignmentState::AssignmentState(const DdnModel& model, Vector evidence, BitVec x0)
    : model_(&model), c_(std::move(evidence)), x_(std::move(x0)) {
  if (c_.size() != model.n_labels())
    throw DimensionError("evidence logits", model.n_labels(), c_.size());
  if (x_.size() != model.n_labels())
    throw DimensionError("labels", model.n_labels(), x_.size());
  z_ = c_ + model_->v * to_real(x_);
}

void AssignmentState::flip(Eigen::Index i) {
  const double delta = x_[i] ? -1.0 : 1.0;
  x_[i] = 1 - x_[i];
  // v has a zero diagonal, so z_i itself is untouched by the column update.
  z_ += delta * model_->v.col(i);
  if (++flips_since_rebuild_ >= 1024) rebuild();
}

void AssignmentState::set_label(Eigen::Index i, int value) {
  if (x_[i] != value) flip(i);
}

double AssignmentState::flip_delta(Eigen::Index i) const {
  const double delta = x_[i] ? -1.0 : 1.0;
  double d = delta * z_[i];
  for (Eigen::Index k = 0; k < z_.size(); ++k) {
    const double step = delta * model_->v(k, i);
    if (step == 0.0) continue;  // includes k == i
    d += (x_[k] ? step : 0.0) - softplus(z_[k] + step) + softplus(z_[k]);
  }
  return d;
}

void AssignmentState::rebuild() {
  z_ = c_ + model_->v * to_real(x_);
  flips_since_rebuild_ = 0;
}

}  // namespace ddn
