// SPDX-License-Identifier: Apache-2.0
#include "ddn/trainer.hpp"

#include <cmath>
#include <numeric>

#include "ddn/rng.hpp"

namespace ddn {
namespace {

const BitVec& labels_or_throw(const Instance& inst) {
  if (!inst.labels) throw Error("cpll: instance is missing labels");
  return *inst.labels;
}

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

double schedule_lr(const TrainConfig& cfg, int epoch) {
  if (cfg.lr_schedule.kind == LrSchedule::Kind::Constant) return cfg.learning_rate;
  const int k = std::max(cfg.lr_schedule.every_k_epochs, 1);
  return cfg.learning_rate * std::pow(cfg.lr_schedule.factor, epoch / k);
}

}  // namespace

double cpll_loss(const DdnModel& model, std::span<const Instance> batch) {
  if (batch.empty()) throw Error("cpll: empty batch");
  double total = 0.0;
  for (const Instance& inst : batch) {
    const BitVec& x = labels_or_throw(inst);
    const Vector z = compute_logits(model, inst.features, x);
    total -= score_from_logits(x, z);
  }
  return total / static_cast<double>(batch.size());
}

double cpll_loss_l1(const DdnModel& model, std::span<const Instance> batch,
                    double l1_lambda) {
  return cpll_loss(model, batch) +
         l1_lambda * (model.w.cwiseAbs().sum() + model.v.cwiseAbs().sum());
}

CpllGradient cpll_gradient(const DdnModel& model, std::span<const Instance> batch) {
  if (batch.empty()) throw Error("cpll: empty batch");
  const Eigen::Index n = model.n_labels();
  CpllGradient g;
  g.w = Matrix::Zero(n, model.n_features());
  g.v = Matrix::Zero(n, n);
  g.b = Vector::Zero(n);
  for (const Instance& inst : batch) {
    const BitVec& x = labels_or_throw(inst);
    const Vector xd = to_real(x);
    const Vector z = compute_logits(model, inst.features, x);
    Vector r(n);
    for (Eigen::Index i = 0; i < n; ++i) r[i] = sigmoid(z[i]) - xd[i];
    g.b += r;
    g.w.noalias() += r * inst.features.transpose();
    g.v.noalias() += r * xd.transpose();
    g.loss -= score_from_logits(x, z);
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  g.w *= inv;
  g.v *= inv;
  g.b *= inv;
  g.loss *= inv;
  g.v.diagonal().setZero();
  return g;
}

TrainResult train(const Dataset& data, const TrainConfig& cfg, const DdnModel* init) {
  if (data.empty()) throw Error("train: empty dataset");
  if (!(cfg.learning_rate > 0.0)) throw Error("train: learning_rate must be positive");
  if (cfg.l1_lambda < 0.0) throw Error("train: l1_lambda must be nonnegative");
  if (cfg.epochs < 0) throw Error("train: epochs must be nonnegative");
  if (cfg.batch_size < 1) throw Error("train: batch_size must be positive");
  const Eigen::Index n_features = data.front().features.size();
  Eigen::Index n_labels = 0;
  for (std::size_t t = 0; t < data.size(); ++t) {
    const BitVec& x = labels_or_throw(data[t]);
    if (t == 0) n_labels = x.size();
    if (x.size() != n_labels) throw DimensionError("labels", n_labels, x.size());
    if (data[t].features.size() != n_features)
      throw DimensionError("features", n_features, data[t].features.size());
  }

  TrainResult out;
  out.model = init ? *init : DdnModel::zeros(n_labels, n_features);
  out.model.validate();
  if (out.model.n_labels() != n_labels)
    throw DimensionError("labels", n_labels, out.model.n_labels());
  if (out.model.n_features() != n_features)
    throw DimensionError("features", n_features, out.model.n_features());

  Rng rng(cfg.seed, 0);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Instance> batch;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = schedule_lr(cfg, epoch);
    for (std::size_t i = order.size() - 1; i > 0; --i)
      std::swap(order[i], order[rng.next_below(static_cast<int>(i) + 1)]);

    const int bs = std::max(cfg.batch_size, 1);
    for (std::size_t start = 0; start < order.size(); start += bs) {
      batch.clear();
      for (std::size_t j = start; j < std::min(order.size(), start + bs); ++j)
        batch.push_back(data[order[j]]);
      const CpllGradient g = cpll_gradient(out.model, batch);
      if (!std::isfinite(g.loss))
        throw Error("train: non-finite loss at epoch " + std::to_string(epoch) +
                    ", batch " + std::to_string(start / bs));
      out.model.w -= lr * g.w;
      out.model.v -= lr * g.v;
      out.model.b -= lr * g.b;
      if (cfg.l1_lambda > 0.0) {
        const double t = lr * cfg.l1_lambda;
        out.model.w = out.model.w.unaryExpr(
            [t](double x) { return soft_threshold(x, t); });
        out.model.v = out.model.v.unaryExpr(
            [t](double x) { return soft_threshold(x, t); });
        out.model.v.diagonal().setZero();  // stays zero regardless
      }
    }
    out.loss_trace.push_back(cpll_loss(out.model, data));
  }
  return out;
}

}  // namespace ddn
