// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "ddn/model.hpp"

namespace ddn {

struct LrSchedule {
  enum class Kind { Constant, StepDecay } kind = Kind::Constant;
  double factor = 0.5;     // StepDecay: multiply by this ...
  int every_k_epochs = 10;  // ... every k epochs
};

struct TrainConfig {
  double learning_rate = 0.05;
  double l1_lambda = 0.0;
  int epochs = 50;
  int batch_size = 64;
  std::uint64_t seed = 0;
  LrSchedule lr_schedule;
};

struct CpllGradient {
  Matrix w;  // same shapes as the model parameters
  Matrix v;  // diagonal identically zero
  Vector b;
  double loss = 0.0;  // mean unregularized CPLL over the batch
};

/// Mean over the batch of -sum_i log P_i(x_i | e, x_-i) with the
/// conditioning labels taken from ground truth (fully observed
/// pseudo-likelihood). Every instance must be labeled.
double cpll_loss(const DdnModel& model, std::span<const Instance> batch);

/// cpll_loss plus l1_lambda * (||w||_1 + ||v||_1); the regularized path.
double cpll_loss_l1(const DdnModel& model, std::span<const Instance> batch,
                    double l1_lambda);

/// Mean-over-batch gradients of the unregularized loss. The residual
/// sigmoid(z_i) - x_i propagates to each parameter; the v diagonal is not a
/// parameter and its gradient is identically zero.
CpllGradient cpll_gradient(const DdnModel& model, std::span<const Instance> batch);

struct TrainResult {
  DdnModel model;
  std::vector<double> loss_trace;  // full-dataset unregularized CPLL per epoch
};

/// Mini-batch SGD on the CPLL loss with optional step decay. The l1 penalty
/// is applied by proximal soft-thresholding of w and v after every step
/// (biases are not penalized), which shrinks toward zero and produces exact
/// zeros. Deterministic given (dataset order, seed, config).
TrainResult train(const Dataset& data, const TrainConfig& cfg,
                  const DdnModel* init = nullptr);

}  // namespace ddn
