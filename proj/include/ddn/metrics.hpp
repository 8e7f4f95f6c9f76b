// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include "ddn/types.hpp"

namespace ddn {

/// Multi-label evaluation summary. hl is a loss (lower is better); the rest
/// are gains in [0, 1]. lrap/map are present only when scores were supplied.
struct EvalReport {
  double sa = 0.0;          // subset accuracy (exact match)
  double ji = 0.0;          // Jaccard index, both-empty rows count as 1
  double hl = 0.0;          // Hamming loss
  double macro_f1 = 0.0;    // per-label F1 averaged over labels (0/0 -> 0)
  double micro_f1 = 0.0;    // F1 of pooled counts
  double example_f1 = 0.0;  // per-example F1 averaged over examples, both-empty -> 1
  std::optional<double> lrap;
  std::optional<double> map;
  long n_examples = 0;
};

/// Computes the report over parallel lists of ground-truth and predicted
/// bit-vectors. `scores` (per-label probabilities) enables LRAP and mAP:
/// LRAP follows the usual ranking definition (rows with zero or all true
/// labels contribute 1); mAP averages per-label average precision over the
/// labels that occur in the ground truth.
EvalReport evaluate(const std::vector<BitVec>& y_true,
                    const std::vector<BitVec>& y_pred,
                    const std::vector<Vector>* scores = nullptr);

}  // namespace ddn
