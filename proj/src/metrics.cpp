// SPDX-License-Identifier: Apache-2.0
#include "ddn/metrics.hpp"

#include <algorithm>
#include <numeric>

namespace ddn {
namespace {

double lrap_of(const std::vector<BitVec>& y_true, const std::vector<Vector>& scores) {
  double total = 0.0;
  for (std::size_t t = 0; t < y_true.size(); ++t) {
    const BitVec& truth = y_true[t];
    const Vector& s = scores[t];
    const Eigen::Index n = truth.size();
    const long n_true = truth.sum();
    if (n_true == 0 || n_true == n) {
      total += 1.0;  // ranking is meaningless; conventional 1
      continue;
    }
    double aux = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!truth[i]) continue;
      long rank = 0, true_at_or_above = 0;
      for (Eigen::Index k = 0; k < n; ++k) {
        if (s[k] >= s[i]) {
          ++rank;
          if (truth[k]) ++true_at_or_above;
        }
      }
      aux += static_cast<double>(true_at_or_above) / static_cast<double>(rank);
    }
    total += aux / static_cast<double>(n_true);
  }
  return total / static_cast<double>(y_true.size());
}

double map_of(const std::vector<BitVec>& y_true, const std::vector<Vector>& scores) {
  const Eigen::Index n_labels = y_true.front().size();
  const std::size_t n_ex = y_true.size();
  double ap_sum = 0.0;
  long labels_with_pos = 0;
  std::vector<std::size_t> order(n_ex);
  for (Eigen::Index lbl = 0; lbl < n_labels; ++lbl) {
    long n_pos = 0;
    for (std::size_t t = 0; t < n_ex; ++t) n_pos += y_true[t][lbl];
    if (n_pos == 0) continue;  // label absent from ground truth: skipped
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return scores[a][lbl] > scores[b][lbl];
    });
    double ap = 0.0;
    long hits = 0;
    for (std::size_t r = 0; r < n_ex; ++r) {
      if (!y_true[order[r]][lbl]) continue;
      ++hits;
      ap += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
    ap_sum += ap / static_cast<double>(n_pos);
    ++labels_with_pos;
  }
  return labels_with_pos == 0 ? 0.0 : ap_sum / static_cast<double>(labels_with_pos);
}

}  // namespace

EvalReport evaluate(const std::vector<BitVec>& y_true,
                    const std::vector<BitVec>& y_pred,
                    const std::vector<Vector>* scores) {
  if (y_true.size() != y_pred.size())
    throw DimensionError("examples", static_cast<Eigen::Index>(y_true.size()),
                         static_cast<Eigen::Index>(y_pred.size()));
  if (y_true.empty()) throw Error("evaluate: no examples");
  const Eigen::Index n = y_true.front().size();
  for (std::size_t t = 0; t < y_true.size(); ++t) {
    if (y_true[t].size() != n) throw DimensionError("labels", n, y_true[t].size());
    if (y_pred[t].size() != n) throw DimensionError("labels", n, y_pred[t].size());
  }
  if (scores) {
    if (scores->size() != y_true.size())
      throw DimensionError("scores", static_cast<Eigen::Index>(y_true.size()),
                           static_cast<Eigen::Index>(scores->size()));
    for (const Vector& s : *scores)
      if (s.size() != n) throw DimensionError("scores", n, s.size());
  }

  EvalReport rep;
  rep.n_examples = static_cast<long>(y_true.size());

  double sa = 0.0, ji = 0.0, hl = 0.0, exf1 = 0.0;
  std::vector<long> tp(n, 0), fp(n, 0), fn(n, 0);
  for (std::size_t t = 0; t < y_true.size(); ++t) {
    const BitVec& truth = y_true[t];
    const BitVec& pred = y_pred[t];
    long inter = 0, uni = 0, diff = 0, nt = 0, np = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int a = truth[i], b = pred[i];
      inter += a & b;
      uni += a | b;
      diff += a != b;
      nt += a;
      np += b;
      tp[i] += a & b;
      fp[i] += (1 - a) & b;
      fn[i] += a & (1 - b);
    }
    sa += diff == 0 ? 1.0 : 0.0;
    ji += uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
    hl += static_cast<double>(diff) / static_cast<double>(n);
    exf1 += (nt + np) == 0 ? 1.0
                           : 2.0 * static_cast<double>(inter) /
                                 static_cast<double>(nt + np);
  }
  const double inv = 1.0 / static_cast<double>(y_true.size());
  rep.sa = sa * inv;
  rep.ji = ji * inv;
  rep.hl = hl * inv;
  rep.example_f1 = exf1 * inv;

  double macro = 0.0;
  long TP = 0, FP = 0, FN = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const long denom = 2 * tp[i] + fp[i] + fn[i];
    macro += denom == 0 ? 0.0 : 2.0 * static_cast<double>(tp[i]) / denom;
    TP += tp[i];
    FP += fp[i];
    FN += fn[i];
  }
  rep.macro_f1 = macro / static_cast<double>(n);
  const long pooled = 2 * TP + FP + FN;
  rep.micro_f1 = pooled == 0 ? 1.0 : 2.0 * static_cast<double>(TP) / pooled;

  if (scores) {
    rep.lrap = lrap_of(y_true, *scores);
    rep.map = map_of(y_true, *scores);
  }
  return rep;
}

}  // namespace ddn
