// SPDX-License-Identifier: Apache-2.0
#include "ddn/local_search.hpp"

#include <chrono>

#include "ddn/rng.hpp"

namespace ddn {
namespace {

using Clock = std::chrono::steady_clock;

struct Incumbent {
  double best = -std::numeric_limits<double>::infinity();
  BitVec x;
  std::vector<double> trace;
  bool tracing = false;

  void offer(double s, const BitVec& cand) {
    // Max by score; on an exact tie keep the lexicographically smaller
    // assignment so merges across restarts are order-independent.
    if (s > best) {
      best = s;
      x = cand;
    } else if (s == best && x.size() == cand.size()) {
      for (Eigen::Index i = 0; i < cand.size(); ++i) {
        if (cand[i] == x[i]) continue;
        if (cand[i] < x[i]) x = cand;
        break;
      }
    }
    if (tracing) trace.push_back(best);
  }
};

BitVec random_assignment(Rng& rng, Eigen::Index n) {
  BitVec x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = rng.bernoulli(0.5) ? 1 : 0;
  return x;
}

InferenceResult finish(Incumbent& inc, const char* engine, Clock::time_point t0) {
  InferenceResult res;
  res.engine = engine;
  res.assignment = inc.x;
  res.score = inc.best;
  res.incumbent_trace = std::move(inc.trace);
  res.elapsed_s = std::chrono::duration<double>(Clock::now() - t0).count();
  return res;
}

}  // namespace

InferenceResult random_walk_mpe(const DdnModel& model,
                                const Eigen::Ref<const Vector>& features,
                                const LocalSearchConfig& cfg) {
  const auto t0 = Clock::now();
  const Eigen::Index n = model.n_labels();
  const Vector c = evidence_logits(model, features);
  const int budget = cfg.max_flips >= 0 ? cfg.max_flips : 50 * static_cast<int>(n);

  Incumbent inc;
  inc.tracing = cfg.record_trace;
  bool expired = false;
  for (int run = 0; run <= cfg.restarts && !expired; ++run) {
    Rng rng(cfg.seed, static_cast<std::uint64_t>(run));
    AssignmentState state(model, c, random_assignment(rng, n));
    double running = state.current_score();
    inc.offer(running, state.assignment());
    for (int flip = 0; flip < budget; ++flip) {
      if ((flip & 63) == 0 && cfg.time_limit_s &&
          std::chrono::duration<double>(Clock::now() - t0).count() > *cfg.time_limit_s) {
        expired = true;
        break;
      }
      const Eigen::Index i = rng.next_below(static_cast<int>(n));
      running += state.flip_delta(i);
      state.flip(i);
      if (((flip + 1) & 1023) == 0) running = state.current_score();  // resync
      inc.offer(running, state.assignment());
    }
  }
  return finish(inc, "rw", t0);
}

InferenceResult greedy_mpe(const DdnModel& model,
                           const Eigen::Ref<const Vector>& features,
                           const LocalSearchConfig& cfg) {
  if (cfg.noise_p < 0.0 || cfg.noise_p > 1.0)
    throw Error("greedy: noise_p must be in [0, 1]");
  const auto t0 = Clock::now();
  const Eigen::Index n = model.n_labels();
  const Vector c = evidence_logits(model, features);
  const int budget = cfg.max_flips >= 0 ? cfg.max_flips : 50 * static_cast<int>(n);

  Incumbent inc;
  inc.tracing = cfg.record_trace;
  bool expired = false;
  for (int run = 0; run <= cfg.restarts && !expired; ++run) {
    Rng rng(cfg.seed, static_cast<std::uint64_t>(run));
    AssignmentState state(model, c, random_assignment(rng, n));
    double running = state.current_score();
    inc.offer(running, state.assignment());
    for (int flip = 0; flip < budget; ++flip) {
      if ((flip & 63) == 0 && cfg.time_limit_s &&
          std::chrono::duration<double>(Clock::now() - t0).count() > *cfg.time_limit_s) {
        expired = true;
        break;
      }
      Eigen::Index pick;
      double delta;
      if (cfg.noise_p > 0.0 && rng.bernoulli(cfg.noise_p)) {
        pick = rng.next_below(static_cast<int>(n));
        delta = state.flip_delta(pick);
      } else {
        pick = 0;
        delta = state.flip_delta(0);
        for (Eigen::Index i = 1; i < n; ++i) {
          const double d = state.flip_delta(i);
          if (d > delta) {  // ties resolve to the lowest index
            delta = d;
            pick = i;
          }
        }
        if (delta <= 0.0 && cfg.noise_p == 0.0) break;  // local optimum
      }
      running += delta;
      state.flip(pick);
      if (((flip + 1) & 1023) == 0) running = state.current_score();
      inc.offer(running, state.assignment());
    }
  }
  return finish(inc, "greedy", t0);
}

}  // namespace ddn
