// SPDX-License-Identifier: Apache-2.0
#include <chrono>
#include <cmath>

#include "ddn/milp.hpp"
#include "ddn/simplex.hpp"

namespace ddn {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

InferenceResult solve_by_enumeration(const MilpProgram& prog, const SolveConfig& cfg,
                                     Clock::time_point t0) {
  const EncodingInfo& info = prog.info;
  const Eigen::Index n = info.n;
  if (n > 24) throw Error("enumeration mode: n_labels exceeds cap 24");

  InferenceResult res;
  res.engine = "milp";
  double best = -std::numeric_limits<double>::infinity();
  BitVec best_x;
  bool timed_out = false;

  const long total = 1L << n;
  BitVec x = BitVec::Zero(n);
  long visited = 0;
  for (long s = 0; s < total; ++s) {
    for (Eigen::Index i = 0; i < n; ++i) x[i] = static_cast<int>((s >> (n - 1 - i)) & 1);
    const double obj = direct_objective(prog, x);
    ++visited;
    if (obj > best) {
      best = obj;
      best_x = x;
    }
    if ((s & 2047) == 2047 && seconds_since(t0) > cfg.time_limit_s) {
      timed_out = true;
      break;
    }
  }
  res.assignment = best_x;
  res.objective = best;
  res.optimal = !timed_out;
  res.nodes = visited;
  return res;
}

struct Node {
  std::vector<signed char> fixed;  // -1 free, 0/1 fixed
  double bound;
  int depth;
};

LpProblem relaxation(const MilpProgram& prog, const std::vector<signed char>& fixed) {
  const int nv = static_cast<int>(prog.vars.size());
  const int mc = static_cast<int>(prog.constraints.size());
  LpProblem lp;
  lp.a = Matrix::Zero(mc, nv);
  lp.rhs = Vector::Zero(mc);
  lp.sense.resize(mc);
  for (int r = 0; r < mc; ++r) {
    const LinConstraint& con = prog.constraints[r];
    for (const LinTerm& t : con.terms) lp.a(r, t.var) += t.coef;
    lp.rhs[r] = con.rhs;
    lp.sense[r] = static_cast<char>(con.sense);
  }
  lp.obj = Vector::Zero(nv);
  for (const LinTerm& t : prog.objective) lp.obj[t.var] += t.coef;
  lp.lb = Vector::Zero(nv);
  lp.ub = Vector::Zero(nv);
  for (int j = 0; j < nv; ++j) {
    lp.lb[j] = prog.vars[j].lb;
    lp.ub[j] = prog.vars[j].ub;
  }
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    if (fixed[i] < 0) continue;
    const int var = prog.info.x_base + static_cast<int>(i);
    lp.lb[var] = lp.ub[var] = static_cast<double>(fixed[i]);
  }
  return lp;
}

InferenceResult solve_by_bnb(const MilpProgram& prog, const SolveConfig& cfg,
                             Clock::time_point t0) {
  const EncodingInfo& info = prog.info;
  const Eigen::Index n = info.n;
  const auto deadline =
      t0 + std::chrono::duration_cast<Clock::duration>(
               std::chrono::duration<double>(cfg.time_limit_s));

  InferenceResult res;
  res.engine = "milp";
  double incumbent = -std::numeric_limits<double>::infinity();
  BitVec incumbent_x;
  bool have_incumbent = false;
  bool timed_out = false;
  long nodes = 0;

  auto offer = [&](const BitVec& x) {
    const double obj = direct_objective(prog, x);
    if (!have_incumbent || obj > incumbent) {
      incumbent = obj;
      incumbent_x = x;
      have_incumbent = true;
    }
  };

  // Seed the incumbent with a cheap greedy climb so pruning bites early
  // (skipped when the budget is already spent, keeping the no-incumbent
  // fallback reachable).
  auto greedy_seed = [&](BitVec x) {
    if (seconds_since(t0) > cfg.time_limit_s) return;
    double cur = direct_objective(prog, x);
    for (bool improved = true; improved;) {
      improved = false;
      for (Eigen::Index i = 0; i < n; ++i) {
        x[i] = 1 - x[i];
        const double cand = direct_objective(prog, x);
        if (cand > cur + 1e-12) {
          cur = cand;
          improved = true;
        } else {
          x[i] = 1 - x[i];
        }
      }
    }
    offer(x);
  };
  greedy_seed(BitVec::Zero(n));
  greedy_seed(BitVec::Ones(n));

  std::vector<Node> stack;
  stack.push_back({std::vector<signed char>(n, -1),
                   std::numeric_limits<double>::infinity(), 0});

  while (!stack.empty()) {
    if (seconds_since(t0) > cfg.time_limit_s) {
      timed_out = true;
      break;
    }
    Node node = std::move(stack.back());
    stack.pop_back();
    if (have_incumbent && node.bound <= incumbent + 1e-9) continue;
    ++nodes;

    LpProblem lp = relaxation(prog, node.fixed);
    lp.deadline = deadline;
    const LpSolution sol = solve_lp(lp);
    if (sol.status == LpSolution::Status::Infeasible) {
      if (node.depth == 0) throw Error("solve_milp: root relaxation infeasible (encoder bug?)");
      continue;
    }
    double bound = std::numeric_limits<double>::infinity();
    Vector lpx;
    if (sol.status == LpSolution::Status::Optimal) {
      bound = sol.objective;
      lpx = sol.x;
      if (have_incumbent && bound <= incumbent + 1e-9) continue;
    }
    // Without an LP point, keep exploring on fixed values alone.
    BitVec rounded(n);
    int branch_var = -1;
    double worst_frac = 1e-6;
    for (Eigen::Index i = 0; i < n; ++i) {
      double xi = node.fixed[i] >= 0 ? node.fixed[i]
                  : lpx.size() > 0   ? lpx[info.x_base + i]
                                     : 0.0;
      rounded[i] = xi >= 0.5 ? 1 : 0;
      if (node.fixed[i] < 0) {
        const double frac = std::abs(xi - std::round(xi));
        if (frac > worst_frac) {
          worst_frac = frac;
          branch_var = static_cast<int>(i);
        }
      }
    }
    offer(rounded);  // LP point rounded to a feasible incumbent candidate

    if (branch_var < 0) {
      // LP integral; branch on the first still-free label to close the gap
      // (fractional segment selectors can keep the bound above the honest
      // objective).
      for (Eigen::Index i = 0; i < n && branch_var < 0; ++i)
        if (node.fixed[i] < 0) branch_var = static_cast<int>(i);
      if (branch_var < 0) continue;  // leaf: fully fixed, handled by offer()
      if (have_incumbent && bound <= incumbent + 1e-9) continue;
    }

    Node zero{node.fixed, bound, node.depth + 1};
    Node one{node.fixed, bound, node.depth + 1};
    zero.fixed[branch_var] = 0;
    one.fixed[branch_var] = 1;
    // Dive toward the LP suggestion first (it is popped last in, first out).
    if (rounded[branch_var] == 1) {
      stack.push_back(std::move(zero));
      stack.push_back(std::move(one));
    } else {
      stack.push_back(std::move(one));
      stack.push_back(std::move(zero));
    }
  }

  res.nodes = nodes;
  if (!have_incumbent) {
    res.assignment = BitVec::Zero(n);
    res.objective = direct_objective(prog, res.assignment);
    res.fallback = true;
    res.optimal = false;
  } else {
    res.assignment = incumbent_x;
    res.objective = incumbent;
    res.optimal = !timed_out;
  }
  return res;
}

}  // namespace

InferenceResult solve_milp(const MilpProgram& prog, const SolveConfig& cfg) {
  if (!prog.info.valid)
    throw Error("solve_milp requires a program built by encode()");
  const auto t0 = Clock::now();
  const bool enumerate =
      cfg.mode == SolveMode::Enumerate ||
      (cfg.mode == SolveMode::Auto && prog.info.n < cfg.enumerate_below);
  InferenceResult res = enumerate ? solve_by_enumeration(prog, cfg, t0)
                                  : solve_by_bnb(prog, cfg, t0);
  res.elapsed_s = seconds_since(t0);
  return res;
}

InferenceResult milp_mpe(const DdnModel& model, const Eigen::Ref<const Vector>& features,
                         const MilpConfig& cfg) {
  const auto t0 = Clock::now();
  PiecewiseApprox pwl;
  if (cfg.pwl == MilpConfig::PwlKind::Paper) {
    pwl = paper_pwl();
  } else {
    const Vector c = evidence_logits(model, features);
    const Vector z_lo = c + model.v.cwiseMin(0.0).rowwise().sum();
    const Vector z_hi = c + model.v.cwiseMax(0.0).rowwise().sum();
    pwl = adaptive_pwl(cfg.epsilon, z_lo.minCoeff() - cfg.range_pad,
                       z_hi.maxCoeff() + cfg.range_pad);
  }
  const MilpProgram prog = encode(model, features, pwl);
  InferenceResult res = solve_milp(prog, cfg.solve);
  res.score = score(model, features, res.assignment);
  res.elapsed_s = seconds_since(t0);
  return res;
}

}  // namespace ddn
