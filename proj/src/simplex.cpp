// SPDX-License-Identifier: Apache-2.0
#include "ddn/simplex.hpp"

#include <cmath>
#include <limits>

namespace ddn {
namespace {

constexpr double kEps = 1e-9;
constexpr double kPivotTol = 1e-8;
constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarState : char { Basic, AtLower, AtUpper };

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Tableau {
  RowMajor t;                   // m x n_total, current B^-1 A
  Vector xb;                    // basic variable values, length m
  Eigen::RowVectorXd d;         // reduced costs, length n_total
  std::vector<int> basis;       // var index per row
  std::vector<VarState> state;  // per variable
  Vector lb, ub;
  int m = 0, n = 0;

  double nonbasic_value(int j) const {
    return state[j] == VarState::AtUpper ? ub[j] : lb[j];
  }

  void pivot(int row, int col) {
    const double p = t(row, col);
    t.row(row) /= p;
    for (int i = 0; i < m; ++i) {
      if (i == row) continue;
      const double f = t(i, col);
      if (f != 0.0) t.row(i) -= f * t.row(row);
    }
    const double fd = d[col];
    if (fd != 0.0) d -= fd * t.row(row);
  }
};

// One phase of the bounded-variable simplex; optimizes the reduced costs in
// tab.d. When art_base >= 0, stops as soon as every basic variable at or
// beyond art_base has value <= kEps (phase-1 early exit).
LpSolution::Status run_simplex(
    Tableau& tab, int max_iters, int* iter_count,
    const std::optional<std::chrono::steady_clock::time_point>& deadline,
    int art_base = -1) {
  int degenerate_run = 0;
  for (int iter = 0; iter < max_iters; ++iter) {
    if (deadline && (iter & 127) == 0 &&
        std::chrono::steady_clock::now() > *deadline)
      return LpSolution::Status::IterationLimit;
    if (art_base >= 0) {
      double art_sum = 0.0;
      for (int r = 0; r < tab.m; ++r)
        if (tab.basis[r] >= art_base) art_sum += tab.xb[r];
      if (art_sum <= kEps) return LpSolution::Status::Optimal;
    }
    ++*iter_count;
    const bool bland = degenerate_run > 40;

    // Entering variable: improving reduced cost relative to its bound side.
    int q = -1;
    double best = kEps;
    for (int j = 0; j < tab.n; ++j) {
      if (tab.state[j] == VarState::Basic) continue;
      if (tab.lb[j] == tab.ub[j]) continue;  // fixed
      double improvement = 0.0;
      if (tab.state[j] == VarState::AtLower && tab.d[j] > kEps)
        improvement = tab.d[j];
      else if (tab.state[j] == VarState::AtUpper && tab.d[j] < -kEps)
        improvement = -tab.d[j];
      if (improvement > best) {
        best = improvement;
        q = j;
        if (bland) break;  // first eligible index
      }
    }
    if (q < 0) return LpSolution::Status::Optimal;

    const double dir = tab.state[q] == VarState::AtLower ? 1.0 : -1.0;

    // Ratio test: entering moves by t >= 0 in direction dir; basic values
    // move by -t * dir * column. A bound-to-bound flip caps t as well.
    const double t_flip = tab.ub[q] - tab.lb[q];  // may be +inf
    auto row_ratio = [&](int i, double* ti, bool* at_upper) {
      const double a = dir * tab.t(i, q);
      const int bi = tab.basis[i];
      if (a > kPivotTol) {
        *ti = std::max(tab.xb[i] - tab.lb[bi], 0.0) / a;
        *at_upper = false;
        return true;
      }
      if (a < -kPivotTol && tab.ub[bi] != kInf) {
        *ti = std::max(tab.ub[bi] - tab.xb[i], 0.0) / (-a);
        *at_upper = true;
        return true;
      }
      return false;
    };

    double t_min = t_flip;
    for (int i = 0; i < tab.m; ++i) {
      double ti;
      bool up;
      if (row_ratio(i, &ti, &up)) t_min = std::min(t_min, ti);
    }
    if (t_min == kInf) return LpSolution::Status::Unbounded;

    // Among rows hitting the minimum ratio pick the largest pivot, or the
    // smallest basis index under Bland's rule.
    int leave_row = -1;
    bool leave_at_upper = false;
    for (int i = 0; i < tab.m; ++i) {
      double ti;
      bool up;
      if (!row_ratio(i, &ti, &up) || ti > t_min + kEps) continue;
      if (leave_row < 0 ||
          (bland ? tab.basis[i] < tab.basis[leave_row]
                 : std::abs(tab.t(i, q)) > std::abs(tab.t(leave_row, q)))) {
        leave_row = i;
        leave_at_upper = up;
      }
    }
    const double t_best = std::max(t_min, 0.0);
    degenerate_run = t_best < 1e-11 ? degenerate_run + 1 : 0;

    // Apply the step to all basic values.
    if (t_best != 0.0)
      for (int i = 0; i < tab.m; ++i) tab.xb[i] -= t_best * dir * tab.t(i, q);

    if (leave_row < 0) {
      // Bound flip: no basis change.
      tab.state[q] =
          tab.state[q] == VarState::AtLower ? VarState::AtUpper : VarState::AtLower;
      continue;
    }

    const int leaving = tab.basis[leave_row];
    tab.state[leaving] = leave_at_upper ? VarState::AtUpper : VarState::AtLower;
    tab.xb[leave_row] = tab.nonbasic_value(q) + dir * t_best;
    tab.basis[leave_row] = q;
    tab.state[q] = VarState::Basic;
    tab.pivot(leave_row, q);
  }
  return LpSolution::Status::IterationLimit;
}

}  // namespace

LpSolution solve_lp(const LpProblem& lp) {
  const int m = static_cast<int>(lp.a.rows());
  const int ns = static_cast<int>(lp.a.cols());

  // Crash basis: slacks start basic wherever the all-at-bounds point already
  // satisfies the row; artificials are added only for equality rows and
  // violated inequality rows.
  int n_slack = 0;
  for (char s : lp.sense)
    if (s != '=') ++n_slack;

  // First pass: residuals at the initial nonbasic point (structurals at a
  // finite bound, slacks at zero).
  Vector v0(ns);
  std::vector<VarState> struct_state(ns, VarState::AtLower);
  for (int j = 0; j < ns; ++j) {
    if (std::isfinite(lp.lb[j])) {
      v0[j] = lp.lb[j];
    } else if (std::isfinite(lp.ub[j])) {
      struct_state[j] = VarState::AtUpper;
      v0[j] = lp.ub[j];
    } else {
      v0[j] = 0.0;  // free variables do not occur in these programs
    }
  }
  const Vector resid = lp.rhs - lp.a * v0;

  int n_art = 0;
  for (int r = 0; r < m; ++r) {
    const char s = lp.sense[r];
    const bool needs_art = (s == '=' && std::abs(resid[r]) > 0.0) ||
                           (s == '<' && resid[r] < 0.0) ||
                           (s == '>' && resid[r] > 0.0) || (s == '=');
    if (needs_art) ++n_art;
  }

  const int n = ns + n_slack + n_art;
  Tableau tab;
  tab.m = m;
  tab.n = n;
  tab.t = RowMajor::Zero(m, n);
  tab.lb = Vector::Zero(n);
  tab.ub = Vector::Zero(n);
  tab.state.assign(n, VarState::AtLower);
  tab.basis.assign(m, -1);
  tab.xb = Vector::Zero(m);

  tab.t.topLeftCorner(m, ns) = lp.a;
  tab.lb.head(ns) = lp.lb;
  tab.ub.head(ns) = lp.ub;
  for (int j = 0; j < ns; ++j) tab.state[j] = struct_state[j];

  // The starting basis must be the identity, so whichever column enters the
  // basis on a row (slack or artificial) gets coefficient +1, negating the
  // row when needed.
  const int art_base = ns + n_slack;
  int slack_id = ns;
  int art_id = art_base;
  for (int r = 0; r < m; ++r) {
    const char s = lp.sense[r];
    if (s != '=') {
      const int slack = slack_id++;
      tab.t(r, slack) = s == '<' ? 1.0 : -1.0;
      tab.lb[slack] = 0.0;
      tab.ub[slack] = kInf;
      // Slack value making the row an equality at the initial point.
      const double slack_val = s == '<' ? resid[r] : -resid[r];
      if (slack_val >= 0.0) {
        if (s == '>') tab.t.row(r) *= -1.0;  // slack coefficient becomes +1
        tab.basis[r] = slack;
        tab.state[slack] = VarState::Basic;
        tab.xb[r] = slack_val;
        continue;
      }
    }
    // Equality row or violated inequality: basic artificial at |residual|
    // (the slack, if any, stays nonbasic at zero and contributes nothing).
    if (resid[r] < 0.0) tab.t.row(r) *= -1.0;
    const int aj = art_id++;
    tab.t(r, aj) = 1.0;
    tab.lb[aj] = 0.0;
    tab.ub[aj] = kInf;
    tab.basis[r] = aj;
    tab.state[aj] = VarState::Basic;
    tab.xb[r] = std::abs(resid[r]);
  }

  LpSolution out;
  const int max_iters = 20000 + 50 * (m + n);

  if (n_art > 0) {
    // Phase 1: maximize -sum(artificials); stop at feasibility.
    Vector c1 = Vector::Zero(n);
    c1.tail(n_art).setConstant(-1.0);
    tab.d = c1.transpose();
    for (int r = 0; r < m; ++r)
      if (tab.basis[r] >= art_base) tab.d += tab.t.row(r);  // c_B = -1 rows

    const auto status = run_simplex(tab, max_iters, &out.iterations, lp.deadline, art_base);
    if (status == LpSolution::Status::IterationLimit) {
      out.status = status;
      return out;
    }
    double art_sum = 0.0;
    for (int r = 0; r < m; ++r)
      if (tab.basis[r] >= art_base) art_sum += tab.xb[r];
    if (art_sum > 1e-7) {
      out.status = LpSolution::Status::Infeasible;
      return out;
    }
    // Freeze artificials at zero for phase 2.
    for (int j = art_base; j < n; ++j) tab.ub[j] = 0.0;
  }

  // Phase 2: real objective; reduced costs recomputed from scratch.
  Vector c2 = Vector::Zero(n);
  c2.head(ns) = lp.obj;
  tab.d = c2.transpose();
  for (int r = 0; r < m; ++r) {
    const double cb = c2[tab.basis[r]];
    if (cb != 0.0) tab.d -= cb * tab.t.row(r);
  }
  const auto status = run_simplex(tab, max_iters, &out.iterations, lp.deadline);
  out.status = status;
  if (status != LpSolution::Status::Optimal) return out;

  Vector full = Vector::Zero(n);
  for (int j = 0; j < n; ++j)
    if (tab.state[j] != VarState::Basic) full[j] = tab.nonbasic_value(j);
  for (int r = 0; r < m; ++r) full[tab.basis[r]] = tab.xb[r];
  out.x = full.head(ns);
  out.objective = lp.obj.dot(out.x);
  return out;
}

}  // namespace ddn
