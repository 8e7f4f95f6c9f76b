// SPDX-License-Identifier: Apache-2.0
#include "ddn/pwl.hpp"

#include <algorithm>
#include <cmath>

#include "ddn/model.hpp"

namespace ddn {
namespace {

// Exact sup of (secant - softplus) over [a, b]. Softplus is convex, so the
// secant lies above it and the gap peaks where softplus' equals the secant
// slope, i.e. at logit(slope).
double secant_gap(double a, double b) {
  if (b <= a) return 0.0;
  const double fa = softplus(a);
  const double fb = softplus(b);
  double s = (fb - fa) / (b - a);
  s = std::clamp(s, 1e-16, 1.0 - 1e-16);
  const double zstar = std::log(s) - std::log1p(-s);
  if (zstar <= a || zstar >= b) return 0.0;
  return fa + s * (zstar - a) - softplus(zstar);
}

Segment secant(double a, double b) {
  const double fa = softplus(a);
  const double s = (softplus(b) - fa) / (b - a);
  return {s, fa - s * a};
}

double grid_sup_error(const PiecewiseApprox& g, double lo, double hi, int points) {
  double worst = 0.0;
  for (int k = 0; k < points; ++k) {
    const double z = lo + (hi - lo) * static_cast<double>(k) / (points - 1);
    worst = std::max(worst, std::abs(g(z) - softplus(z)));
  }
  for (double bp : g.breakpoints) {
    if (bp < lo || bp > hi) continue;
    // Both adjacent segments are reachable at a breakpoint; take the worse.
    const int j = g.segment_index(bp);
    worst = std::max(worst, std::abs(g.segments[j](bp) - softplus(bp)));
    if (j > 0) worst = std::max(worst, std::abs(g.segments[j - 1](bp) - softplus(bp)));
  }
  return worst;
}

}  // namespace

int PiecewiseApprox::segment_index(double z) const {
  // Number of breakpoints <= z; membership interval is [bp_{j-1}, bp_j).
  return static_cast<int>(std::upper_bound(breakpoints.begin(), breakpoints.end(), z) -
                          breakpoints.begin());
}

PiecewiseApprox paper_pwl() {
  PiecewiseApprox g;
  g.breakpoints = {-3.257, -0.998, 0.602, 2.584};
  const double s1 = 0.0625 + 0.03125 + 0.015625 + 0.00390625;            // 2^-4+2^-5+2^-6+2^-8
  const double s2 = 0.25 + 0.125 + 0.0625 + 0.0078125 + 0.00390625;      // 2^-2+2^-3+2^-4+2^-7+2^-8
  const double s3 = 0.5 + 0.25 + 0.0625 + 0.0078125;                     // 2^-1+2^-2+2^-4+2^-7
  g.segments = {{0.0, 0.0}, {s1, 0.379}, {s2, 0.715}, {s3, 0.492}, {1.0, 0.0}};
  g.lo = -8.0;
  g.hi = 8.0;
  g.max_error = grid_sup_error(g, g.lo, g.hi, 100001);
  return g;
}

PiecewiseApprox adaptive_pwl(double epsilon, double lo, double hi, int max_segments) {
  if (!(epsilon > 0.0)) throw Error("adaptive_pwl: epsilon must be positive");
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw Error("adaptive_pwl: range must be finite with lo < hi");

  std::vector<double> cuts = {lo};
  std::vector<Segment> segs;
  double certified = 0.0;
  double a = lo;
  while (a < hi) {
    double b;
    if (secant_gap(a, hi) <= epsilon) {
      b = hi;
    } else {
      // Largest b with gap <= epsilon; gap grows monotonically with b.
      double feas = a, infeas = hi;
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (feas + infeas);
        (secant_gap(a, mid) <= epsilon ? feas : infeas) = mid;
      }
      b = feas;
      if (b <= a) throw Error("adaptive_pwl: failed to advance; epsilon too small");
    }
    segs.push_back(secant(a, b));
    certified = std::max(certified, secant_gap(a, b));
    cuts.push_back(b);
    a = b;
    if (static_cast<int>(segs.size()) > max_segments)
      throw Error("adaptive_pwl: segment count exceeds cap " + std::to_string(max_segments));
  }

  PiecewiseApprox g;
  g.segments = std::move(segs);
  g.breakpoints.assign(cuts.begin() + 1, cuts.end() - 1);  // interior cuts only
  g.max_error = certified;
  g.lo = lo;
  g.hi = hi;
  return g;
}

}  // namespace ddn
