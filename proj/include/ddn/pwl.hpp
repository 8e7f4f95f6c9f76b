// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "ddn/types.hpp"

namespace ddn {

struct Segment {
  double slope = 0.0;
  double intercept = 0.0;

  double operator()(double z) const { return slope * z + intercept; }
};

/// Piecewise-linear approximation of softplus. Segment j is active on
/// [breakpoints[j-1], breakpoints[j]); the first and last segments extend to
/// -inf/+inf. max_error is the certified sup-norm error against softplus
/// over [lo, hi]; outside that range the error is uncertified.
struct PiecewiseApprox {
  std::vector<double> breakpoints;  // ascending, size m
  std::vector<Segment> segments;    // size m + 1
  double max_error = 0.0;
  double lo = 0.0;
  double hi = 0.0;

  int segment_index(double z) const;
  double operator()(double z) const { return segments[segment_index(z)](z); }
  int n_segments() const { return static_cast<int>(segments.size()); }
};

/// The fixed 5-segment table with dyadic slopes. Certified over [-8, 8];
/// both outer segments are the softplus asymptotes, so the error only decays
/// beyond that range.
PiecewiseApprox paper_pwl();

/// Secant-based approximation with certified sup error <= epsilon over
/// [lo, hi]. Segments are grown greedily from the left, each as long as the
/// closed-form secant gap allows. Throws if more than max_segments would be
/// needed.
PiecewiseApprox adaptive_pwl(double epsilon, double lo, double hi,
                             int max_segments = 10000);

}  // namespace ddn
