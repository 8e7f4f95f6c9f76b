// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ddn/model.hpp"
#include "ddn/pwl.hpp"
#include "ddn/result.hpp"

namespace ddn {

enum class Sense : char { Le = '<', Ge = '>', Eq = '=' };

struct LinTerm {
  int var = 0;
  double coef = 0.0;
};

struct LinConstraint {
  std::string name;
  std::vector<LinTerm> terms;
  Sense sense = Sense::Le;
  double rhs = 0.0;
};

struct VarInfo {
  std::string name;
  double lb = 0.0;
  double ub = 0.0;
  bool binary = false;
};

/// One merged product variable y = x_i * x_k for an unordered label pair;
/// coef is v_ik + v_ki.
struct PairProduct {
  int i = 0;
  int k = 0;
  double coef = 0.0;
  int var = 0;
};

/// Bookkeeping the encoder leaves behind so the solver can evaluate integral
/// assignments directly. Absent (valid=false) on programs read back from an
/// LP file.
struct EncodingInfo {
  Eigen::Index n = 0;
  Vector c;        // evidence logits b + w.e
  Matrix v;        // label interaction weights
  PiecewiseApprox pwl;
  Vector z_lo, z_hi;
  std::vector<PairProduct> pairs;
  int x_base = 0, alpha_base = 0, z_base = 0, g_base = 0;
  int n_segments = 0;
  bool valid = false;
};

/// Mixed-integer linear program: maximize objective subject to constraints
/// and variable bounds, with the flagged variables binary.
struct MilpProgram {
  std::vector<VarInfo> vars;
  std::vector<LinConstraint> constraints;
  std::vector<LinTerm> objective;
  EncodingInfo info;
};

/// Encodes max_x sum_i [x_i z_i - g(z_i)] with z_i = c_i + sum_k v_ik x_k as
/// a MILP: binary products via the three AND inequalities, segment selection
/// via one-hot alpha variables, indicator and segment-value constraints
/// linearized with per-constraint big-M derived from the z-bounds.
MilpProgram encode(const DdnModel& model, const Eigen::Ref<const Vector>& features,
                   const PiecewiseApprox& pwl);

/// Full variable vector induced by a binary label assignment (the unique
/// honest completion: products, one-hot segment selectors, logits, segment
/// values).
Vector complete_assignment(const MilpProgram& prog, const BitVec& x);

/// Objective of the honest completion, evaluated directly as
/// sum_i [x_i z_i - g(z_i)] without going through the program matrices.
double direct_objective(const MilpProgram& prog, const BitVec& x);

/// Objective term sum over an explicit variable vector.
double objective_value(const MilpProgram& prog, const Vector& full);

void export_lp(const MilpProgram& prog, std::ostream& os);
void export_lp(const MilpProgram& prog, const std::string& path);

/// Minimal reader for the LP subset emitted by export_lp. Recovers the
/// generic program (variables, bounds, constraints, objective); encoder
/// bookkeeping is not reconstructed.
MilpProgram parse_lp(std::istream& is);
MilpProgram parse_lp(const std::string& path);

/// Structural comparison ignoring constraint order; coefficients compared at
/// 1e-9 relative tolerance.
bool programs_structurally_equal(const MilpProgram& a, const MilpProgram& b);

enum class SolveMode { Auto, Enumerate, BranchAndBound };

struct SolveConfig {
  SolveMode mode = SolveMode::Auto;
  double time_limit_s = 60.0;
  int enumerate_below = 16;  // Auto picks enumeration for n below this
};

/// Solves the program over the binary labels. Enumeration mode walks all 2^n
/// assignments evaluating the objective directly; branch-and-bound runs
/// depth-first over the LP relaxation, branching on the most fractional
/// label. Anytime: returns the incumbent at the time limit. The result
/// carries the MILP objective; `score` is left for the caller to fill.
InferenceResult solve_milp(const MilpProgram& prog, const SolveConfig& cfg = {});

struct MilpConfig {
  enum class PwlKind { Paper, Adaptive };
  PwlKind pwl = PwlKind::Adaptive;
  double epsilon = 0.001;
  double range_pad = 1.0;  // padding beyond the instance z-range (adaptive)
  SolveConfig solve;
};

/// End-to-end MILP engine: builds the piecewise approximation (adaptive over
/// the instance's padded z-range by default), encodes, solves, and returns
/// the decoded assignment with its exact softplus score.
InferenceResult milp_mpe(const DdnModel& model, const Eigen::Ref<const Vector>& features,
                         const MilpConfig& cfg = {});

}  // namespace ddn
