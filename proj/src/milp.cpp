// SPDX-License-Identifier: Apache-2.0
#include "ddn/milp.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace ddn {
namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

MilpProgram encode(const DdnModel& model, const Eigen::Ref<const Vector>& features,
                   const PiecewiseApprox& pwl) {
  model.validate();
  const Eigen::Index n = model.n_labels();
  const int S = pwl.n_segments();

  MilpProgram prog;
  EncodingInfo& info = prog.info;
  info.n = n;
  info.c = evidence_logits(model, features);
  info.v = model.v;
  info.pwl = pwl;
  info.n_segments = S;

  // z-bounds: e is fixed, so z_i = c_i + sum_k v_ik x_k ranges over
  // [c_i + sum min(0,v), c_i + sum max(0,v)].
  info.z_lo = info.c + model.v.cwiseMin(0.0).rowwise().sum();
  info.z_hi = info.c + model.v.cwiseMax(0.0).rowwise().sum();
  if (!info.z_lo.allFinite() || !info.z_hi.allFinite())
    throw Error("encode: non-finite z-bounds (corrupt model)");

  auto add_var = [&](const std::string& name, double lb, double ub, bool binary) {
    prog.vars.push_back({name, lb, ub, binary});
    return static_cast<int>(prog.vars.size() - 1);
  };

  info.x_base = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    add_var("x_" + std::to_string(i), 0.0, 1.0, true);

  // One product variable per unordered pair with nonzero merged coefficient.
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = i + 1; k < n; ++k) {
      const double q = model.v(i, k) + model.v(k, i);
      if (q == 0.0) continue;
      const int var = add_var("y_" + std::to_string(i) + "_" + std::to_string(k),
                              0.0, 1.0, true);
      info.pairs.push_back({static_cast<int>(i), static_cast<int>(k), q, var});
    }

  info.alpha_base = static_cast<int>(prog.vars.size());
  for (Eigen::Index i = 0; i < n; ++i)
    for (int j = 0; j < S; ++j)
      add_var("a_" + std::to_string(j) + "_" + std::to_string(i), 0.0, 1.0, true);

  info.z_base = static_cast<int>(prog.vars.size());
  for (Eigen::Index i = 0; i < n; ++i)
    add_var("z_" + std::to_string(i), info.z_lo[i], info.z_hi[i], false);

  info.g_base = static_cast<int>(prog.vars.size());
  Vector g_lo(n), g_hi(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const Segment& seg : pwl.segments) {
      lo = std::min({lo, seg(info.z_lo[i]), seg(info.z_hi[i])});
      hi = std::max({hi, seg(info.z_lo[i]), seg(info.z_hi[i])});
    }
    g_lo[i] = lo;
    g_hi[i] = hi;
    add_var("g_" + std::to_string(i), lo, hi, false);
  }

  auto alpha = [&](int j, Eigen::Index i) {
    return info.alpha_base + static_cast<int>(i) * S + j;
  };

  // z_i - sum_{k != i} v_ik x_k = c_i
  for (Eigen::Index i = 0; i < n; ++i) {
    LinConstraint con;
    con.name = "zdef_" + std::to_string(i);
    con.terms.push_back({info.z_base + static_cast<int>(i), 1.0});
    for (Eigen::Index k = 0; k < n; ++k)
      if (model.v(i, k) != 0.0)
        con.terms.push_back({info.x_base + static_cast<int>(k), -model.v(i, k)});
    con.sense = Sense::Eq;
    con.rhs = info.c[i];
    prog.constraints.push_back(std::move(con));
  }

  // AND linearization: y >= x_i + x_k - 1, y <= x_i, y <= x_k.
  for (const PairProduct& p : info.pairs) {
    const std::string tag = std::to_string(p.i) + "_" + std::to_string(p.k);
    prog.constraints.push_back(
        {"and_lo_" + tag,
         {{p.var, 1.0}, {info.x_base + p.i, -1.0}, {info.x_base + p.k, -1.0}},
         Sense::Ge,
         -1.0});
    prog.constraints.push_back(
        {"and_a_" + tag, {{p.var, 1.0}, {info.x_base + p.i, -1.0}}, Sense::Le, 0.0});
    prog.constraints.push_back(
        {"and_b_" + tag, {{p.var, 1.0}, {info.x_base + p.k, -1.0}}, Sense::Le, 0.0});
  }

  // Exactly one active segment per label.
  for (Eigen::Index i = 0; i < n; ++i) {
    LinConstraint con;
    con.name = "asum_" + std::to_string(i);
    for (int j = 0; j < S; ++j) con.terms.push_back({alpha(j, i), 1.0});
    con.sense = Sense::Eq;
    con.rhs = 1.0;
    prog.constraints.push_back(std::move(con));
  }

  // Segment selection and value ties, big-M sized from the z-bounds.
  for (Eigen::Index i = 0; i < n; ++i) {
    const int zi = info.z_base + static_cast<int>(i);
    const int gi = info.g_base + static_cast<int>(i);
    for (int j = 0; j < S; ++j) {
      const std::string tag = std::to_string(j) + "_" + std::to_string(i);
      // alpha=1 => z >= lower breakpoint of segment j.
      if (j >= 1) {
        const double L = pwl.breakpoints[j - 1];
        const double M = L - info.z_lo[i];
        if (M > 0.0)
          prog.constraints.push_back(
              {"seg_lo_" + tag, {{zi, 1.0}, {alpha(j, i), -M}}, Sense::Ge, L - M});
      }
      // alpha=1 => z <= upper breakpoint of segment j (strict inequalities
      // in the segment conditions are realized as <=; breakpoint membership
      // may select either adjacent segment).
      if (j + 1 < S) {
        const double U = pwl.breakpoints[j];
        const double M = info.z_hi[i] - U;
        if (M > 0.0)
          prog.constraints.push_back(
              {"seg_hi_" + tag, {{zi, 1.0}, {alpha(j, i), M}}, Sense::Le, U + M});
      }
      // alpha=1 => g = slope*z + intercept.
      const Segment& seg = pwl.segments[j];
      const double seg_min = std::min(seg(info.z_lo[i]), seg(info.z_hi[i]));
      const double seg_max = std::max(seg(info.z_lo[i]), seg(info.z_hi[i]));
      const double M1 = seg_max - g_lo[i];
      const double M2 = g_hi[i] - seg_min;
      prog.constraints.push_back({"gtie_lo_" + tag,
                                  {{gi, 1.0}, {zi, -seg.slope}, {alpha(j, i), -M1}},
                                  Sense::Ge,
                                  seg.intercept - M1});
      prog.constraints.push_back({"gtie_hi_" + tag,
                                  {{gi, 1.0}, {zi, -seg.slope}, {alpha(j, i), M2}},
                                  Sense::Le,
                                  seg.intercept + M2});
    }
  }

  // maximize sum_i c_i x_i + sum_pairs q y - sum_i g_i
  for (Eigen::Index i = 0; i < n; ++i)
    if (info.c[i] != 0.0) prog.objective.push_back({info.x_base + static_cast<int>(i), info.c[i]});
  for (const PairProduct& p : info.pairs) prog.objective.push_back({p.var, p.coef});
  for (Eigen::Index i = 0; i < n; ++i)
    prog.objective.push_back({info.g_base + static_cast<int>(i), -1.0});

  info.valid = true;
  return prog;
}

Vector complete_assignment(const MilpProgram& prog, const BitVec& x) {
  const EncodingInfo& info = prog.info;
  if (!info.valid) throw Error("complete_assignment requires encoder bookkeeping");
  if (x.size() != info.n) throw DimensionError("labels", info.n, x.size());

  Vector full = Vector::Zero(static_cast<Eigen::Index>(prog.vars.size()));
  const Vector z = info.c + info.v * to_real(x);
  for (Eigen::Index i = 0; i < info.n; ++i) full[info.x_base + i] = x[i];
  for (const PairProduct& p : info.pairs) full[p.var] = x[p.i] * x[p.k];
  for (Eigen::Index i = 0; i < info.n; ++i) {
    const int j = info.pwl.segment_index(z[i]);
    full[info.alpha_base + i * info.n_segments + j] = 1.0;
    full[info.z_base + i] = z[i];
    full[info.g_base + i] = info.pwl.segments[j](z[i]);
  }
  return full;
}

double direct_objective(const MilpProgram& prog, const BitVec& x) {
  const EncodingInfo& info = prog.info;
  if (!info.valid) throw Error("direct_objective requires encoder bookkeeping");
  const Vector z = info.c + info.v * to_real(x);
  double obj = 0.0;
  for (Eigen::Index i = 0; i < info.n; ++i)
    obj += (x[i] ? z[i] : 0.0) - info.pwl(z[i]);
  return obj;
}

double objective_value(const MilpProgram& prog, const Vector& full) {
  double obj = 0.0;
  for (const LinTerm& t : prog.objective) obj += t.coef * full[t.var];
  return obj;
}

// ---------------------------------------------------------------------------
// LP text format
// ---------------------------------------------------------------------------

namespace {

void write_terms(std::ostream& os, const MilpProgram& prog,
                 const std::vector<LinTerm>& terms) {
  int line_len = 0;
  bool first = true;
  for (const LinTerm& t : terms) {
    if (t.coef == 0.0) continue;
    std::string piece;
    const double mag = std::abs(t.coef);
    const std::string sign = t.coef < 0.0 ? "-" : (first ? "" : "+");
    piece = " " + (sign.empty() ? "" : sign + " ") + fmt(mag) + " " + prog.vars[t.var].name;
    if (line_len + static_cast<int>(piece.size()) > 200) {
      os << "\n ";
      line_len = 1;
    }
    os << piece;
    line_len += static_cast<int>(piece.size());
    first = false;
  }
  if (first) os << " 0 " << prog.vars[0].name;  // degenerate empty expression
}

}  // namespace

void export_lp(const MilpProgram& prog, std::ostream& os) {
  os << "\\ DDN MPE program\n";
  os << "Maximize\n obj:";
  write_terms(os, prog, prog.objective);
  os << "\nSubject To\n";
  for (const LinConstraint& con : prog.constraints) {
    os << " " << con.name << ":";
    write_terms(os, prog, con.terms);
    switch (con.sense) {
      case Sense::Le: os << " <= "; break;
      case Sense::Ge: os << " >= "; break;
      case Sense::Eq: os << " = "; break;
    }
    os << fmt(con.rhs) << "\n";
  }
  os << "Bounds\n";
  for (const VarInfo& v : prog.vars) {
    if (v.binary) continue;  // binaries are bounded by their section
    os << " " << fmt(v.lb) << " <= " << v.name << " <= " << fmt(v.ub) << "\n";
  }
  os << "Binaries\n";
  int line_len = 0;
  for (const VarInfo& v : prog.vars) {
    if (!v.binary) continue;
    if (line_len + static_cast<int>(v.name.size()) + 1 > 200) {
      os << "\n";
      line_len = 0;
    }
    os << " " << v.name;
    line_len += static_cast<int>(v.name.size()) + 1;
  }
  os << "\nEnd\n";
}

void export_lp(const MilpProgram& prog, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot open for writing: " + path);
  export_lp(prog, f);
  if (!f.good()) throw DataError("write failed: " + path);
}

namespace {

struct Tokenizer {
  std::vector<std::string> tokens;
  std::size_t pos = 0;

  explicit Tokenizer(std::istream& is) {
    std::string line;
    while (std::getline(is, line)) {
      const auto bs = line.find('\\');
      if (bs != std::string::npos) line.erase(bs);
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok) tokens.push_back(tok);
    }
  }

  bool done() const { return pos >= tokens.size(); }
  const std::string& peek() const { return tokens[pos]; }
  std::string next() { return tokens[pos++]; }
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool is_number(const std::string& s, double* out) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') return false;
  *out = v;
  return true;
}

bool is_sense(const std::string& s, Sense* out) {
  if (s == "<=" || s == "<") { *out = Sense::Le; return true; }
  if (s == ">=" || s == ">") { *out = Sense::Ge; return true; }
  if (s == "=") { *out = Sense::Eq; return true; }
  return false;
}

}  // namespace

MilpProgram parse_lp(std::istream& is) {
  Tokenizer tz(is);
  MilpProgram prog;
  std::map<std::string, int> index;

  auto var_id = [&](const std::string& name) {
    auto it = index.find(name);
    if (it != index.end()) return it->second;
    // LP default bounds: [0, +inf)
    prog.vars.push_back({name, 0.0, std::numeric_limits<double>::infinity(), false});
    const int id = static_cast<int>(prog.vars.size() - 1);
    index[name] = id;
    return id;
  };

  enum class Section { None, Objective, Constraints, Bounds, Binaries };
  Section sec = Section::None;

  auto section_of = [&](const std::string& tok) -> std::optional<Section> {
    const std::string t = lower(tok);
    if (t == "maximize" || t == "max") return Section::Objective;
    if (t == "subject") { return Section::Constraints; }  // consumes "to" below
    if (t == "st" || t == "s.t.") return Section::Constraints;
    if (t == "bounds") return Section::Bounds;
    if (t == "binaries" || t == "binary" || t == "bin") return Section::Binaries;
    if (t == "end") return Section::None;
    return std::nullopt;
  };

  // Parses a linear expression until a sense token or section keyword.
  auto parse_terms = [&](std::vector<LinTerm>* terms, Sense* sense_out) -> bool {
    double sign = 1.0;
    bool have_pending_coef = false;
    double coef = 1.0;
    while (!tz.done()) {
      const std::string& tok = tz.peek();
      Sense s;
      if (is_sense(tok, &s)) {
        if (sense_out) {
          *sense_out = s;
          tz.next();
        }
        return true;
      }
      if (section_of(tok) && !have_pending_coef) return false;
      tz.next();
      if (tok == "+") { sign = 1.0; continue; }
      if (tok == "-") { sign = -sign; continue; }
      double num;
      if (is_number(tok, &num)) {
        coef = num;
        have_pending_coef = true;
        continue;
      }
      terms->push_back({var_id(tok), sign * (have_pending_coef ? coef : 1.0)});
      sign = 1.0;
      coef = 1.0;
      have_pending_coef = false;
    }
    return false;
  };

  while (!tz.done()) {
    const std::string tok = tz.peek();
    if (auto s = section_of(tok)) {
      tz.next();
      if (lower(tok) == "subject") {
        if (!tz.done() && lower(tz.peek()) == "to") tz.next();
      }
      sec = *s;
      continue;
    }
    switch (sec) {
      case Section::Objective: {
        std::string name = tz.next();
        if (!name.empty() && name.back() == ':') {
          // objective label; expression follows
        } else {
          --tz.pos;  // unnamed objective
        }
        parse_terms(&prog.objective, nullptr);
        break;
      }
      case Section::Constraints: {
        LinConstraint con;
        std::string name = tz.next();
        if (!name.empty() && name.back() == ':') {
          con.name = name.substr(0, name.size() - 1);
        } else {
          --tz.pos;
        }
        if (!parse_terms(&con.terms, &con.sense))
          throw DataError("lp parse: constraint without relational operator");
        double rhs;
        if (tz.done() || !is_number(tz.next(), &rhs))
          throw DataError("lp parse: constraint missing right-hand side");
        con.rhs = rhs;
        prog.constraints.push_back(std::move(con));
        break;
      }
      case Section::Bounds: {
        // Only the "lo <= var <= hi" and "var free" forms are emitted.
        double lo;
        std::string t0 = tz.next();
        if (is_number(t0, &lo)) {
          Sense s;
          if (!is_sense(tz.next(), &s) || s != Sense::Le)
            throw DataError("lp parse: malformed bound line");
          const int id = var_id(tz.next());
          if (!is_sense(tz.next(), &s) || s != Sense::Le)
            throw DataError("lp parse: malformed bound line");
          double hi;
          if (!is_number(tz.next(), &hi)) throw DataError("lp parse: bad upper bound");
          prog.vars[id].lb = lo;
          prog.vars[id].ub = hi;
        } else {
          const int id = var_id(t0);
          const std::string kw = lower(tz.next());
          if (kw != "free") throw DataError("lp parse: unsupported bound form");
          prog.vars[id].lb = -std::numeric_limits<double>::infinity();
          prog.vars[id].ub = std::numeric_limits<double>::infinity();
        }
        break;
      }
      case Section::Binaries: {
        const int id = var_id(tz.next());
        prog.vars[id].binary = true;
        prog.vars[id].lb = 0.0;
        prog.vars[id].ub = 1.0;
        break;
      }
      case Section::None:
        tz.next();
        break;
    }
  }
  return prog;
}

MilpProgram parse_lp(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open: " + path);
  return parse_lp(f);
}

namespace {

bool close(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

// Canonical text of a constraint with terms sorted by variable name.
std::string canonical(const MilpProgram& prog, const LinConstraint& con) {
  std::vector<std::pair<std::string, double>> ts;
  for (const LinTerm& t : con.terms)
    if (t.coef != 0.0) ts.emplace_back(prog.vars[t.var].name, t.coef);
  std::sort(ts.begin(), ts.end());
  std::ostringstream os;
  os << con.name << "|";
  for (auto& [name, coef] : ts) os << name << ":" << fmt(coef) << ",";
  os << static_cast<char>(con.sense) << "|" << fmt(con.rhs);
  return os.str();
}

}  // namespace

bool programs_structurally_equal(const MilpProgram& a, const MilpProgram& b) {
  std::map<std::string, const VarInfo*> va, vb;
  for (const VarInfo& v : a.vars) va[v.name] = &v;
  for (const VarInfo& v : b.vars) vb[v.name] = &v;
  if (va.size() != vb.size()) return false;
  for (auto& [name, v] : va) {
    auto it = vb.find(name);
    if (it == vb.end()) return false;
    if (v->binary != it->second->binary) return false;
    if (!close(v->lb, it->second->lb) || !close(v->ub, it->second->ub)) return false;
  }

  auto obj_map = [](const MilpProgram& p) {
    std::map<std::string, double> m;
    for (const LinTerm& t : p.objective)
      if (t.coef != 0.0) m[p.vars[t.var].name] += t.coef;
    return m;
  };
  const auto oa = obj_map(a), ob = obj_map(b);
  if (oa.size() != ob.size()) return false;
  for (auto& [name, coef] : oa) {
    auto it = ob.find(name);
    if (it == ob.end() || !close(coef, it->second)) return false;
  }

  std::vector<std::string> ca, cb;
  for (const LinConstraint& con : a.constraints) ca.push_back(canonical(a, con));
  for (const LinConstraint& con : b.constraints) cb.push_back(canonical(b, con));
  std::sort(ca.begin(), ca.end());
  std::sort(cb.begin(), cb.end());
  return ca == cb;
}

}  // namespace ddn
