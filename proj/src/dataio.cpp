// SPDX-License-Identifier: Apache-2.0
#include "ddn/dataio.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ddn/rng.hpp"

namespace ddn {
namespace {

using nlohmann::json;

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

[[noreturn]] void fail_line(const std::string& origin, long line, const std::string& what) {
  throw DataError(origin + ":" + std::to_string(line) + ": " + what);
}

Vector parse_real_array(const json& arr) {
  Vector out(arr.size());
  Eigen::Index i = 0;
  for (const auto& x : arr) out[i++] = x.get<double>();
  return out;
}

}  // namespace

Dataset load_dataset(std::istream& is, const std::string& origin) {
  Dataset data;
  std::string line;
  long lineno = 0;
  Eigen::Index n_features = -1, n_labels = -1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      fail_line(origin, lineno, std::string("malformed JSON: ") + e.what());
    }
    if (j.contains("schema")) {
      if (j["schema"] != "ddn-dataset-v1")
        fail_line(origin, lineno, "unknown schema " + j["schema"].dump());
      continue;
    }
    if (!j.contains("features") || !j["features"].is_array())
      fail_line(origin, lineno, "missing \"features\" array");
    Instance inst;
    inst.features = parse_real_array(j["features"]);
    if (n_features < 0) n_features = inst.features.size();
    if (inst.features.size() != n_features)
      fail_line(origin, lineno,
                "features length " + std::to_string(inst.features.size()) +
                    " != " + std::to_string(n_features));
    if (j.contains("labels") && !j["labels"].is_null()) {
      const auto& arr = j["labels"];
      if (!arr.is_array()) fail_line(origin, lineno, "\"labels\" must be an array");
      BitVec labels(arr.size());
      Eigen::Index i = 0;
      for (const auto& x : arr) {
        if (!x.is_number_integer() || (x != 0 && x != 1))
          fail_line(origin, lineno, "labels must be 0 or 1, got " + x.dump());
        labels[i++] = x.get<int>();
      }
      if (n_labels < 0) n_labels = labels.size();
      if (labels.size() != n_labels)
        fail_line(origin, lineno,
                  "labels length " + std::to_string(labels.size()) +
                      " != " + std::to_string(n_labels));
      inst.labels = std::move(labels);
    }
    data.push_back(std::move(inst));
  }
  return data;
}

Dataset load_dataset(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open: " + path);
  return load_dataset(f, path);
}

void save_dataset(const Dataset& data, std::ostream& os) {
  os << "{\"schema\":\"ddn-dataset-v1\"}\n";
  for (const Instance& inst : data) {
    os << "{\"features\":[";
    for (Eigen::Index i = 0; i < inst.features.size(); ++i)
      os << (i ? "," : "") << fmt17(inst.features[i]);
    os << "]";
    if (inst.labels) {
      os << ",\"labels\":[";
      for (Eigen::Index i = 0; i < inst.labels->size(); ++i)
        os << (i ? "," : "") << (*inst.labels)[i];
      os << "]";
    }
    os << "}\n";
  }
}

void save_dataset(const Dataset& data, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot open for writing: " + path);
  save_dataset(data, f);
  if (!f.good()) throw DataError("write failed: " + path);
}

DdnModel load_model(std::istream& is, const std::string& origin) {
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw DataError(origin + ": malformed model JSON: " + e.what());
  }
  for (const char* key : {"format_version", "n_labels", "n_features", "w", "v", "b"})
    if (!j.contains(key)) throw DataError(origin + ": model missing \"" + key + "\"");
  if (j["format_version"] != 1)
    throw DataError(origin + ": unsupported format_version " + j["format_version"].dump());
  const Eigen::Index n = j["n_labels"].get<Eigen::Index>();
  const Eigen::Index f = j["n_features"].get<Eigen::Index>();
  if (n < 1 || f < 1) throw DataError(origin + ": n_labels and n_features must be positive");

  const Vector wf = parse_real_array(j["w"]);
  const Vector vf = parse_real_array(j["v"]);
  const Vector bf = parse_real_array(j["b"]);
  if (wf.size() != n * f) throw DimensionError("w", n * f, wf.size());
  if (vf.size() != n * n) throw DimensionError("v", n * n, vf.size());
  if (bf.size() != n) throw DimensionError("b", n, bf.size());

  DdnModel m;
  m.w = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                       Eigen::RowMajor>>(wf.data(), n, f);
  m.v = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                       Eigen::RowMajor>>(vf.data(), n, n);
  m.b = bf;
  try {
    m.validate();
  } catch (const Error& e) {
    throw DataError(origin + ": " + e.what());
  }
  return m;
}

DdnModel load_model(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw DataError("cannot open: " + path);
  return load_model(f, path);
}

void save_model(const DdnModel& model, std::ostream& os) {
  os << "{\"format_version\":1,\"n_labels\":" << model.n_labels()
     << ",\"n_features\":" << model.n_features() << ",\"w\":[";
  bool first = true;
  for (Eigen::Index i = 0; i < model.w.rows(); ++i)
    for (Eigen::Index k = 0; k < model.w.cols(); ++k) {
      os << (first ? "" : ",") << fmt17(model.w(i, k));
      first = false;
    }
  os << "],\"v\":[";
  first = true;
  for (Eigen::Index i = 0; i < model.v.rows(); ++i)
    for (Eigen::Index k = 0; k < model.v.cols(); ++k) {
      os << (first ? "" : ",") << fmt17(model.v(i, k));
      first = false;
    }
  os << "],\"b\":[";
  for (Eigen::Index i = 0; i < model.b.size(); ++i)
    os << (i ? "," : "") << fmt17(model.b[i]);
  os << "]}\n";
}

void save_model(const DdnModel& model, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw DataError("cannot open for writing: " + path);
  save_model(model, f);
  if (!f.good()) throw DataError("write failed: " + path);
}

GenSynthResult gen_synth(int n_labels, int n_features, int n_instances,
                         double coupling_strength, std::uint64_t seed) {
  if (n_labels < 1 || n_labels > 20)
    throw Error("gen_synth: n_labels must be in [1, 20]");
  if (n_features < 1) throw Error("gen_synth: n_features must be positive");
  if (n_instances < 0) throw Error("gen_synth: n_instances must be nonnegative");

  // Labels form three co-occurrence clusters with mutual exclusion between
  // clusters: positive couplings inside a cluster, negative across, both
  // proportional to coupling_strength with random magnitudes. The frustrated
  // structure is what makes joint decoding informative: on ambiguous
  // instances no cluster clears a 0.5 marginal, so per-label thresholding
  // outputs a non-mode hybrid while the MPE picks a coherent cluster.
  const double w_scale = 2.0 / std::sqrt(static_cast<double>(n_features));
  const double b_scale = 0.2;

  GenSynthResult out;
  Rng mrng(seed, 0);
  out.model = DdnModel::zeros(n_labels, n_features);
  for (Eigen::Index i = 0; i < n_labels; ++i)
    for (Eigen::Index k = 0; k < n_features; ++k)
      out.model.w(i, k) = w_scale * mrng.next_normal();
  for (Eigen::Index i = 0; i < n_labels; ++i) out.model.b[i] = b_scale * mrng.next_normal();
  for (Eigen::Index i = 0; i < n_labels; ++i)
    for (Eigen::Index k = i + 1; k < n_labels; ++k) {
      const double mag =
          coupling_strength * (0.25 + 0.2 * std::abs(mrng.next_normal()));
      const double val = (i % 3 == k % 3) ? mag : -mag;
      out.model.v(i, k) = val;
      out.model.v(k, i) = val;
    }

  const long states = n_labels <= 12 ? (1L << n_labels) : 0;
  std::vector<double> weight(states > 0 ? states : 0);

  out.data.reserve(n_instances);
  for (int t = 0; t < n_instances; ++t) {
    Rng rng(seed, static_cast<std::uint64_t>(t) + 1);
    Instance inst;
    inst.features = Vector(n_features);
    for (Eigen::Index k = 0; k < n_features; ++k) inst.features[k] = rng.next_normal();
    const Vector c = evidence_logits(out.model, inst.features);

    BitVec x(n_labels);
    if (states > 0) {
      // Symmetric v makes the network consistent: the Gibbs stationary
      // distribution has the closed form exp(c.x + sum_{i<k} v_ik x_i x_k),
      // which we enumerate and sample exactly.
      double total = 0.0;
      for (long s = 0; s < states; ++s) {
        double energy = 0.0;
        for (Eigen::Index i = 0; i < n_labels; ++i) {
          if (!((s >> (n_labels - 1 - i)) & 1)) continue;
          energy += c[i];
          for (Eigen::Index k = i + 1; k < n_labels; ++k)
            if ((s >> (n_labels - 1 - k)) & 1) energy += out.model.v(i, k);
        }
        weight[s] = std::exp(energy);
        total += weight[s];
      }
      const double u = rng.next_double() * total;
      double cum = 0.0;
      long pick = states - 1;
      for (long s = 0; s < states; ++s) {
        cum += weight[s];
        if (u < cum) {
          pick = s;
          break;
        }
      }
      for (Eigen::Index i = 0; i < n_labels; ++i)
        x[i] = static_cast<int>((pick >> (n_labels - 1 - i)) & 1);
    } else {
      // Too many states to enumerate: long Gibbs run instead.
      for (Eigen::Index i = 0; i < n_labels; ++i) x[i] = rng.bernoulli(0.5) ? 1 : 0;
      AssignmentState st(out.model, c, x);
      const int sweeps = 500;
      for (int sweep = 0; sweep < sweeps; ++sweep)
        for (Eigen::Index i = 0; i < n_labels; ++i)
          st.set_label(i, rng.bernoulli(sigmoid(st.logits()[i])) ? 1 : 0);
      x = st.assignment();
    }
    inst.labels = std::move(x);
    out.data.push_back(std::move(inst));
  }
  return out;
}

}  // namespace ddn
