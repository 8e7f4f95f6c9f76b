// SPDX-License-Identifier: Apache-2.0
//
// Single ddn binary: train / infer / evaluate / oracle / export-milp /
// gen-synth. Results stream to stdout or --out as JSONL; logs go to stderr
// only (DDN_LOG={error,info,debug}). Exit codes: 0 success, 1 usage error,
// 2 data error.

#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "ddn/dataio.hpp"
#include "ddn/gibbs.hpp"
#include "ddn/local_search.hpp"
#include "ddn/log.hpp"
#include "ddn/metrics.hpp"
#include "ddn/milp.hpp"
#include "ddn/oracle.hpp"
#include "ddn/rng.hpp"
#include "ddn/trainer.hpp"

namespace {

using nlohmann::json;

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// Independent per-instance seed so parallel inference is reproducible
// regardless of scheduling: instance t draws from SplitMix64(seed ^ golden*(t+1)).
std::uint64_t instance_seed(std::uint64_t seed, std::size_t t) {
  return ddn::SplitMix64(seed ^ (0x9e3779b97f4a7c15ULL * (t + 1))).next();
}

std::unique_ptr<std::ofstream> open_out(const std::string& path) {
  if (path.empty()) return nullptr;
  auto f = std::make_unique<std::ofstream>(path);
  if (!*f) throw ddn::DataError("cannot open for writing: " + path);
  return f;
}

struct InferOptions {
  std::string data_path, model_path, out_path;
  std::string engine;
  std::uint64_t seed = 0;
  double time_limit = 60.0;
  unsigned jobs = 0;
  // gibbs
  int samples = 1000;
  int burn_in = -1;  // <0: default n_samples/10
  // local search
  int max_flips = -1;
  double noise_p = 0.3;
  int restarts = 0;
  // milp
  std::string pwl = "adaptive";
  double epsilon = 0.001;
  std::string mode = "auto";
};

ddn::InferenceResult run_engine(const InferOptions& opt, const ddn::DdnModel& model,
                                const ddn::Instance& inst, std::size_t index) {
  const std::uint64_t seed = instance_seed(opt.seed, index);
  if (opt.engine == "gibbs") {
    ddn::GibbsConfig cfg;
    cfg.n_samples = opt.samples;
    if (opt.burn_in >= 0) cfg.burn_in = opt.burn_in;
    cfg.seed = seed;
    cfg.time_limit_s = opt.time_limit;
    return ddn::gibbs_mpe(model, inst.features, cfg);
  }
  if (opt.engine == "rw" || opt.engine == "greedy") {
    ddn::LocalSearchConfig cfg;
    cfg.max_flips = opt.max_flips;
    cfg.noise_p = opt.noise_p;
    cfg.restarts = opt.restarts;
    cfg.seed = seed;
    cfg.time_limit_s = opt.time_limit;
    return opt.engine == "rw" ? ddn::random_walk_mpe(model, inst.features, cfg)
                              : ddn::greedy_mpe(model, inst.features, cfg);
  }
  ddn::MilpConfig cfg;
  cfg.pwl = opt.pwl == "paper" ? ddn::MilpConfig::PwlKind::Paper
                               : ddn::MilpConfig::PwlKind::Adaptive;
  cfg.epsilon = opt.epsilon;
  cfg.solve.time_limit_s = opt.time_limit;
  cfg.solve.mode = opt.mode == "enumerate" ? ddn::SolveMode::Enumerate
                   : opt.mode == "bnb"     ? ddn::SolveMode::BranchAndBound
                                           : ddn::SolveMode::Auto;
  return ddn::milp_mpe(model, inst.features, cfg);
}

std::string result_line(const ddn::InferenceResult& res) {
  std::ostringstream os;
  os << "{\"assignment\":[";
  for (Eigen::Index i = 0; i < res.assignment.size(); ++i)
    os << (i ? "," : "") << res.assignment[i];
  os << "],\"score\":" << fmt17(res.score) << ",\"marginals\":";
  if (res.marginals) {
    os << "[";
    for (Eigen::Index i = 0; i < res.marginals->size(); ++i)
      os << (i ? "," : "") << fmt17((*res.marginals)[i]);
    os << "]";
  } else {
    os << "null";
  }
  os << ",\"engine\":\"" << res.engine << "\"";
  os << ",\"elapsed_s\":" << fmt17(res.elapsed_s);
  os << ",\"optimal\":";
  if (res.optimal)
    os << (*res.optimal ? "true" : "false");
  else
    os << "null";
  os << "}";
  return os.str();
}

int cmd_infer(const InferOptions& opt) {
  const ddn::DdnModel model = ddn::load_model(opt.model_path);
  const ddn::Dataset data = ddn::load_dataset(opt.data_path);
  std::vector<std::string> lines(data.size());

  const unsigned jobs =
      opt.jobs > 0 ? opt.jobs : std::max(1u, std::thread::hardware_concurrency());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex err_mu;

  auto worker = [&] {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= data.size() || failed.load()) return;
      try {
        lines[t] = result_line(run_engine(opt, model, data[t], t));
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!failed.exchange(true)) first_error = e.what();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned k = 0; k + 1 < jobs && k + 1 < data.size() + 1; ++k)
    pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (failed.load()) throw ddn::Error(first_error);

  auto file = open_out(opt.out_path);
  std::ostream& os = file ? *file : std::cout;
  for (const std::string& line : lines) os << line << "\n";
  ddn::log_info("infer: %zu instances, engine=%s", data.size(), opt.engine.c_str());
  return 0;
}

std::vector<ddn::BitVec> labels_of(const ddn::Dataset& data, const std::string& origin) {
  std::vector<ddn::BitVec> out;
  out.reserve(data.size());
  for (std::size_t t = 0; t < data.size(); ++t) {
    if (!data[t].labels)
      throw ddn::DataError(origin + ": instance " + std::to_string(t) + " has no labels");
    out.push_back(*data[t].labels);
  }
  return out;
}

int cmd_evaluate(const std::string& pred_path, const std::string& truth_path,
                 bool with_scores, const std::string& out_path) {
  const ddn::Dataset truth = ddn::load_dataset(truth_path);
  std::ifstream pf(pred_path);
  if (!pf) throw ddn::DataError("cannot open: " + pred_path);

  std::vector<ddn::BitVec> y_pred;
  std::vector<ddn::Vector> scores;
  std::string line;
  long lineno = 0;
  while (std::getline(pf, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw ddn::DataError(pred_path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!j.contains("assignment"))
      throw ddn::DataError(pred_path + ":" + std::to_string(lineno) +
                           ": missing \"assignment\"");
    const auto& arr = j["assignment"];
    ddn::BitVec x(arr.size());
    Eigen::Index i = 0;
    for (const auto& v : arr) x[i++] = v.get<int>();
    y_pred.push_back(std::move(x));
    if (with_scores) {
      if (!j.contains("marginals") || j["marginals"].is_null())
        throw ddn::DataError(pred_path + ":" + std::to_string(lineno) +
                             ": --scores requested but line has no marginals");
      const auto& ms = j["marginals"];
      ddn::Vector s(ms.size());
      i = 0;
      for (const auto& v : ms) s[i++] = v.get<double>();
      scores.push_back(std::move(s));
    }
  }

  const auto y_true = labels_of(truth, truth_path);
  const ddn::EvalReport rep =
      ddn::evaluate(y_true, y_pred, with_scores ? &scores : nullptr);

  json out{{"sa", rep.sa},           {"ji", rep.ji},
           {"hl", rep.hl},           {"macro_f1", rep.macro_f1},
           {"micro_f1", rep.micro_f1}, {"example_f1", rep.example_f1},
           {"n_examples", rep.n_examples}};
  if (rep.lrap) out["lrap"] = *rep.lrap;
  if (rep.map) out["map"] = *rep.map;
  auto file = open_out(out_path);
  (file ? *file : std::cout) << out.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dependency-network training and MPE inference"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "Fit model parameters by CPLL minimization");
  std::string tr_data, tr_out, tr_init;
  ddn::TrainConfig tr_cfg;
  tr_cfg.l1_lambda = 0.01;
  double tr_decay_factor = 1.0;
  int tr_decay_every = 0;
  train->add_option("--data", tr_data, "labeled dataset JSONL")->required();
  train->add_option("--out", tr_out, "output model JSON")->required();
  train->add_option("--lr", tr_cfg.learning_rate, "learning rate");
  train->add_option("--l1", tr_cfg.l1_lambda, "l1 regularization constant");
  train->add_option("--epochs", tr_cfg.epochs, "training epochs");
  train->add_option("--batch", tr_cfg.batch_size, "mini-batch size");
  train->add_option("--seed", tr_cfg.seed, "shuffle seed");
  train->add_option("--lr-decay-factor", tr_decay_factor, "step-decay multiplier");
  train->add_option("--lr-decay-every", tr_decay_every, "epochs between decays");
  train->add_option("--init", tr_init, "warm-start model JSON");

  // infer
  auto* infer = app.add_subcommand("infer", "Run MPE inference per instance");
  InferOptions io;
  infer->add_option("--data", io.data_path, "dataset JSONL")->required();
  infer->add_option("--model", io.model_path, "model JSON")->required();
  infer->add_option("--engine", io.engine, "gibbs|rw|greedy|milp")
      ->required()
      ->check(CLI::IsMember({"gibbs", "rw", "greedy", "milp"}));
  infer->add_option("--out", io.out_path, "output JSONL (default stdout)");
  infer->add_option("--seed", io.seed, "base RNG seed");
  infer->add_option("--time-limit", io.time_limit, "seconds per instance");
  infer->add_option("--jobs", io.jobs, "parallel workers (default: hardware)");
  infer->add_option("--samples", io.samples, "gibbs: sweeps N");
  infer->add_option("--burn-in", io.burn_in, "gibbs: discarded sweeps (default N/10)");
  infer->add_option("--max-flips", io.max_flips, "rw/greedy: flips per restart (default 50n)");
  infer->add_option("--noise-p", io.noise_p, "greedy: random-flip probability");
  infer->add_option("--restarts", io.restarts, "rw/greedy: extra restarts");
  infer->add_option("--pwl", io.pwl, "milp: paper|adaptive")
      ->check(CLI::IsMember({"paper", "adaptive"}));
  infer->add_option("--epsilon", io.epsilon, "milp: adaptive pwl tolerance");
  infer->add_option("--mode", io.mode, "milp: auto|enumerate|bnb")
      ->check(CLI::IsMember({"auto", "enumerate", "bnb"}));

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Multi-label metrics report");
  std::string ev_pred, ev_truth, ev_out;
  bool ev_scores = false;
  eval->add_option("--pred", ev_pred, "predictions JSONL (infer output)")->required();
  eval->add_option("--truth", ev_truth, "labeled dataset JSONL")->required();
  eval->add_flag("--scores", ev_scores, "also compute LRAP and mAP from marginals");
  eval->add_option("--out", ev_out, "output JSON (default stdout)");

  // oracle
  auto* orac = app.add_subcommand("oracle", "Exact brute-force MPE (n <= 24)");
  std::string or_data, or_model, or_out;
  orac->add_option("--data", or_data, "dataset JSONL")->required();
  orac->add_option("--model", or_model, "model JSON")->required();
  orac->add_option("--out", or_out, "output JSONL (default stdout)");

  // export-milp
  auto* exp = app.add_subcommand("export-milp", "Write one instance's MILP as an LP file");
  std::string ex_data, ex_model, ex_out, ex_pwl = "adaptive";
  double ex_eps = 0.001;
  std::size_t ex_index = 0;
  exp->add_option("--data", ex_data, "dataset JSONL")->required();
  exp->add_option("--model", ex_model, "model JSON")->required();
  exp->add_option("--out", ex_out, "output LP path")->required();
  exp->add_option("--index", ex_index, "instance index (default 0)");
  exp->add_option("--pwl", ex_pwl, "paper|adaptive")
      ->check(CLI::IsMember({"paper", "adaptive"}));
  exp->add_option("--epsilon", ex_eps, "adaptive pwl tolerance");

  // gen-synth
  auto* gen = app.add_subcommand("gen-synth", "Generate correlated-label synthetic data");
  int gs_labels = 10, gs_features = 20, gs_n = 1000;
  double gs_coupling = 3.0;
  std::uint64_t gs_seed = 0;
  std::string gs_out, gs_model_out;
  gen->add_option("--labels", gs_labels, "label count (<= 20)")->required();
  gen->add_option("--features", gs_features, "feature count")->required();
  gen->add_option("--n", gs_n, "instance count")->required();
  gen->add_option("--coupling", gs_coupling, "label interaction strength");
  gen->add_option("--seed", gs_seed, "RNG seed");
  gen->add_option("--out", gs_out, "output dataset JSONL")->required();
  gen->add_option("--model-out", gs_model_out, "write the generating model JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    std::cerr << app.help() << "\n";
    return 1;
  }

  try {
    if (train->parsed()) {
      if (tr_decay_every > 0 && tr_decay_factor != 1.0) {
        tr_cfg.lr_schedule.kind = ddn::LrSchedule::Kind::StepDecay;
        tr_cfg.lr_schedule.factor = tr_decay_factor;
        tr_cfg.lr_schedule.every_k_epochs = tr_decay_every;
      }
      const ddn::Dataset data = ddn::load_dataset(tr_data);
      std::optional<ddn::DdnModel> init;
      if (!tr_init.empty()) init = ddn::load_model(tr_init);
      const ddn::TrainResult res =
          ddn::train(data, tr_cfg, init ? &*init : nullptr);
      for (std::size_t e = 0; e < res.loss_trace.size(); ++e)
        ddn::log_info("epoch %zu: loss %.6f", e, res.loss_trace[e]);
      ddn::save_model(res.model, tr_out);
    } else if (infer->parsed()) {
      return cmd_infer(io);
    } else if (eval->parsed()) {
      return cmd_evaluate(ev_pred, ev_truth, ev_scores, ev_out);
    } else if (orac->parsed()) {
      const ddn::DdnModel model = ddn::load_model(or_model);
      const ddn::Dataset data = ddn::load_dataset(or_data);
      auto file = open_out(or_out);
      std::ostream& os = file ? *file : std::cout;
      for (const ddn::Instance& inst : data) {
        const auto [x, sc] = ddn::brute_force_mpe(model, inst.features);
        os << "{\"assignment\":[";
        for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
        os << "],\"score\":" << fmt17(sc) << "}\n";
      }
    } else if (exp->parsed()) {
      const ddn::DdnModel model = ddn::load_model(ex_model);
      const ddn::Dataset data = ddn::load_dataset(ex_data);
      if (ex_index >= data.size())
        throw ddn::DataError("--index " + std::to_string(ex_index) +
                             " out of range (dataset has " +
                             std::to_string(data.size()) + " instances)");
      ddn::PiecewiseApprox pwl;
      const ddn::Vector& feats = data[ex_index].features;
      if (ex_pwl == "paper") {
        pwl = ddn::paper_pwl();
      } else {
        const ddn::Vector c = ddn::evidence_logits(model, feats);
        const ddn::Vector z_lo = c + model.v.cwiseMin(0.0).rowwise().sum();
        const ddn::Vector z_hi = c + model.v.cwiseMax(0.0).rowwise().sum();
        pwl = ddn::adaptive_pwl(ex_eps, z_lo.minCoeff() - 1.0, z_hi.maxCoeff() + 1.0);
      }
      ddn::export_lp(ddn::encode(model, feats, pwl), ex_out);
    } else if (gen->parsed()) {
      const ddn::GenSynthResult res =
          ddn::gen_synth(gs_labels, gs_features, gs_n, gs_coupling, gs_seed);
      ddn::save_dataset(res.data, gs_out);
      if (!gs_model_out.empty()) ddn::save_model(res.model, gs_model_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
