// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "ddn/dataio.hpp"
#include "ddn/oracle.hpp"
#include "ddn/trainer.hpp"
#include "fixtures.hpp"

using namespace ddn;
using ddnt::bits;

TEST_CASE("dataset round trip is bit-exact") {
  Dataset d;
  Instance a;
  a.features = Vector(3);
  a.features << 0.1, -1.0 / 3.0, 1e-17;
  a.labels = bits({1, 0});
  Instance b;
  b.features = Vector(3);
  b.features << -2.5e8, 3.14159265358979312, 0.0;
  d.push_back(a);
  d.push_back(b);  // second instance unlabeled

  std::ostringstream os;
  save_dataset(d, os);
  std::istringstream is(os.str());
  const Dataset back = load_dataset(is);
  REQUIRE(back.size() == 2);
  CHECK(back[0].features == d[0].features);
  CHECK(back[1].features == d[1].features);
  REQUIRE(back[0].labels.has_value());
  CHECK(*back[0].labels == *d[0].labels);
  CHECK(!back[1].labels.has_value());
}

TEST_CASE("empty file loads as empty dataset") {
  std::istringstream is("");
  CHECK(load_dataset(is).empty());
}

TEST_CASE("loader errors carry line numbers") {
  {
    std::istringstream is("{\"features\":[1,2]}\nnot json\n");
    CHECK_THROWS_WITH_AS(load_dataset(is, "data"), doctest::Contains("data:2"), DataError);
  }
  {
    std::istringstream is(
        "{\"features\":[1,2],\"labels\":[1,0]}\n"
        "{\"features\":[1,2],\"labels\":[1]}\n");
    CHECK_THROWS_WITH_AS(load_dataset(is, "d"), doctest::Contains("d:2"), DataError);
  }
  {
    std::istringstream is("{\"features\":[1,2],\"labels\":[1,2]}\n");
    CHECK_THROWS_AS(load_dataset(is, "d"), DataError);
  }
  {
    std::istringstream is("{\"features\":[1,2]}\n{\"features\":[1]}\n");
    CHECK_THROWS_WITH_AS(load_dataset(is, "d"), doctest::Contains("d:2"), DataError);
  }
}

TEST_CASE("model round trip preserves parameters and validates") {
  Rng rng(3);
  const DdnModel m = ddnt::random_model(rng, 3, 4);
  std::ostringstream os;
  save_model(m, os);
  std::istringstream is(os.str());
  const DdnModel back = load_model(is);
  CHECK(back.w == m.w);
  CHECK(back.v == m.v);
  CHECK(back.b == m.b);

  // Corrupt diagonal is rejected.
  DdnModel bad = m;
  bad.v(1, 1) = 0.25;
  std::ostringstream os2;
  save_model(bad, os2);
  std::istringstream is2(os2.str());
  CHECK_THROWS_AS(load_model(is2), DataError);
}

TEST_CASE("gen_synth: deterministic and dimensioned") {
  const GenSynthResult a = gen_synth(5, 4, 30, 2.0, 9);
  const GenSynthResult b = gen_synth(5, 4, 30, 2.0, 9);
  REQUIRE(a.data.size() == 30);
  CHECK(a.model.w == b.model.w);
  for (std::size_t t = 0; t < a.data.size(); ++t) {
    CHECK(a.data[t].features == b.data[t].features);
    CHECK(*a.data[t].labels == *b.data[t].labels);
  }
  // v is symmetric with zero diagonal.
  CHECK(a.model.v == a.model.v.transpose().eval());
  CHECK(a.model.v.diagonal().isZero(0.0));
}

TEST_CASE("gen_synth: zero coupling leaves labels conditionally independent") {
  const GenSynthResult g = gen_synth(4, 6, 4000, 0.0, 17);
  CHECK(g.model.v.isZero(0.0));
  // Residual correlation (after removing the feature-driven mean) vanishes.
  const int n = 4;
  Matrix resid(4000, n);
  for (int t = 0; t < 4000; ++t) {
    const Vector c = evidence_logits(g.model, g.data[t].features);
    for (int i = 0; i < n; ++i)
      resid(t, i) = (*g.data[t].labels)[i] - sigmoid(c[i]);
  }
  for (int i = 0; i < n; ++i)
    for (int k = i + 1; k < n; ++k) {
      const auto a = resid.col(i);
      const auto b = resid.col(k);
      const double corr =
          (a.array() - a.mean()).cwiseProduct(b.array() - b.mean()).sum() /
          (4000.0 * std::sqrt(a.squaredNorm() / 4000.0 - a.mean() * a.mean()) *
           std::sqrt(b.squaredNorm() / 4000.0 - b.mean() * b.mean()));
      CHECK(std::abs(corr) < 0.06);  // ~3.8 sigma at N=4000
    }
}

TEST_CASE("gen_synth: strong coupling lifts co-occurrence above independence") {
  const GenSynthResult g = gen_synth(6, 5, 5000, 3.0, 23);
  // Most strongly tied pair by generating weight.
  int bi = 0, bk = 1;
  for (int i = 0; i < 6; ++i)
    for (int k = i + 1; k < 6; ++k)
      if (g.model.v(i, k) > g.model.v(bi, bk)) {
        bi = i;
        bk = k;
      }
  REQUIRE(g.model.v(bi, bk) > 0.0);
  double pa = 0, pb = 0, pab = 0;
  for (const Instance& inst : g.data) {
    pa += (*inst.labels)[bi];
    pb += (*inst.labels)[bk];
    pab += (*inst.labels)[bi] * (*inst.labels)[bk];
  }
  const double N = static_cast<double>(g.data.size());
  pa /= N;
  pb /= N;
  pab /= N;
  const double null_p = pa * pb;
  const double se = std::sqrt(null_p * (1.0 - null_p) / N);
  // One-sided z-test at p < 0.01 (z > 2.33).
  CHECK(pab > null_p + 2.33 * se);
}

TEST_CASE("gen_synth: caps enforced") {
  CHECK_THROWS_AS(gen_synth(21, 3, 1, 1.0, 0), Error);
  CHECK_THROWS_AS(gen_synth(0, 3, 1, 1.0, 0), Error);
}

TEST_CASE("gen_synth output retrains to an MPE-faithful model") {
  // End-to-end: train on generated data, compare oracle MPE of the trained
  // model against the generating model on held-out instances.
  const int n = 6;
  const GenSynthResult g = gen_synth(n, 5, 5500, 2.0, 31);
  Dataset train_set(g.data.begin(), g.data.begin() + 5000);
  Dataset held_out(g.data.begin() + 5000, g.data.begin() + 5200);

  TrainConfig cfg;
  cfg.learning_rate = 0.2;
  cfg.epochs = 40;
  cfg.batch_size = 64;
  cfg.seed = 5;
  const TrainResult res = train(train_set, cfg);

  int agree = 0;
  for (const Instance& inst : held_out) {
    const auto [true_mpe, s1] = brute_force_mpe(g.model, inst.features);
    const auto [fit_mpe, s2] = brute_force_mpe(res.model, inst.features);
    if (true_mpe == fit_mpe) ++agree;
  }
  CHECK(agree >= 160);  // >= 80% of 200
}
