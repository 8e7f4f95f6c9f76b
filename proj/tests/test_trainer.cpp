// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ddn/trainer.hpp"
#include "fixtures.hpp"

using namespace ddn;
using ddnt::bits;

namespace {

Dataset labeled(std::vector<std::pair<Vector, BitVec>> rows) {
  Dataset d;
  for (auto& [e, x] : rows) d.push_back({e, x});
  return d;
}

// Bernoulli labels from a v = 0 model; used for recovery tests.
Dataset sample_independent(const DdnModel& m, int count, Rng& rng) {
  Dataset d;
  for (int t = 0; t < count; ++t) {
    Instance inst;
    inst.features = ddnt::random_features(rng, static_cast<int>(m.n_features()));
    const Vector c = evidence_logits(m, inst.features);
    BitVec x(m.n_labels());
    for (Eigen::Index i = 0; i < m.n_labels(); ++i)
      x[i] = rng.bernoulli(sigmoid(c[i])) ? 1 : 0;
    inst.labels = x;
    d.push_back(std::move(inst));
  }
  return d;
}

}  // namespace

TEST_CASE("cpll: all-zero model costs n log 2 per instance") {
  const DdnModel m = DdnModel::zeros(4, 2);
  const Dataset d = labeled({{Vector::Zero(2), bits({1, 0, 1, 1})},
                             {Vector::Ones(2), bits({0, 0, 0, 0})}});
  CHECK(cpll_loss(m, d) == doctest::Approx(4.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("cpll: single label degenerates to binary cross-entropy") {
  DdnModel m = DdnModel::zeros(1, 2);
  m.w << 0.7, -0.3;
  m.b[0] = 0.2;
  Vector e(2);
  e << 1.0, 2.0;
  const double z = 0.7 * 1.0 - 0.3 * 2.0 + 0.2;
  const Dataset d1 = labeled({{e, bits({1})}});
  CHECK(cpll_loss(m, d1) == doctest::Approx(softplus(z) - z).epsilon(1e-12));
  const Dataset d0 = labeled({{e, bits({0})}});
  CHECK(cpll_loss(m, d0) == doctest::Approx(softplus(z)).epsilon(1e-12));
}

TEST_CASE("cpll: fixture with true labels (1,1) costs 0.280") {
  const Dataset d = labeled({{ddnt::zero_features(), bits({1, 1})}});
  CHECK(cpll_loss(ddnt::two_label_model(), d) == doctest::Approx(0.280).epsilon(2e-3));
}

TEST_CASE("cpll: regularized path adds the l1 norms") {
  const DdnModel m = ddnt::two_label_model();
  const Dataset d = labeled({{ddnt::zero_features(), bits({1, 1})}});
  const double base = cpll_loss(m, d);
  CHECK(cpll_loss_l1(m, d, 0.1) == doctest::Approx(base + 0.1 * 4.0).epsilon(1e-12));
}

TEST_CASE("cpll: missing labels raise") {
  Dataset d;
  d.push_back({ddnt::zero_features(), std::nullopt});
  CHECK_THROWS_AS(cpll_loss(ddnt::two_label_model(), d), Error);
}

TEST_CASE("gradient: zero model on all-ones labels") {
  const DdnModel m = DdnModel::zeros(3, 2);
  const Dataset d = labeled({{Vector::Zero(2), bits({1, 1, 1})}});
  const CpllGradient g = cpll_gradient(m, d);
  for (int i = 0; i < 3; ++i) CHECK(g.b[i] == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(g.v.diagonal().isZero(0.0));
}

TEST_CASE("gradient: saturated logit contributes (numerically) nothing") {
  DdnModel m = DdnModel::zeros(1, 1);
  m.b[0] = 40.0;
  const Dataset d = labeled({{ddnt::zero_features(), bits({1})}});
  const CpllGradient g = cpll_gradient(m, d);
  CHECK(std::abs(g.b[0]) < 1e-15);
}

TEST_CASE("gradient matches central finite differences") {
  Rng rng(121);
  for (int rep = 0; rep < 6; ++rep) {
    const int n = 2 + rng.next_below(5);
    const int f = 1 + rng.next_below(3);
    DdnModel m = ddnt::random_model(rng, n, f, 0.6, 0.6, 0.6);
    Dataset batch;
    for (int t = 0; t < 3; ++t) {
      Instance inst;
      inst.features = ddnt::random_features(rng, f);
      inst.labels = ddnt::random_bits(rng, n);
      batch.push_back(inst);
    }
    const CpllGradient g = cpll_gradient(m, batch);
    const double h = 1e-5;
    auto fd_check = [&](double* param, double grad) {
      const double keep = *param;
      *param = keep + h;
      const double up = cpll_loss(m, batch);
      *param = keep - h;
      const double dn = cpll_loss(m, batch);
      *param = keep;
      const double fd = (up - dn) / (2 * h);
      CHECK(std::abs(fd - grad) <= std::max(1e-6, 1e-4 * std::abs(fd)));
    };
    for (int i = 0; i < n; ++i) fd_check(&m.b[i], g.b[i]);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < f; ++k) fd_check(&m.w(i, k), g.w(i, k));
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        if (i != k) fd_check(&m.v(i, k), g.v(i, k));
  }
}

TEST_CASE("train: zero epochs returns the initial model unchanged") {
  Rng rng(5);
  const DdnModel init = ddnt::random_model(rng, 3, 2);
  Dataset d = sample_independent(init, 10, rng);
  TrainConfig cfg;
  cfg.epochs = 0;
  const TrainResult res = train(d, cfg, &init);
  CHECK(res.model.w == init.w);
  CHECK(res.model.v == init.v);
  CHECK(res.model.b == init.b);
  CHECK(res.loss_trace.empty());

  const TrainResult res0 = train(d, cfg);
  CHECK(res0.model.w.isZero(0.0));
}

TEST_CASE("train: loss decreases at lr 0.05 on synthetic data") {
  Rng rng(7);
  DdnModel gen = DdnModel::zeros(4, 3);
  for (int i = 0; i < 4; ++i) {
    gen.b[i] = 0.4 * rng.next_normal();
    for (int k = 0; k < 3; ++k) gen.w(i, k) = rng.next_normal();
  }
  const Dataset d = sample_independent(gen, 400, rng);
  TrainConfig cfg;
  cfg.learning_rate = 0.05;
  cfg.epochs = 20;
  cfg.batch_size = 32;
  cfg.seed = 1;
  const double initial = cpll_loss(DdnModel::zeros(4, 3), d);
  const TrainResult res = train(d, cfg);
  REQUIRE(res.loss_trace.size() == 20);
  CHECK(res.loss_trace.back() <= initial);
  CHECK(res.loss_trace.back() <= res.loss_trace.front());
}

TEST_CASE("train: recovers independent-model marginals") {
  Rng rng(13);
  DdnModel gen = DdnModel::zeros(3, 4);
  for (int i = 0; i < 3; ++i) {
    gen.b[i] = 0.3 * rng.next_normal();
    for (int k = 0; k < 4; ++k) gen.w(i, k) = rng.next_normal();
  }
  const Dataset d = sample_independent(gen, 2000, rng);
  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.epochs = 60;
  cfg.batch_size = 64;
  cfg.seed = 3;
  const TrainResult res = train(d, cfg);

  double err = 0.0;
  long count = 0;
  for (int t = 0; t < 200; ++t) {
    const Vector e = ddnt::random_features(rng, 4);
    const Vector ct = evidence_logits(gen, e);
    const Vector ch = evidence_logits(res.model, e);
    for (int i = 0; i < 3; ++i) {
      err += std::abs(sigmoid(ct[i]) - sigmoid(ch[i]));
      ++count;
    }
  }
  CHECK(err / count < 0.05);
}

TEST_CASE("train: l1 produces strictly more exact zeros") {
  Rng rng(17);
  DdnModel gen = DdnModel::zeros(4, 3);
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 3; ++k) gen.w(i, k) = rng.next_normal();
  const Dataset d = sample_independent(gen, 300, rng);
  TrainConfig plain;
  plain.epochs = 15;
  plain.seed = 2;
  TrainConfig reg = plain;
  reg.l1_lambda = 0.1;
  plain.l1_lambda = 0.0;

  auto zeros_of = [](const DdnModel& m) {
    long z = 0;
    for (Eigen::Index i = 0; i < m.w.rows(); ++i)
      for (Eigen::Index k = 0; k < m.w.cols(); ++k) z += m.w(i, k) == 0.0;
    for (Eigen::Index i = 0; i < m.v.rows(); ++i)
      for (Eigen::Index k = 0; k < m.v.cols(); ++k)
        if (i != k) z += m.v(i, k) == 0.0;
    return z;
  };
  const long z_plain = zeros_of(train(d, plain).model);
  const long z_reg = zeros_of(train(d, reg).model);
  CHECK(z_reg > z_plain);
}

TEST_CASE("train: deterministic given seed and order") {
  Rng rng(23);
  DdnModel gen = DdnModel::zeros(3, 2);
  for (int i = 0; i < 3; ++i) gen.b[i] = rng.next_normal();
  const Dataset d = sample_independent(gen, 100, rng);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.seed = 11;
  cfg.l1_lambda = 0.01;
  const TrainResult a = train(d, cfg);
  const TrainResult b = train(d, cfg);
  CHECK(a.model.w == b.model.w);
  CHECK(a.model.v == b.model.v);
  CHECK(a.model.b == b.model.b);
  CHECK(a.loss_trace == b.loss_trace);
}

TEST_CASE("train: proximal step shrinks toward zero, never across it") {
  // One epoch, one batch: the result must equal the plain SGD step followed
  // by exact soft-thresholding of w and v.
  Rng rng(41);
  const DdnModel init = ddnt::random_model(rng, 3, 2);
  Dataset d = sample_independent(init, 8, rng);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 8;
  cfg.learning_rate = 0.3;
  cfg.l1_lambda = 0.05;
  const TrainResult res = train(d, cfg, &init);

  const CpllGradient g = cpll_gradient(init, d);
  const double t = cfg.learning_rate * cfg.l1_lambda;
  auto soft = [t](double x) { return x > t ? x - t : (x < -t ? x + t : 0.0); };
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 2; ++k) {
      const double pre = init.w(i, k) - cfg.learning_rate * g.w(i, k);
      const double post = res.model.w(i, k);
      CHECK(post == doctest::Approx(soft(pre)).epsilon(1e-12));
      CHECK(std::abs(post) <= std::abs(pre) + 1e-15);
      CHECK((post == 0.0 || (post > 0) == (pre > 0)));
    }
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) {
      if (i == k) continue;
      const double pre = init.v(i, k) - cfg.learning_rate * g.v(i, k);
      CHECK(res.model.v(i, k) == doctest::Approx(soft(pre)).epsilon(1e-12));
    }
  // biases are not penalized
  for (int i = 0; i < 3; ++i)
    CHECK(res.model.b[i] ==
          doctest::Approx(init.b[i] - cfg.learning_rate * g.b[i]).epsilon(1e-12));
}

TEST_CASE("train: config invariants validated") {
  Dataset d = labeled({{ddnt::zero_features(), bits({1, 1})}});
  TrainConfig bad;
  bad.learning_rate = 0.0;
  CHECK_THROWS_AS(train(d, bad), Error);
  bad = TrainConfig{};
  bad.l1_lambda = -0.1;
  CHECK_THROWS_AS(train(d, bad), Error);
  bad = TrainConfig{};
  bad.batch_size = 0;
  CHECK_THROWS_AS(train(d, bad), Error);
}

TEST_CASE("train: huge l1 shrinks everything exactly to zero, never past it") {
  Rng rng(29);
  DdnModel gen = DdnModel::zeros(3, 2);
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 2; ++k) gen.w(i, k) = rng.next_normal();
  const Dataset d = sample_independent(gen, 50, rng);
  TrainConfig cfg;
  cfg.epochs = 10;
  cfg.l1_lambda = 10.0;
  const TrainResult res = train(d, cfg);
  CHECK(res.model.w.isZero(0.0));
  CHECK(res.model.v.isZero(0.0));
}

TEST_CASE("train: NaN loss aborts with epoch/batch diagnostic") {
  DdnModel init = DdnModel::zeros(2, 1);
  init.b << 1e308, 1e308;  // loss overflows to inf on the first batch
  Dataset d = labeled({{ddnt::zero_features(), bits({0, 0})}});
  TrainConfig cfg;
  cfg.epochs = 1;
  CHECK_THROWS_WITH_AS(train(d, cfg, &init), doctest::Contains("epoch 0"), Error);
}

TEST_CASE("train: empty dataset raises") {
  TrainConfig cfg;
  CHECK_THROWS_AS(train(Dataset{}, cfg), Error);
}

TEST_CASE("train: step decay schedule reaches lower loss plateaus") {
  Rng rng(31);
  DdnModel gen = DdnModel::zeros(3, 2);
  for (int i = 0; i < 3; ++i) gen.b[i] = rng.next_normal();
  const Dataset d = sample_independent(gen, 200, rng);
  TrainConfig cfg;
  cfg.epochs = 12;
  cfg.lr_schedule.kind = LrSchedule::Kind::StepDecay;
  cfg.lr_schedule.factor = 0.5;
  cfg.lr_schedule.every_k_epochs = 4;
  const TrainResult res = train(d, cfg);
  CHECK(res.loss_trace.back() <= res.loss_trace.front());
}
