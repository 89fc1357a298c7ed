#include <doctest.h>

#include <cmath>
#include <numbers>

#include "layoutpref/dataio.hpp"
#include "layoutpref/error.hpp"
#include "layoutpref/optim.hpp"
#include "layoutpref/train.hpp"

using namespace layoutpref;

TEST_CASE("zero gradient and no decay leave params unchanged") {
  std::vector<double> p{1.0, -2.0, 3.5};
  const std::vector<double> g(3, 0.0);
  AdamWState s;
  AdamWConfig cfg;
  cfg.weight_decay = 0.0;
  for (int i = 0; i < 5; ++i) adamw_step(p, g, s, 0.1, cfg);
  CHECK(p == std::vector<double>{1.0, -2.0, 3.5});
  CHECK(s.step == 5);
}

TEST_CASE("constant gradient moves by lr per step after decoupled decay") {
  // With a constant gradient the bias-corrected moments are g and g^2, so
  // every Adam step is lr * g / (|g| + eps) on top of the decay shrink.
  std::vector<double> p{1.0, 1.0};
  const std::vector<double> g{0.5, -4.0};
  AdamWState s;
  AdamWConfig cfg;
  const double lr = 0.1;
  double a = 1.0, b = 1.0;
  for (int step = 0; step < 4; ++step) {
    adamw_step(p, g, s, lr, cfg);
    a = a * (1 - lr * cfg.weight_decay) - lr * 0.5 / (0.5 + cfg.epsilon);
    b = b * (1 - lr * cfg.weight_decay) + lr * 4.0 / (4.0 + cfg.epsilon);
    CHECK(p[0] == doctest::Approx(a).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(b).epsilon(1e-12));
  }
}

TEST_CASE("second-step moments with a changing gradient") {
  std::vector<double> p{0.0};
  AdamWState s;
  AdamWConfig cfg;
  cfg.weight_decay = 0.0;
  adamw_step(p, std::vector<double>{1.0}, s, 1.0, cfg);
  adamw_step(p, std::vector<double>{3.0}, s, 1.0, cfg);
  const double m = 0.9 * 0.1 + 0.1 * 3.0, v = 0.999 * 0.001 + 0.001 * 9.0;
  const double m_hat = m / (1 - 0.81), v_hat = v / (1 - 0.999 * 0.999);
  const double want = -1.0 / (1.0 + 1e-8) - m_hat / (std::sqrt(v_hat) + 1e-8);
  CHECK(p[0] == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("shape mismatch") {
  std::vector<double> p(3);
  AdamWState s;
  CHECK_THROWS_AS(adamw_step(p, std::vector<double>(2), s, 0.1), Error);
  adamw_step(p, std::vector<double>(3), s, 0.1);
  std::vector<double> q(4);
  CHECK_THROWS_AS(adamw_step(q, std::vector<double>(4), s, 0.1), Error);
}

TEST_CASE("warmup then cosine") {
  CHECK(lr_schedule(0, 100, 1.0, 0.1) == 0.0);
  CHECK(lr_schedule(5, 100, 1.0, 0.1) == doctest::Approx(0.5));
  CHECK(lr_schedule(10, 100, 1.0, 0.1) == doctest::Approx(1.0));
  CHECK(lr_schedule(55, 100, 1.0, 0.1) == doctest::Approx(0.5));
  CHECK(std::abs(lr_schedule(100, 100, 1.0, 0.1)) < 1e-12);
  // ceil(0.03 * 2000) = 60 warmup steps.
  CHECK(lr_schedule(60, 2000, 0.05, 0.03) == doctest::Approx(0.05));
  CHECK(lr_schedule(30, 2000, 0.05, 0.03) == doctest::Approx(0.025));
  CHECK(lr_schedule(3, 10, 2.0, 0.0) ==
        doctest::Approx(2.0 * 0.5 * (1 + std::cos(std::numbers::pi * 0.3))));
}

TEST_CASE("training is deterministic and reduces the loss") {
  SyntheticSpec spec;
  spec.n_samples = 40;
  spec.seed = 3;
  const auto data = make_ce_examples(make_synthetic(spec), 32);
  TrainConfig cfg;
  cfg.steps = 60;
  cfg.batch_size = 8;
  cfg.seed = 4;
  std::vector<StepLog> logs;
  PolicyParams a(32), b(32);
  train_ce(a, data, cfg, [&](const StepLog& l) { logs.push_back(l); });
  train_ce(b, data, cfg);
  CHECK(a == b);
  REQUIRE(logs.size() == 60);
  CHECK(logs.front().step == 1);
  CHECK(logs.back().loss < logs.front().loss);

  std::vector<PreferenceExample> prefs;
  for (std::size_t i = 0; i + 1 < data.size(); i += 2) {
    if (data[i].features.size() != data[i + 1].features.size()) continue;
    prefs.push_back({data[i].features, data[i].tokens, data[i + 1].tokens});
  }
  REQUIRE(!prefs.empty());
  PolicyParams c = a;
  std::vector<StepLog> pref_logs;
  cfg.steps = 10;
  train_aapa(c, a, prefs, cfg, [&](const StepLog& l) { pref_logs.push_back(l); });
  CHECK(std::abs(pref_logs.front().loss - std::log(2.0)) < 1e-12);
}
