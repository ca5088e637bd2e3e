#include <doctest.h>

#include <cmath>
#include <random>

#include <json.hpp>

#include "nohgnn/errors.hpp"
#include "nohgnn/trainer.hpp"
#include "support.hpp"

using namespace nohgnn;

namespace {

Dataset small_dataset(std::uint64_t seed = 3) {
  return prepare_dataset(planted_partition(24, 3, 0.35, 0.04, seed), seed, 1);
}

TrainConfig small_config() {
  TrainConfig c;
  c.dim = 8;
  c.max_epochs = 40;
  c.patience = 40;
  c.seed = 3;
  return c;
}

}  // namespace

TEST_CASE("loss closed forms") {
  ParamStore empty;
  const std::vector<double> half(4, 0.5);
  const std::vector<double> labels{1, 0, 1, 0};
  CHECK(compute_loss(half, labels, empty, 0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));

  const std::vector<double> perfect{1, 0, 1, 0};
  const double clamped = compute_loss(perfect, labels, empty, 0.0);
  CHECK(clamped <= 1e-10);
  CHECK(clamped == doctest::Approx(-std::log1p(-1e-12)).epsilon(1e-6));

  ParamStore ps;
  ps.add("w", Tensor3(2, 1, 1, {1.5, -2.0}));
  ps.add("v", Tensor3(1, 1, 1, 0.5));
  const double base = compute_loss(half, labels, ps, 0.0);
  const double reg = compute_loss(half, labels, ps, 0.1);
  CHECK(reg - base == doctest::Approx(0.1 * (2.25 + 4.0 + 0.25)).epsilon(1e-14));

  CHECK_THROWS_AS(compute_loss(std::vector<double>{}, std::vector<double>{}, empty, 0.0), ParameterError);
}

TEST_CASE("adam") {
  SUBCASE("zero gradient is a fixed point") {
    ParamStore ps;
    ps.add("x", Tensor3(3, 1, 1, {1.0, -2.0, 0.5}));
    const Tensor3 before = ps.value("x");
    Adam adam(0.1);
    for (int k = 0; k < 5; ++k) adam.step(ps);
    CHECK(ps.value("x") == before);
  }
  SUBCASE("hand recurrence") {
    ParamStore ps;
    ps.add("x", Tensor3(1, 1, 1, 1.0));
    Adam adam(0.1);
    double m = 0.0, v = 0.0, x = 1.0;
    for (int step = 1; step <= 4; ++step) {
      const double g = step == 3 ? -0.5 : 1.0;
      ps.grad("x")[0] = g;
      adam.step(ps);
      m = 0.9 * m + 0.1 * g;
      v = 0.999 * v + 0.001 * g * g;
      const double mhat = m / (1.0 - std::pow(0.9, step));
      const double vhat = v / (1.0 - std::pow(0.999, step));
      x -= 0.1 * mhat / (std::sqrt(vhat) + 1e-8);
      CHECK(ps.value("x")[0] == doctest::Approx(x).epsilon(1e-14));
      if (step == 1) CHECK(ps.value("x")[0] == doctest::Approx(1.0 - 0.1 / (1.0 + 1e-8)).epsilon(1e-14));
    }
  }
  SUBCASE("non-finite gradient names the parameter") {
    ParamStore ps;
    ps.add("alpha", Tensor3(1, 1, 1, 1.0));
    ps.add("beta", Tensor3(1, 1, 1, 1.0));
    ps.grad("beta")[0] = std::nan("");
    ps.grad("alpha")[0] = 1.0;
    Adam adam(0.1);
    try {
      adam.step(ps);
      FAIL("expected a numeric error");
    } catch (const NumericError& e) {
      CHECK(std::string(e.what()).find("'beta'") != std::string::npos);
    }
    // Nothing was updated.
    CHECK(ps.value("alpha")[0] == 1.0);
  }
  SUBCASE("deterministic") {
    auto run = [] {
      std::mt19937_64 rng(5);
      ParamStore ps;
      ps.add("w", testsupport::random_tensor(4, 3, 1, rng));
      Adam adam(0.05);
      for (int k = 0; k < 10; ++k) {
        ps.zero_grads();
        Tape tape;
        tape.backward(ad::sum_squares(tape, ad::sigmoid(tape, tape.param(ps, "w"))), &ps);
        adam.step(ps);
      }
      return ps.value("w");
    };
    CHECK(run() == run());
  }
}

TEST_CASE("metrics") {
  SUBCASE("perfect separation") {
    const Metrics m = evaluate(std::vector<double>{0.9, 0.8, 0.1, 0.2}, std::vector<double>{1, 1, 0, 0});
    CHECK(m.f1 == 1.0);
    CHECK(m.accuracy == 1.0);
  }
  SUBCASE("definition arithmetic") {
    // tp = 2, fp = 1, fn = 1, tn = 6
    std::vector<double> p{0.9, 0.9, 0.9, 0.1}, y{1, 1, 0, 1};
    for (int k = 0; k < 6; ++k) {
      p.push_back(0.2);
      y.push_back(0);
    }
    const Metrics m = evaluate(p, y);
    CHECK(m.tp == 2);
    CHECK(m.fp == 1);
    CHECK(m.fn == 1);
    CHECK(m.tn == 6);
    CHECK(std::round(m.f1 * 1e4) / 1e4 == 0.6667);
    CHECK(m.accuracy == 0.8);
  }
  SUBCASE("threshold monotone") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> p(200), y(200);
    for (std::size_t k = 0; k < p.size(); ++k) {
      p[k] = u(rng);
      y[k] = u(rng) < 0.5 ? 1.0 : 0.0;
    }
    std::size_t last = p.size() + 1;
    for (double th = 0.05; th < 1.0; th += 0.05) {
      const Metrics m = evaluate(p, y, th);
      CHECK(m.tp + m.fp <= last);
      last = m.tp + m.fp;
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(evaluate(std::vector<double>{}, std::vector<double>{}), ParameterError);
    CHECK_THROWS_AS(evaluate(std::vector<double>{0.5}, std::vector<double>{1, 0}), ShapeError);
  }
}

TEST_CASE("early stopping") {
  SUBCASE("frozen metric stops after patience") {
    EarlyStopping s(10);
    std::size_t epoch = 0;
    while (!s.update(0.42)) ++epoch;
    CHECK(epoch + 1 == 11);
  }
  SUBCASE("improvement resets the counter") {
    EarlyStopping s(2);
    CHECK_FALSE(s.update(0.1));
    CHECK_FALSE(s.update(0.1));
    CHECK_FALSE(s.update(0.2));
    CHECK(s.improved());
    CHECK_FALSE(s.update(0.2));
    CHECK(s.update(0.15));
    CHECK(s.best() == 0.2);
  }
}

TEST_CASE("config validation names the key") {
  auto message = [](TrainConfig c) {
    try {
      c.validate();
    } catch (const ParameterError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  TrainConfig c;
  CHECK(message(c).empty());
  c.learning_rate = 0.0;
  CHECK(message(c).rfind("lr:", 0) == 0);
  c = TrainConfig{};
  c.learning_rate = -1.0;
  CHECK(message(c).rfind("lr:", 0) == 0);
  c = TrainConfig{};
  c.hops = 4;
  CHECK(message(c).rfind("k_hops:", 0) == 0);
  c = TrainConfig{};
  c.beta_reg = -0.1;
  CHECK(message(c).rfind("beta:", 0) == 0);
  c = TrainConfig{};
  c.patience = 0;
  CHECK(message(c).rfind("patience:", 0) == 0);
}

TEST_CASE("epoch log lines") {
  const auto j = nlohmann::json::parse(to_json_line(EpochLog{3, 0.5, 0.25, 0.75}));
  CHECK(j["epoch"] == 3);
  CHECK(j["loss"] == 0.5);
  CHECK(j["val_f1"] == 0.25);
  CHECK(j["val_acc"] == 0.75);
}

TEST_CASE("training loop") {
  const Dataset data = small_dataset();

  SUBCASE("patience trigger with a frozen validation metric") {
    TrainConfig c = small_config();
    c.max_epochs = 300;
    c.patience = 10;
    TrainHooks hooks;
    hooks.on_validation = [](std::size_t, Metrics& m) { m.f1 = 0.5; };
    const TrainResult r = train_loop(data, c, hooks);
    CHECK(r.epochs_run == 11);
    CHECK(r.best_epoch == 1);
    CHECK(r.stop_reason == "patience");
  }
  SUBCASE("cap trigger with an always-improving metric") {
    TrainConfig c = small_config();
    c.dim = 4;
    c.max_epochs = 300;
    c.patience = 10;
    TrainHooks hooks;
    hooks.on_validation = [](std::size_t epoch, Metrics& m) { m.f1 = static_cast<double>(epoch) / 1000.0; };
    const TrainResult r = train_loop(data, c, hooks);
    CHECK(r.epochs_run == 300);
    CHECK(r.best_epoch == 300);
    CHECK(r.stop_reason == "max_epochs");
  }
  SUBCASE("deterministic") {
    const TrainResult a = train_loop(data, small_config());
    const TrainResult b = train_loop(data, small_config());
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t k = 0; k < a.history.size(); ++k) CHECK(to_json_line(a.history[k]) == to_json_line(b.history[k]));
    for (const auto& name : a.best_params.names()) CHECK(a.best_params.value(name) == b.best_params.value(name));
  }
  SUBCASE("best checkpoint reproduces the logged validation F1") {
    const TrainResult r = train_loop(data, small_config());
    const TrainConfig c = small_config();
    const NoHgnn model(c.model_config(data.graph),
                       std::make_shared<const SliceSparse3>(compute_overlap_tensor(data.split.masked, c.hops)));
    const Metrics val = evaluate_split(data, model, r.best_params, Role::val);
    CHECK(val.f1 == r.best_val.f1);
    CHECK(val.f1 == r.history[r.best_epoch - 1].val_f1);
    const Metrics test = evaluate_split(data, model, r.best_params, Role::test);
    CHECK(test.f1 == r.test.f1);
    CHECK(test.accuracy == r.test.accuracy);
  }
  SUBCASE("smoothed loss decreases over the first 20 epochs") {
    TrainConfig c = small_config();
    c.dim = 32;
    c.max_epochs = 20;
    c.patience = 20;
    const Dataset planted = prepare_dataset(planted_partition(60, 8, 0.2, 0.02, 0), 0, 1);
    c.seed = 0;
    const TrainResult r = train_loop(planted, c);
    REQUIRE(r.history.size() == 20);
    std::vector<double> smooth;
    for (std::size_t k = 0; k + 5 <= 20; ++k) {
      double s = 0.0;
      for (std::size_t w = 0; w < 5; ++w) s += r.history[k + w].loss;
      smooth.push_back(s / 5.0);
    }
    for (std::size_t k = 1; k < smooth.size(); ++k) CHECK(smooth[k] <= smooth[k - 1]);
  }
  SUBCASE("divergence aborts with the epoch") {
    TrainConfig c = small_config();
    c.learning_rate = 1e300;
    try {
      train_loop(data, c);
      FAIL("expected divergence");
    } catch (const NumericError& e) {
      CHECK(std::string(e.what()).find("epoch") != std::string::npos);
    }
  }
  SUBCASE("invalid config rejected before training") {
    TrainConfig c = small_config();
    c.learning_rate = 0.0;
    CHECK_THROWS_AS(train_loop(data, c), ParameterError);
  }
}

TEST_CASE("grid search picks the best validation F1") {
  const Dataset data = small_dataset(5);
  TrainConfig c = small_config();
  c.max_epochs = 8;
  const GridResult g = grid_search(data, c, {0.01, 0.05}, {0.001, 0.0005});
  REQUIRE(g.entries.size() == 4);
  for (const auto& e : g.entries) CHECK(e.best_val.f1 <= g.entries[g.best].best_val.f1);
  CHECK(g.best_run.best_val.f1 == g.entries[g.best].best_val.f1);
  CHECK_THROWS_AS(grid_search(data, c, {}, {0.1}), ParameterError);
}

TEST_CASE("tiny gradient check") {
  for (TransformKind kind : {TransformKind::identity, TransformKind::dct2}) {
    const GradCheckReport a = tiny_gradcheck(kind);
    CHECK(a.max_rel_error <= 1e-4);
    CHECK(a.entries_checked > 100);
    const GradCheckReport b = tiny_gradcheck(kind);
    CHECK(a.max_rel_error == b.max_rel_error);
  }
}
