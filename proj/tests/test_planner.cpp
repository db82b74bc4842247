#include <doctest.h>

#include <cmath>
#include <functional>

#include "mcal/error.hpp"
#include "mcal/planner.hpp"
#include "mcal/random.hpp"
#include "planner_oracle.hpp"

using namespace mcal;
using namespace mcal::planner;

namespace {

Money usd(double d) { return Money::from_dollars(d); }

PerThetaModels models_from(const std::function<curve::TruncatedPowerLawModel(double)>& make, double step = 0.05) {
  PerThetaModels m;
  m.thetas = ThetaGrid::uniform(step).values;
  for (double t : m.thetas) {
    curve::FitReport f;
    f.model = make(t);
    m.fits.push_back(f);
  }
  return m;
}

PerThetaModels flat(const std::function<double(double)>& err) {
  return models_from([&](double t) { return curve::TruncatedPowerLawModel(err(t), 0.0, 0.0); });
}

PlanContext context(std::size_t x, std::size_t test, std::size_t b, double rate, double k, double eps,
                    std::size_t delta) {
  PlanContext ctx;
  ctx.x_size = x;
  ctx.test_size = test;
  ctx.b_current = b;
  ctx.human_rate = usd(rate);
  ctx.cost_model.k = k;
  ctx.eps_bound = eps;
  ctx.delta = delta;
  return ctx;
}

}  // namespace

TEST_CASE("theta grid") {
  const auto g = ThetaGrid::uniform();
  REQUIRE(g.values.size() == 20);
  CHECK(g.values.front() == 0.05);
  CHECK(g.values[18] == 0.95);
  CHECK(g.values.back() == 1.0);
  CHECK(ThetaGrid::uniform(0.3).values == std::vector<double>{0.3, 0.6, 0.9, 1.0});
  CHECK_THROWS_AS((ThetaGrid{{0.5, 0.4}}).validate(), Error);
  CHECK_THROWS_AS((ThetaGrid{{0.0, 0.4}}).validate(), Error);
}

TEST_CASE("theta star by descending scan") {
  // error_theta = 0.1 * theta; 0.08 theta^2 < 0.05 below theta = 0.7906.
  const auto linear = flat([](double t) { return 0.1 * t; });
  auto c = predict_theta_star(linear, 200, 1000, 0.05);
  CHECK(c.theta == 0.75);
  CHECK(c.predicted_error == doctest::Approx(600.0 / 1000.0 * 0.075));
  // Brute force over the grid agrees.
  double brute = 0.0;
  for (double t : linear.thetas) {
    if (std::floor(t * 800 + 1e-9) / 1000.0 * 0.1 * t < 0.05) brute = t;
  }
  CHECK(c.theta == brute);

  CHECK(predict_theta_star(flat([](double) { return 0.0; }), 200, 1000, 0.05).theta == 1.0);

  const auto useless = flat([](double) { return 1.0; });
  // Half the set left: theta = 0.05 gives 0.025 < 0.05, theta = 0.1 gives 0.05.
  CHECK(predict_theta_star(useless, 500, 1000, 0.05).theta == 0.05);
  // Whole set left: theta = 0.05 gives exactly 0.05, which is not below the bound.
  c = predict_theta_star(useless, 0, 1000, 0.05);
  CHECK(c.theta == 0.0);
  CHECK(c.predicted_error == 0.0);
}

TEST_CASE("crossing fits are scanned, not bisected") {
  // Feasible only at theta = 0.2 and 0.9: a monotone search would miss 0.9.
  const auto crossing = flat([](double t) { return std::fabs(t - 0.9) < 1e-9 || std::fabs(t - 0.2) < 1e-9 ? 0.01 : 1.0; });
  CHECK(predict_theta_star(crossing, 0, 1000, 0.02).theta == 0.9);
}

TEST_CASE("raising the bound never lowers theta star") {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = models_from([&](double t) { return curve::TruncatedPowerLawModel(rng.uniform() * t + 0.001, 0.3 * rng.uniform(), 0.0); });
    double prev = 0.0;
    for (double eps = 0.005; eps < 0.3; eps += 0.005) {
      const double t = predict_theta_star(m, 100, 2000, eps).theta;
      CHECK(t >= prev);
      prev = t;
    }
  }
}

TEST_CASE("predict_total_cost") {
  const auto useless = flat([](double) { return 1.0; });
  auto ctx = context(1000, 50, 100, 0.04, 0.0003, 0.05, 100);
  ctx.past_training_cost = usd(0.5);
  auto plan = predict_total_cost(useless, ctx, 100);
  CHECK(plan.predicted_training_cost == usd(0.5));

  // Nothing feasible: every item goes to humans.
  plan = predict_total_cost(useless, context(1000, 0, 0, 0.04, 0.0, 0.001, 100), 300);
  CHECK(plan.theta_star == 0.0);
  CHECK(plan.predicted_total_cost == usd(40));

  // Hand-computed: x = 2000, |T| = 100, b 200 -> 500 with delta 100,
  // error 0.02 everywhere so every theta is feasible.
  auto hand = context(2000, 100, 200, 0.04, 0.001, 0.05, 100);
  hand.past_training_cost = usd(0.3);
  plan = predict_total_cost(flat([](double) { return 0.02; }), hand, 500);
  CHECK(plan.theta_star == 1.0);
  CHECK(plan.s_star_size == 1400);
  CHECK(plan.predicted_training_cost == usd(0.3 + 0.001 * (300 + 400 + 500)));
  CHECK(plan.predicted_total_cost == usd(600 * 0.04 + 0.3 + 1.2));
  CHECK_THROWS_AS(predict_total_cost(useless, hand, 100), Error);
  CHECK_THROWS_AS(predict_total_cost(useless, hand, 1901), Error);
}

TEST_CASE("find_b_opt picks the cheapest of three candidates") {
  // Steep curves: useless at b = 100, good at b = 200.
  const auto m = models_from([](double t) {
    const double at200 = t <= 0.8 + 1e-9 ? 0.1 : 0.5;
    return curve::TruncatedPowerLawModel(at200 * std::pow(200.0, 10.0), 10.0, 0.0);
  });
  auto ctx = context(310, 10, 100, 0.6, 0.04, 0.03, 100);
  ctx.past_training_cost = usd(4);
  CHECK(predict_total_cost(m, ctx, 100).predicted_total_cost == usd(190));
  CHECK(predict_total_cost(m, ctx, 200).predicted_total_cost == usd(150));
  CHECK(predict_total_cost(m, ctx, 300).predicted_total_cost == usd(210));
  const auto plan = find_b_opt(m, ctx, 100);
  CHECK(plan.b_opt == 200);
  CHECK(plan.theta_star == 0.8);
  CHECK(plan.s_star_size == 80);
}

TEST_CASE("find_b_opt degenerate cases") {
  // Already feasible everywhere with positive training cost: stay put.
  auto ctx = context(1000, 50, 100, 0.04, 0.001, 0.05, 50);
  auto plan = find_b_opt(flat([](double) { return 0.0; }), ctx, 50);
  CHECK(plan.b_opt == 100);
  CHECK(plan.theta_star == 1.0);
  // Useless classifier: label nothing and add nothing.
  plan = find_b_opt(flat([](double) { return 1.0; }), context(1000, 50, 100, 0.04, 0.001, 0.001, 50), 50);
  CHECK(plan.b_opt == 100);
  CHECK(plan.theta_star == 0.0);
}

TEST_CASE("find_b_opt equals exhaustive enumeration on random fixtures") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng rng(derive_seed(seed, 77));
    const std::size_t x = 300 + rng.below(3000);
    const std::size_t test = rng.below(x / 5);
    const std::size_t b = 1 + rng.below((x - test) / 2);
    auto ctx = context(x, test, b, 0.001 + 0.1 * rng.uniform(), 0.01 * rng.uniform(), 0.01 + 0.1 * rng.uniform(),
                       1 + rng.below(200));
    ctx.past_training_cost = usd(rng.uniform());
    const double q = 1.0 + rng.uniform();
    const auto m = models_from([&](double t) {
      return curve::TruncatedPowerLawModel((0.2 + 2.0 * rng.uniform()) * std::pow(t, q), 0.8 * rng.uniform(),
                                           rng.uniform() < 0.5 ? 0.0 : rng.uniform() / 1000.0);
    });
    const std::size_t step = 1 + rng.below(150);
    const auto plan = find_b_opt(m, ctx, step);
    const auto brute = oracle::enumerate(m, ctx, step);
    CHECK(plan.b_opt == brute.b);
    CHECK(plan.theta_star == brute.theta);
    CHECK(plan.s_star_size == brute.s);
    CHECK(plan.predicted_total_cost == brute.cost);
    CHECK((plan.theta_star == 0.0 || plan.predicted_overall_error < ctx.eps_bound));
  }
}

TEST_CASE("refined search never loses to the coarse pass") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    auto ctx = context(4000, 200, 40, 0.04, 0.0003 + 0.003 * rng.uniform(), 0.05, 40);
    const auto m = models_from([&](double t) { return curve::TruncatedPowerLawModel(3.0 * t * t, 0.4 + 0.3 * rng.uniform(), 0.0); });
    const auto coarse = find_b_opt(m, ctx, 40);
    const auto refined = find_b_opt_refined(m, ctx, 40);
    CHECK(refined.predicted_total_cost <= coarse.predicted_total_cost);
    const auto fine = oracle::enumerate(m, ctx, 4);
    CHECK(refined.predicted_total_cost >= fine.cost);
  }
}

TEST_CASE("costs scale with prices and the argmin does not move") {
  const auto m = models_from([](double t) { return curve::TruncatedPowerLawModel(2.0 * t * t, 0.5, 1e-4); });
  auto ctx = context(5000, 250, 50, 0.04, 0.002, 0.05, 50);
  auto scaled = ctx;
  scaled.human_rate = ctx.human_rate * 3;
  scaled.cost_model.k = ctx.cost_model.k * 3;
  const auto a = find_b_opt(m, ctx, 50);
  const auto b = find_b_opt(m, scaled, 50);
  CHECK(a.b_opt == b.b_opt);
  CHECK(a.theta_star == b.theta_star);
  CHECK(b.predicted_total_cost.dollars() == doctest::Approx(3.0 * a.predicted_total_cost.dollars()).epsilon(1e-9));
}

TEST_CASE("stability test") {
  CHECK(is_stable(usd(80), usd(78), 0.05));
  CHECK_FALSE(is_stable(usd(100), usd(78), 0.05));
  CHECK(is_stable(usd(42), usd(42), 1e-9));
}

TEST_CASE("adapt_delta") {
  SUBCASE("three batches when the envelope allows it") {
    auto ctx = context(20000, 1000, 2000, 0.04, 0.0, 0.05, 200);
    const auto m = flat([](double) { return 0.0; });
    const Money c_star = predict_total_cost(m, ctx, 5000).predicted_total_cost;
    CHECK(adapt_delta(m, ctx, 5000, 3, 0.1, c_star) == 1000);
  }
  SUBCASE("single remaining label") {
    auto ctx = context(1000, 50, 100, 0.04, 0.001, 0.05, 40);
    const auto m = flat([](double) { return 0.0; });
    CHECK(adapt_delta(m, ctx, 101, 1, 0.1, usd(1000)) == 1);
  }
  SUBCASE("smallest N inside the envelope wins") {
    // Fewer batches mean fewer retrainings, so the cheapest admissible N is n_min
    // whenever it fits; probe the envelope edge from both sides.
    auto ctx = context(20000, 1000, 2000, 0.04, 0.01, 0.05, 200);
    const auto m = flat([](double) { return 0.0; });
    ctx.delta = 1000;
    const Money at3 = predict_total_cost(m, ctx, 5000).predicted_total_cost;
    CHECK(adapt_delta(m, ctx, 5000, 3, 0.0, at3 + Money::from_micros(1)) == 1000);
    ctx.delta = 200;
    // Envelope below what N = 3 achieves: nothing qualifies, delta stays.
    CHECK(adapt_delta(m, ctx, 5000, 3, 0.0, at3 - Money::from_micros(1)) == 200);
  }
  CHECK_THROWS_AS(adapt_delta(flat([](double) { return 0.0; }), context(1000, 0, 100, 0.04, 0, 0.05, 10), 100, 3, 0.1, usd(1)),
                  Error);
}
