#include <doctest.h>

#include "mcal/config.hpp"
#include "mcal/error.hpp"
#include "mcal/report.hpp"

using namespace mcal;
using nlohmann::json;

namespace {

json minimal() {
  return json::parse(R"({"learners": [{"name": "softmax", "cost_per_sample_pass": 0.0003}]})");
}

}  // namespace

TEST_CASE("config defaults and overrides") {
  auto c = config_from_json(minimal());
  CHECK(c.eps_bound == 0.05);
  CHECK(c.theta_grid.values.size() == 20);
  CHECK(c.human_rate == Money::from_dollars(0.04));
  CHECK(c.learners.front().cost_per_sample_pass == Money::from_micros(300));

  auto doc = minimal();
  doc["eps_bound"] = 0.02;
  doc["theta_step"] = 0.1;
  doc["metric"] = "entropy";
  doc["human_rate"] = "0.003000";
  doc["learners"].push_back({{"name", "big"}, {"preset", "resnet50"}});
  doc["learners"].push_back({{"name", "synth"}, {"synthetic", {{"alpha", 2.0}, {"gamma", 0.4}}}});
  c = config_from_json(doc);
  CHECK(c.eps_bound == 0.02);
  CHECK(c.theta_grid.values.size() == 10);
  CHECK(c.metric == selection::Metric::Entropy);
  CHECK(c.human_rate == Money::from_micros(3000));
  CHECK(c.learners[1].fourier_width == 256);
  CHECK(c.learners[2].synthetic->curve.alpha == 2.0);
}

TEST_CASE("config errors name the key") {
  const auto message = [](const json& doc) {
    try {
      config_from_json(doc);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::ConfigError);
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message(json::object()).find("learners") != std::string::npos);
  auto doc = minimal();
  doc["eps_bound"] = "high";
  CHECK(message(doc).find("eps_bound") != std::string::npos);
  doc = minimal();
  doc["learners"][0].erase("name");
  CHECK(message(doc).find("learners[0].name") != std::string::npos);
  doc = minimal();
  doc["metric"] = "coinflip";
  CHECK(message(doc).find("metric") != std::string::npos);
  doc = minimal();
  doc["learners"][0]["epochs"] = 0;
  CHECK(message(doc) != "no error");
}

TEST_CASE("config round trip through JSON") {
  auto doc = minimal();
  doc["seed"] = 12;
  doc["learners"][0]["lr_drops"] = {3, 6};
  const auto c = config_from_json(doc);
  const auto back = config_from_json(config_to_json(c));
  CHECK(back.seed == 12);
  CHECK(back.learners.front().lr_drops == std::vector<int>{3, 6});
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK(config_to_json(c)["human_rate"] == "0.040000");
}

TEST_CASE("run report passes its schema and rejects tampering") {
  const auto d = generate_blobs({2, 3, 300, 6.0}, 1);
  auto c = config_from_json(minimal());
  c.seed = 4;
  Oracle oracle(c.human_rate);
  const auto r = run(c, d, oracle);
  auto report = build_run_report(c, d, r);
  CHECK_NOTHROW(validate_run_report(report));
  CHECK(report["result"]["total_cost"] == r.cost.total.to_string());
  CHECK(report["timing"]["training_runs"] == r.ledger.costs.rows().size());

  auto broken = report;
  broken["result"]["total_cost"] = 1.5;
  CHECK_THROWS_AS(validate_run_report(broken), Error);
  broken = report;
  broken["result"].erase("s_size");
  CHECK_THROWS_AS(validate_run_report(broken), Error);
  broken = report;
  broken["extra"] = true;
  CHECK_THROWS_AS(validate_run_report(broken), Error);
  broken = report;
  broken["result"]["s_fraction"] = 1.5;
  CHECK_THROWS_AS(validate_run_report(broken), Error);

  const auto row = summary_row(d, r);
  CHECK(row.rfind("blobs,softmax,", 0) == 0);
  CHECK(std::count(row.begin(), row.end(), ',') == 6);
}
