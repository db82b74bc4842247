// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "mcal/cli.hpp"
#include "mcal/costing.hpp"
#include "mcal/curve.hpp"
#include "mcal/error.hpp"
#include "mcal/learner.hpp"
#include "mcal/orchestrator.hpp"
#include "mcal/planner.hpp"
#include "mcal/random.hpp"
#include "mcal/simworld.hpp"
#include "planner_oracle.hpp"

using namespace mcal;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, value);
  return buf;
}

double rel(double got, double want) { return std::fabs(got - want) / std::fabs(want); }

std::vector<curve::CurveSample> sample_curve(const curve::TruncatedPowerLawModel& m, const std::vector<std::size_t>& sizes,
                                             double log_noise, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<curve::CurveSample> out;
  for (auto n : sizes) {
    const double x = static_cast<double>(n);
    const double clean = m.alpha * std::pow(x, -m.gamma) * std::exp(-m.inv_k * x);
    out.push_back({n, clean * std::exp(log_noise * rng.normal())});
  }
  return out;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("mcal_acceptance_" + tag + "_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int cli(std::vector<std::string> args, std::string* out = nullptr) {
  args.insert(args.begin(), "mcal");
  std::ostringstream o, e;
  const int code = cli::run_cli(args, o, e);
  if (out) *out = o.str();
  if (code != 0) std::fprintf(stderr, "mcal %s -> exit %d: %s", args[1].c_str(), code, e.str().c_str());
  return code;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 1. Exact points from a known truncated law and from a pure power law.
Verdict curve_fit_exactness() {
  const auto t0 = Clock::now();
  Verdict v;
  const curve::TruncatedPowerLawModel truth{1.0, 0.5, 1.0 / 2000.0};
  const auto fit = curve::fit_truncated_power_law(sample_curve(truth, {100, 400, 1600}, 0.0, 0));
  const double worst =
      std::max({rel(fit.model.alpha, truth.alpha), rel(fit.model.gamma, truth.gamma), rel(fit.model.inv_k, truth.inv_k)});
  const auto pure = curve::fit_truncated_power_law(sample_curve({0.8, 0.35, 0.0}, {50, 200, 800, 3200}, 0.0, 0));
  const double elapsed = seconds_since(t0);
  v.pass = worst <= 1e-6 && pure.model.inv_k <= 1e-9 && elapsed < 1.0;
  v.detail = "max rel err " + fmt("%.2e", worst) + ", pure-power inv_k " + fmt("%.2e", pure.model.inv_k) + ", " +
             fmt("%.3f", elapsed) + " s";
  return v;
}

// 2. Twelve noisy points per seed.
Verdict noisy_recovery() {
  const auto t0 = Clock::now();
  const curve::TruncatedPowerLawModel truth{1.0, 0.5, 1.0 / 2000.0};
  std::vector<std::size_t> sizes;
  for (double n = 50.0; sizes.size() < 12; n *= 1.45) sizes.push_back(static_cast<std::size_t>(std::lround(n)));
  int gamma_ok = 0;
  int holdout_ok = 0;
  double worst_gamma = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto series = sample_curve(truth, sizes, 0.02, derive_seed(seed, 2));
    const double dg = std::fabs(curve::fit_truncated_power_law(series).model.gamma - truth.gamma);
    worst_gamma = std::max(worst_gamma, dg);
    gamma_ok += dg <= 0.05;
    const auto cmp = curve::compare_extrapolation(std::span(series).first(9), std::span(series).subspan(9));
    holdout_ok += cmp.truncated_holdout_rmse <= cmp.power_holdout_rmse;
  }
  const double elapsed = seconds_since(t0);
  Verdict v;
  v.pass = gamma_ok >= 9 && holdout_ok == 10 && elapsed < 5.0;
  v.detail = "gamma within 0.05 on " + std::to_string(gamma_ok) + "/10 (worst " + fmt("%.4f", worst_gamma) +
             "), truncated holdout wins on " + std::to_string(holdout_ok) + "/10, " + fmt("%.3f", elapsed) + " s";
  return v;
}

// 3. Planner search against exhaustive enumeration.
Verdict planner_vs_brute_force() {
  const auto t0 = Clock::now();
  int matches = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(derive_seed(seed, 3));
    planner::PlanContext ctx;
    ctx.x_size = 200 + rng.below(5000);
    ctx.test_size = rng.below(ctx.x_size / 5);
    ctx.b_current = 1 + rng.below((ctx.x_size - ctx.test_size) / 2);
    ctx.human_rate = Money::from_dollars(0.001 + 0.1 * rng.uniform());
    ctx.cost_model.k = 0.01 * rng.uniform();
    ctx.eps_bound = 0.005 + 0.1 * rng.uniform();
    ctx.delta = 1 + rng.below(300);
    ctx.past_training_cost = Money::from_dollars(rng.uniform());
    planner::PerThetaModels models;
    models.thetas = planner::ThetaGrid::uniform(0.05).values;
    const double q = 1.0 + 2.0 * rng.uniform();
    for (double theta : models.thetas) {
      curve::FitReport f;
      f.model = {(0.1 + 2.0 * rng.uniform()) * std::pow(theta, q), 0.9 * rng.uniform(),
                 rng.uniform() < 0.5 ? 0.0 : rng.uniform() / 500.0};
      models.fits.push_back(f);
    }
    const std::size_t step = 1 + rng.below(200);
    const auto plan = planner::find_b_opt(models, ctx, step);
    const auto brute = oracle::enumerate(models, ctx, step);
    matches += plan.b_opt == brute.b && plan.theta_star == brute.theta && plan.s_star_size == brute.s &&
               plan.predicted_total_cost == brute.cost;
  }
  const double elapsed = seconds_since(t0);
  Verdict v;
  v.pass = matches == 100 && elapsed < 10.0;
  v.detail = std::to_string(matches) + "/100 exact, " + fmt("%.3f", elapsed) + " s";
  return v;
}

Dataset label_only(std::size_t n, int classes) {
  Dataset d;
  d.name = "labels";
  d.class_count = classes;
  d.features = FeatureMatrix::Zero(static_cast<Eigen::Index>(n), 1);
  d.true_labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) d.true_labels.push_back(static_cast<int>(i % static_cast<std::size_t>(classes)));
  return d;
}

learner::LearnerSpec synthetic_learner(curve::TruncatedPowerLawModel curve, double q, Money price) {
  learner::LearnerSpec spec;
  spec.name = "synthetic";
  spec.cost_per_sample_pass = price;
  spec.synthetic = learner::SyntheticCurve{curve, q, 11};
  return spec;
}

// 4. Ledger sum at constant batch size, and oracle billing under a fuzz.
Verdict cost_identities() {
  Verdict v;
  int ledgers_ok = 0;
  const struct {
    std::size_t n, delta;
    int m;
    std::int64_t micros;
  } runs[] = {{10000, 100, 8, 300}, {20000, 50, 12, 1234}, {5000, 25, 20, 7}};
  for (const auto& r : runs) {
    const auto data = label_only(r.n, 3);
    MCALConfig config;
    config.seed = r.delta;
    config.seed_fraction = static_cast<double>(r.delta) / static_cast<double>(r.n);
    config.learners.push_back(synthetic_learner({0.5, 0.3, 0.0}, 2.0, Money::from_micros(r.micros)));
    const auto draws = draw_initial_sets(config, data);
    Oracle oracle(config.human_rate);
    LabelStore store(data, oracle);
    RunLedger ledger;
    Campaign campaign(config, config.learners.front(), data, draws, store, ledger);
    campaign.start();
    for (int i = 1; i < r.m; ++i) campaign.acquire_and_train(r.delta);
    const auto delta = static_cast<std::int64_t>(r.delta);
    const Money want = Money::from_micros(r.micros) * (delta * r.m * (r.m + 1) / 2);
    ledgers_ok += ledger.costs.cumulative_training_cost() == want && ledger.costs.rows().size() == std::size_t(r.m);
  }

  const auto data = label_only(60000, 4);
  Rng rng(derive_seed(4, 4));
  Oracle oracle(Money::from_micros(1 + static_cast<std::int64_t>(rng.below(90000))));
  std::vector<bool> labeled(data.size(), false);
  std::int64_t issued = 0;
  int calls_ok = 0;
  for (int call = 0; call < 10000; ++call) {
    std::vector<std::size_t> batch;
    const std::size_t size = rng.below(8);
    for (std::size_t i = 0; i < size; ++i) batch.push_back(rng.below(data.size() + 5));
    bool expect_ok = true;
    std::vector<bool> seen(data.size(), false);
    for (auto idx : batch) {
      if (idx >= data.size() || labeled[idx] || seen[idx]) expect_ok = false;
      if (idx < data.size()) seen[idx] = true;
    }
    bool threw = false;
    try {
      const auto labels = oracle.label(data, batch);
      for (std::size_t i = 0; i < batch.size(); ++i) threw |= labels[i] != data.true_labels[batch[i]];
    } catch (const Error&) {
      threw = true;
    }
    if (expect_ok) {
      for (auto idx : batch) labeled[idx] = true;
      issued += static_cast<std::int64_t>(batch.size());
    }
    calls_ok += threw != expect_ok && oracle.dollars_accrued() == oracle.price_per_label() * issued &&
                oracle.labels_issued() == static_cast<std::size_t>(issued);
  }
  v.pass = ledgers_ok == 3 && calls_ok == 10000;
  v.detail = "constant-delta ledgers " + std::to_string(ledgers_ok) + "/3, oracle calls " + std::to_string(calls_ok) +
             "/10000 (" + std::to_string(issued) + " labels billed)";
  return v;
}

// 5. Analytic softmax gradient against central differences.
Verdict gradient_check() {
  Eigen::MatrixXd design(5, 3);
  design << 0.5, -1.2, 0.3, 1.1, 0.4, -0.7, -0.3, 0.9, 1.5, 0.8, -0.5, -1.1, -1.4, 0.2, 0.6;
  const std::vector<int> labels{0, 2, 1, 0, 2};
  Eigen::MatrixXd w(4, 3);
  w << 0.1, -0.2, 0.05, 0.3, 0.1, -0.4, -0.2, 0.25, 0.15, 0.05, -0.1, 0.2;
  const double l2 = 1e-2;
  const double h = 1e-5;
  const auto analytic = learner::softmax_loss_gradient(w, design, labels, l2);
  Eigen::MatrixXd numeric(w.rows(), w.cols());
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      Eigen::MatrixXd up = w, down = w;
      up(i, j) += h;
      down(i, j) -= h;
      numeric(i, j) = (learner::softmax_loss_gradient(up, design, labels, l2).loss -
                       learner::softmax_loss_gradient(down, design, labels, l2).loss) /
                      (2 * h);
    }
  }
  const double err = (analytic.gradient - numeric).norm() / std::max(analytic.gradient.norm(), numeric.norm());
  return {err <= 1e-5, "relative error " + fmt("%.2e", err)};
}

struct PresetOutcome {
  double overall_error = 0.0;
  double s_fraction = 0.0;
  double cost_ratio = 0.0;
  double seconds = 0.0;
};

PresetOutcome run_preset(const std::string& preset, std::uint64_t seed, Money price) {
  const auto t0 = Clock::now();
  const auto data = generate_blobs(blob_preset(preset), seed);
  MCALConfig config;
  config.seed = seed;
  learner::LearnerSpec spec;
  spec.cost_per_sample_pass = price;
  config.learners.push_back(spec);
  Oracle oracle(config.human_rate);
  const auto result = run(config, data, oracle);
  const auto report = evaluate_result(result, data);
  PresetOutcome out;
  out.overall_error = report.overall_error;
  out.s_fraction = static_cast<double>(report.s_size) / static_cast<double>(report.x_size);
  out.cost_ratio = result.cost.total.dollars() / result.full_human_cost.dollars();
  out.seconds = seconds_since(t0);
  return out;
}

// 6. Easy preset end to end.
Verdict easy_preset() {
  Verdict v;
  double worst_error = 0.0, worst_ratio = 0.0, slowest = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto r = run_preset("easy", seed, Money::from_micros(300));
    worst_error = std::max(worst_error, r.overall_error);
    worst_ratio = std::max(worst_ratio, r.cost_ratio);
    slowest = std::max(slowest, r.seconds);
    v.pass &= r.overall_error <= 0.05 && r.cost_ratio < 0.9 && r.seconds < 120.0;
  }
  v.detail = "worst error " + fmt("%.4f", worst_error) + ", worst cost/human " + fmt("%.4f", worst_ratio) +
             ", slowest seed " + fmt("%.2f", slowest) + " s";
  return v;
}

// 7. Hard preset with an expensive learner.
Verdict hard_preset() {
  Verdict v;
  double worst_error = 0.0, worst_s = 0.0, slowest = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto r = run_preset("hard", seed, Money::from_dollars(0.01));
    worst_error = std::max(worst_error, r.overall_error);
    worst_s = std::max(worst_s, r.s_fraction);
    slowest = std::max(slowest, r.seconds);
    v.pass &= r.s_fraction <= 0.25 && r.overall_error <= 0.05 && r.seconds < 120.0;
  }
  v.detail = "worst |S|/|X| " + fmt("%.4f", worst_s) + ", worst error " + fmt("%.4f", worst_error) +
             ", slowest seed " + fmt("%.2f", slowest) + " s";
  return v;
}

// 8. MCAL against fixed-batch active learning, through the sweep command.
Verdict sweep_dominance(const std::string& config_path) {
  const auto t0 = Clock::now();
  TempDir tmp("sweep");
  int wins = 0;
  std::string ratios;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto data = tmp.file("easy" + std::to_string(seed) + ".csv");
    const auto csv = tmp.file("sweep" + std::to_string(seed) + ".csv");
    if (cli({"gen-data", "--preset", "easy", "--seed", std::to_string(seed), "--out", data}) != 0 ||
        cli({"sweep-delta", "--data", data, "--config", config_path, "--seed", std::to_string(seed), "--deltas",
             "1%,2%,5%,10%,20%", "--out-csv", csv}) != 0) {
      return {false, "sweep command failed on seed " + std::to_string(seed)};
    }
    std::istringstream rows(slurp(csv));
    std::string line;
    std::getline(rows, line);
    double best_fixed = std::numeric_limits<double>::infinity();
    double mcal_cost = std::numeric_limits<double>::quiet_NaN();
    int fixed_rows = 0;
    while (std::getline(rows, line)) {
      const auto comma = line.find(',');
      const double cost = std::stod(line.substr(comma + 1, line.find(',', comma + 1) - comma - 1));
      if (line.rfind("mcal,", 0) == 0) {
        mcal_cost = cost;
      } else {
        best_fixed = std::min(best_fixed, cost);
        ++fixed_rows;
      }
    }
    if (fixed_rows != 5 || std::isnan(mcal_cost)) return {false, "malformed sweep output on seed " + std::to_string(seed)};
    wins += mcal_cost <= best_fixed * 1.05;
    ratios += (ratios.empty() ? "" : " ") + fmt("%.3f", mcal_cost / best_fixed);
  }
  const double elapsed = seconds_since(t0);
  return {wins >= 4 && elapsed < 900.0, "MCAL/min-fixed per seed [" + ratios + "], " + std::to_string(wins) +
                                             "/5 within 1.05, " + fmt("%.1f", elapsed) + " s"};
}

// 9. Repeated runs write identical files.
Verdict determinism(const std::string& config_path) {
  TempDir tmp("determinism");
  int identical = 0;
  for (const char* preset : {"easy", "medium"}) {
    const std::string p = preset;
    const auto data = tmp.file(p + ".csv");
    if (cli({"gen-data", "--preset", p, "--seed", "9", "--out", data}) != 0) return {false, "gen-data failed"};
    std::vector<std::string> reports, ledgers, summaries;
    for (int rep = 0; rep < 2; ++rep) {
      const auto tag = p + std::to_string(rep);
      std::string summary;
      if (cli({"run", "--data", data, "--config", config_path, "--seed", "9", "--out-report", tmp.file(tag + ".json"),
               "--out-ledger", tmp.file(tag + ".csv")},
              &summary) != 0) {
        return {false, "run failed on " + p};
      }
      reports.push_back(slurp(tmp.file(tag + ".json")));
      ledgers.push_back(slurp(tmp.file(tag + ".csv")));
      summaries.push_back(summary);
    }
    identical += !reports[0].empty() && reports[0] == reports[1] && ledgers[0] == ledgers[1] &&
                 summaries[0] == summaries[1];
  }
  return {identical == 2, std::to_string(identical) + "/2 presets byte-identical (report, ledger, summary)"};
}

// 10. The estimation loop on a learner that follows a known curve exactly.
Verdict synthetic_loop() {
  const auto t0 = Clock::now();
  const curve::TruncatedPowerLawModel truth{4.0, 0.3, 1.0 / 5000.0};
  const double q = 1.0;
  const auto data = label_only(2000000, 4);
  MCALConfig config;
  config.seed = 10;
  config.test_fraction = 0.5;
  config.seed_fraction = 0.0005;
  config.learners.push_back(synthetic_learner(truth, q, Money::from_micros(300)));
  const auto draws = draw_initial_sets(config, data);
  Oracle oracle(config.human_rate);
  LabelStore store(data, oracle);
  RunLedger ledger;
  Campaign campaign(config, config.learners.front(), data, draws, store, ledger);
  campaign.start();
  for (int i = 0; i < 5; ++i) campaign.acquire_and_train(2000);
  const auto models = campaign.fit_models();
  Verdict v;
  v.detail = "after " + std::to_string(ledger.iterations.size()) + " iterations, |B| " +
             std::to_string(campaign.b_size()) + ":";
  v.pass = ledger.iterations.size() == 6;
  for (double theta : {0.25, 0.5, 0.75}) {
    const auto it = std::find_if(models.thetas.begin(), models.thetas.end(),
                                 [&](double t) { return std::fabs(t - theta) < 1e-9; });
    if (it == models.thetas.end()) return {false, "theta grid lacks " + fmt("%.2f", theta)};
    const auto& m = models.fits[static_cast<std::size_t>(it - models.thetas.begin())].model;
    const double ea = rel(m.alpha, truth.alpha * std::pow(theta, q));
    const double eg = rel(m.gamma, truth.gamma);
    const double ek = rel(m.inv_k, truth.inv_k);
    v.pass &= ea <= 0.15 && eg <= 0.15 && ek <= 0.15;
    v.detail += " theta " + fmt("%.2f", theta) + " [" + fmt("%.3f", ea) + " " + fmt("%.3f", eg) + " " +
                fmt("%.3f", ek) + "]";
  }
  v.detail += " rel err (alpha gamma inv_k), " + fmt("%.1f", seconds_since(t0)) + " s";
  return v;
}

}  // namespace

int main() {
  const std::string config_path = std::string(MCAL_TEST_DATA_DIR) + "/easy_config.json";
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"curve-fit exactness", curve_fit_exactness},
      {"noisy curve recovery", noisy_recovery},
      {"planner matches brute force", planner_vs_brute_force},
      {"cost accounting identities", cost_identities},
      {"softmax gradient check", gradient_check},
      {"easy preset end to end", easy_preset},
      {"hard preset falls back to humans", hard_preset},
      {"sweep dominance", [&] { return sweep_dominance(config_path); }},
      {"determinism", [&] { return determinism(config_path); }},
      {"synthetic-learner loop", synthetic_loop},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failures += !v.pass;
    std::printf("[%s] %zu %s: %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
