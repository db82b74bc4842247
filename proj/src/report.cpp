#include "mcal/report.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <regex>

#include "mcal/config.hpp"
#include "mcal/error.hpp"

namespace mcal {

using nlohmann::json;

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

json curves_json(const IterationRecord& rec, const std::vector<double>& thetas) {
  json out = json::array();
  for (std::size_t i = 0; i < rec.fits.size() && i < thetas.size(); ++i) {
    const auto& f = rec.fits[i];
    out.push_back({{"theta", thetas[i]},
                   {"measured_error", rec.theta_errors[i]},
                   {"alpha", f.model.alpha},
                   {"gamma", f.model.gamma},
                   {"inv_k", f.model.inv_k},
                   {"family", std::string(curve::to_string(f.family))},
                   {"log_rmse", f.log_rmse}});
  }
  return out;
}

}  // namespace

json build_run_report(const MCALConfig& config, const Dataset& dataset, const MCALResult& result) {
  json iterations = json::array();
  std::uint64_t sample_passes = 0;
  for (const auto& rec : result.ledger.iterations) {
    for (const auto& l : config.learners) {
      if (l.name == rec.learner) sample_passes += static_cast<std::uint64_t>(rec.b_size) * static_cast<std::uint64_t>(l.epochs);
    }
    iterations.push_back({{"iteration", rec.iteration},
                          {"learner", rec.learner},
                          {"b_size", rec.b_size},
                          {"delta", rec.delta},
                          {"iter_training_cost", rec.iter_training_cost.to_string()},
                          {"cum_training_cost", rec.cum_training_cost.to_string()},
                          {"cost_coefficient", rec.cost_coefficient},
                          {"c_star", rec.c_star.to_string()},
                          {"b_opt", rec.b_opt},
                          {"theta_star", rec.theta_star},
                          {"stable", rec.stable},
                          {"curves", curves_json(rec, config.theta_grid.values)}});
  }
  const double vs_human = result.full_human_cost.micros() == 0
                              ? 0.0
                              : result.cost.total.dollars() / result.full_human_cost.dollars();
  json report{
      {"config", config_to_json(config)},
      {"dataset",
       {{"name", dataset.name}, {"size", dataset.size()}, {"dim", dataset.dim()}, {"class_count", dataset.class_count}}},
      {"result",
       {{"learner", result.learner},
        {"final_b", result.final_b},
        {"theta_star", result.theta_star},
        {"s_size", result.s_size},
        {"test_size", result.test_size},
        {"x_size", result.x_size},
        {"b_fraction", ratio(result.final_b, result.x_size)},
        {"s_fraction", ratio(result.s_size, result.x_size)},
        {"human_cost", result.cost.human_cost.to_string()},
        {"training_cost", result.cost.training_cost.to_string()},
        {"total_cost", result.cost.total.to_string()},
        {"test_set_cost", result.test_set_cost.to_string()},
        {"full_human_cost", result.full_human_cost.to_string()},
        {"measured_error_s", result.measured_error_s},
        {"measured_overall_error", result.measured_overall_error},
        {"infeasible", result.infeasible},
        {"stop_reason", result.stop_reason},
        {"iterations", std::move(iterations)}}},
      {"cost_vs_human", vs_human},
      {"timing",
       {{"iterations", result.ledger.iterations.size()},
        {"training_runs", result.ledger.costs.rows().size()},
        {"sample_passes", sample_passes}}}};
  validate_run_report(report);
  return report;
}

namespace {

class Checker {
 public:
  const json& at(const json& obj, const std::string& path, const char* key) const {
    const auto it = obj.find(key);
    if (it == obj.end()) fail(path + "." + key, "missing");
    return *it;
  }

  void object(const json& v, const std::string& path) const {
    if (!v.is_object()) fail(path, "expected an object");
  }
  void string(const json& v, const std::string& path) const {
    if (!v.is_string()) fail(path, "expected a string");
  }
  void boolean(const json& v, const std::string& path) const {
    if (!v.is_boolean()) fail(path, "expected a boolean");
  }
  void count(const json& v, const std::string& path, std::int64_t min = 0) const {
    if (!v.is_number_integer() || v.get<std::int64_t>() < min) fail(path, "expected an integer >= " + std::to_string(min));
  }
  void number(const json& v, const std::string& path, double lo, double hi, bool open_lo = false) const {
    if (!v.is_number()) fail(path, "expected a number");
    const double x = v.get<double>();
    if (x < lo || x > hi || (open_lo && x == lo)) fail(path, "number out of range");
  }
  void fraction(const json& v, const std::string& path) const { number(v, path, 0.0, 1.0); }
  void money(const json& v, const std::string& path) const {
    static const std::regex kMoney("^-?[0-9]+\\.[0-9]{6}$");
    if (!v.is_string() || !std::regex_match(v.get_ref<const std::string&>(), kMoney)) {
      fail(path, "expected a 6-decimal money string");
    }
  }
  void only(const json& obj, const std::string& path, std::initializer_list<const char*> keys) const {
    for (const auto& [key, value] : obj.items()) {
      bool known = false;
      for (const char* k : keys) known = known || key == k;
      if (!known) fail(path + "." + key, "unexpected key");
    }
  }

  [[noreturn]] void fail(const std::string& path, const std::string& what) const {
    throw Error(ErrorKind::SchemaViolation, path + ": " + what);
  }
};

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

void validate_run_report(const json& report) {
  const Checker c;
  c.object(report, "$");
  c.only(report, "$", {"config", "dataset", "result", "cost_vs_human", "timing"});

  const json& cfg = c.at(report, "$", "config");
  c.object(cfg, "$.config");
  for (const char* key : {"eps_bound", "test_fraction", "seed_fraction", "stabilization_threshold", "theta_step"}) {
    c.fraction(c.at(cfg, "$.config", key), std::string("$.config.") + key);
  }
  c.number(c.at(cfg, "$.config", "beta"), "$.config.beta", 0.0, kInf);
  c.count(c.at(cfg, "$.config", "n_min"), "$.config.n_min", 1);
  const json& metric = c.at(cfg, "$.config", "metric");
  if (metric != "margin" && metric != "least_confidence" && metric != "entropy") c.fail("$.config.metric", "unknown metric");
  c.money(c.at(cfg, "$.config", "human_rate"), "$.config.human_rate");
  c.count(c.at(cfg, "$.config", "seed"), "$.config.seed");
  const json& learners = c.at(cfg, "$.config", "learners");
  if (!learners.is_array() || learners.empty() || learners.size() > 4) c.fail("$.config.learners", "expected 1 to 4 learners");
  for (std::size_t i = 0; i < learners.size(); ++i) {
    const std::string p = "$.config.learners[" + std::to_string(i) + "]";
    const json& l = learners[i];
    c.object(l, p);
    const json& name = c.at(l, p, "name");
    c.string(name, p + ".name");
    if (name.get_ref<const std::string&>().empty()) c.fail(p + ".name", "empty");
    c.money(c.at(l, p, "cost_per_sample_pass"), p + ".cost_per_sample_pass");
    c.count(c.at(l, p, "epochs"), p + ".epochs", 1);
    c.count(c.at(l, p, "minibatch"), p + ".minibatch", 1);
    c.number(c.at(l, p, "base_lr"), p + ".base_lr", 0.0, kInf, true);
    const json& drops = c.at(l, p, "lr_drops");
    if (!drops.is_array()) c.fail(p + ".lr_drops", "expected an array");
    for (const auto& d : drops) {
      if (!d.is_number_integer()) c.fail(p + ".lr_drops", "expected integers");
    }
  }

  const json& ds = c.at(report, "$", "dataset");
  c.object(ds, "$.dataset");
  c.only(ds, "$.dataset", {"name", "size", "dim", "class_count"});
  c.string(c.at(ds, "$.dataset", "name"), "$.dataset.name");
  c.count(c.at(ds, "$.dataset", "size"), "$.dataset.size");
  c.count(c.at(ds, "$.dataset", "dim"), "$.dataset.dim");
  c.count(c.at(ds, "$.dataset", "class_count"), "$.dataset.class_count", 2);

  const json& res = c.at(report, "$", "result");
  const std::string rp = "$.result";
  c.object(res, rp);
  c.only(res, rp,
         {"learner", "final_b", "theta_star", "s_size", "test_size", "x_size", "b_fraction", "s_fraction", "human_cost",
          "training_cost", "total_cost", "test_set_cost", "full_human_cost", "measured_error_s",
          "measured_overall_error", "infeasible", "stop_reason", "iterations"});
  c.string(c.at(res, rp, "learner"), rp + ".learner");
  c.string(c.at(res, rp, "stop_reason"), rp + ".stop_reason");
  c.boolean(c.at(res, rp, "infeasible"), rp + ".infeasible");
  for (const char* key : {"final_b", "s_size", "test_size", "x_size"}) c.count(c.at(res, rp, key), rp + "." + key);
  for (const char* key : {"theta_star", "b_fraction", "s_fraction", "measured_error_s", "measured_overall_error"}) {
    c.fraction(c.at(res, rp, key), rp + "." + key);
  }
  for (const char* key : {"human_cost", "training_cost", "total_cost", "test_set_cost", "full_human_cost"}) {
    c.money(c.at(res, rp, key), rp + "." + key);
  }
  const json& iterations = c.at(res, rp, "iterations");
  if (!iterations.is_array()) c.fail(rp + ".iterations", "expected an array");
  for (std::size_t i = 0; i < iterations.size(); ++i) {
    const std::string p = rp + ".iterations[" + std::to_string(i) + "]";
    const json& it = iterations[i];
    c.object(it, p);
    c.only(it, p,
           {"iteration", "learner", "b_size", "delta", "iter_training_cost", "cum_training_cost", "cost_coefficient",
            "c_star", "b_opt", "theta_star", "stable", "curves"});
    for (const char* key : {"iteration", "b_size", "delta", "b_opt"}) c.count(c.at(it, p, key), p + "." + key);
    c.string(c.at(it, p, "learner"), p + ".learner");
    for (const char* key : {"iter_training_cost", "cum_training_cost", "c_star"}) c.money(c.at(it, p, key), p + "." + key);
    c.number(c.at(it, p, "cost_coefficient"), p + ".cost_coefficient", 0.0, kInf);
    c.fraction(c.at(it, p, "theta_star"), p + ".theta_star");
    c.boolean(c.at(it, p, "stable"), p + ".stable");
    const json& curves = c.at(it, p, "curves");
    if (!curves.is_array()) c.fail(p + ".curves", "expected an array");
    for (std::size_t j = 0; j < curves.size(); ++j) {
      const std::string q = p + ".curves[" + std::to_string(j) + "]";
      const json& cv = curves[j];
      c.object(cv, q);
      c.only(cv, q, {"theta", "measured_error", "alpha", "gamma", "inv_k", "family", "log_rmse"});
      c.fraction(c.at(cv, q, "theta"), q + ".theta");
      c.fraction(c.at(cv, q, "measured_error"), q + ".measured_error");
      c.number(c.at(cv, q, "alpha"), q + ".alpha", 0.0, kInf, true);
      for (const char* key : {"gamma", "inv_k", "log_rmse"}) c.number(c.at(cv, q, key), q + "." + key, 0.0, kInf);
      const json& family = c.at(cv, q, "family");
      if (family != "power" && family != "truncated") c.fail(q + ".family", "unknown family");
    }
  }

  c.number(c.at(report, "$", "cost_vs_human"), "$.cost_vs_human", 0.0, kInf);
  const json& timing = c.at(report, "$", "timing");
  c.object(timing, "$.timing");
  c.only(timing, "$.timing", {"iterations", "training_runs", "sample_passes"});
  for (const char* key : {"iterations", "training_runs", "sample_passes"}) {
    c.count(c.at(timing, "$.timing", key), std::string("$.timing.") + key);
  }
}

std::string summary_row(const Dataset& dataset, const MCALResult& result) {
  const auto fixed4 = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return std::string(buf);
  };
  return dataset.name + "," + result.learner + "," + fixed4(ratio(result.final_b, result.x_size)) + "," +
         fixed4(ratio(result.s_size, result.x_size)) + "," + fixed4(result.measured_overall_error) + "," +
         result.cost.total.to_string() + "," + result.full_human_cost.to_string();
}

void write_json(const json& doc, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path + "'");
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::IoError, "write failed for '" + path + "'");
}

}  // namespace mcal
