#include "mcal/config.hpp"

#include <fstream>

#include "mcal/error.hpp"

namespace mcal {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw Error(ErrorKind::ConfigError, "config key '" + key + "': " + what);
}

const json* find(const json& obj, const std::string& key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

double number(const json& obj, const std::string& key, const std::string& path, double fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number()) bad(path + key, "expected a number");
  return v->get<double>();
}

long long integer(const json& obj, const std::string& key, const std::string& path, long long fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) bad(path + key, "expected an integer");
  return v->get<long long>();
}

learner::LearnerSpec learner_from_json(const json& obj, std::size_t index) {
  const std::string path = "learners[" + std::to_string(index) + "].";
  if (!obj.is_object()) bad("learners[" + std::to_string(index) + "]", "expected an object");
  const json* name = find(obj, "name");
  if (!name) bad(path + "name", "missing");
  if (!name->is_string()) bad(path + "name", "expected a string");

  learner::LearnerSpec spec;
  if (const json* preset = find(obj, "preset")) {
    if (!preset->is_string()) bad(path + "preset", "expected a string");
    spec = learner::architecture_preset(preset->get<std::string>());
  }
  spec.name = name->get<std::string>();
  if (const json* c = find(obj, "cost_per_sample_pass")) spec.cost_per_sample_pass = parse_money(*c, path + "cost_per_sample_pass");
  spec.epochs = static_cast<int>(integer(obj, "epochs", path, spec.epochs));
  spec.minibatch = static_cast<int>(integer(obj, "minibatch", path, spec.minibatch));
  spec.base_lr = number(obj, "base_lr", path, spec.base_lr);
  spec.l2 = number(obj, "l2", path, spec.l2);
  if (const json* drops = find(obj, "lr_drops")) {
    if (!drops->is_array()) bad(path + "lr_drops", "expected an array of integers");
    spec.lr_drops.clear();
    for (const auto& d : *drops) {
      if (!d.is_number_integer()) bad(path + "lr_drops", "expected an array of integers");
      spec.lr_drops.push_back(d.get<int>());
    }
  }
  if (const json* f = find(obj, "features")) {
    if (*f == "raw") {
      spec.feature_map = learner::FeatureMap::Raw;
    } else if (*f == "fourier") {
      spec.feature_map = learner::FeatureMap::Fourier;
    } else {
      bad(path + "features", "expected \"raw\" or \"fourier\"");
    }
  }
  spec.fourier_width = static_cast<int>(integer(obj, "fourier_width", path, spec.fourier_width));
  spec.fourier_scale = number(obj, "fourier_scale", path, spec.fourier_scale);
  if (const json* syn = find(obj, "synthetic")) {
    if (!syn->is_object()) bad(path + "synthetic", "expected an object");
    const std::string sp = path + "synthetic.";
    learner::SyntheticCurve curve;
    curve.curve.alpha = number(*syn, "alpha", sp, 1.0);
    curve.curve.gamma = number(*syn, "gamma", sp, 0.5);
    curve.curve.inv_k = number(*syn, "inv_k", sp, 0.0);
    curve.q = number(*syn, "q", sp, curve.q);
    curve.noise_seed = static_cast<std::uint64_t>(integer(*syn, "noise_seed", sp, 0));
    spec.synthetic = curve;
  }
  spec.validate();
  return spec;
}

}  // namespace

Money parse_money(const json& value, const std::string& key) {
  if (value.is_number()) return Money::from_dollars(value.get<double>());
  if (value.is_string()) {
    const auto& s = value.get_ref<const std::string&>();
    std::size_t used = 0;
    double dollars = 0.0;
    try {
      dollars = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) bad(key, "expected a decimal dollar amount, got \"" + s + "\"");
    return Money::from_dollars(dollars);
  }
  bad(key, "expected a dollar amount");
}

MCALConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorKind::ConfigError, "config must be a JSON object");
  MCALConfig config;
  config.eps_bound = number(doc, "eps_bound", "", config.eps_bound);
  config.test_fraction = number(doc, "test_fraction", "", config.test_fraction);
  config.seed_fraction = number(doc, "seed_fraction", "", config.seed_fraction);
  config.stabilization_threshold = number(doc, "stabilization_threshold", "", config.stabilization_threshold);
  config.beta = number(doc, "beta", "", config.beta);
  const long long n_min = integer(doc, "n_min", "", static_cast<long long>(config.n_min));
  if (n_min < 1) bad("n_min", "must be >= 1");
  config.n_min = static_cast<std::size_t>(n_min);
  if (const json* step = find(doc, "theta_step")) {
    if (!step->is_number()) bad("theta_step", "expected a number");
    try {
      config.theta_grid = planner::ThetaGrid::uniform(step->get<double>());
    } catch (const Error& e) {
      bad("theta_step", e.what());
    }
  }
  if (const json* metric = find(doc, "metric")) {
    if (!metric->is_string()) bad("metric", "expected a string");
    try {
      config.metric = selection::parse_metric(metric->get<std::string>());
    } catch (const Error& e) {
      bad("metric", e.what());
    }
  }
  if (const json* rate = find(doc, "human_rate")) config.human_rate = parse_money(*rate, "human_rate");
  if (const json* seed = find(doc, "seed")) {
    if (!seed->is_number_unsigned() && !(seed->is_number_integer() && seed->get<std::int64_t>() >= 0)) bad("seed", "expected a non-negative integer");
    config.seed = seed->get<std::uint64_t>();
  }

  const json* learners = find(doc, "learners");
  if (!learners) bad("learners", "missing");
  if (!learners->is_array() || learners->empty()) bad("learners", "expected a non-empty array");
  for (std::size_t i = 0; i < learners->size(); ++i) config.learners.push_back(learner_from_json((*learners)[i], i));
  config.validate();
  return config;
}

MCALConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open config '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, "config '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(doc);
}

json config_to_json(const MCALConfig& config) {
  json learners = json::array();
  for (const auto& l : config.learners) {
    json obj{{"name", l.name},
             {"cost_per_sample_pass", l.cost_per_sample_pass.to_string()},
             {"epochs", l.epochs},
             {"minibatch", l.minibatch},
             {"base_lr", l.base_lr},
             {"lr_drops", l.lr_drops},
             {"l2", l.l2},
             {"features", l.feature_map == learner::FeatureMap::Raw ? "raw" : "fourier"},
             {"fourier_width", l.fourier_width},
             {"fourier_scale", l.fourier_scale}};
    if (l.synthetic) {
      obj["synthetic"] = {{"alpha", l.synthetic->curve.alpha},
                          {"gamma", l.synthetic->curve.gamma},
                          {"inv_k", l.synthetic->curve.inv_k},
                          {"q", l.synthetic->q},
                          {"noise_seed", l.synthetic->noise_seed}};
    }
    learners.push_back(std::move(obj));
  }
  return {{"eps_bound", config.eps_bound},
          {"test_fraction", config.test_fraction},
          {"seed_fraction", config.seed_fraction},
          {"stabilization_threshold", config.stabilization_threshold},
          {"beta", config.beta},
          {"n_min", config.n_min},
          {"theta_step", config.theta_grid.values.front()},
          {"metric", std::string(selection::to_string(config.metric))},
          {"human_rate", config.human_rate.to_string()},
          {"seed", config.seed},
          {"learners", std::move(learners)}};
}

}  // namespace mcal
