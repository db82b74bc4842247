#include "mcal/orchestrator.hpp"

#include <algorithm>
#include <numeric>

#include "mcal/error.hpp"
#include "mcal/random.hpp"

namespace mcal {

void MCALConfig::validate() const {
  const auto fraction = [](double v) { return v > 0.0 && v < 1.0; };
  if (!(eps_bound >= 0.0 && eps_bound < 1.0)) throw Error(ErrorKind::ConfigError, "eps_bound must be in [0, 1)");
  if (!fraction(test_fraction)) throw Error(ErrorKind::ConfigError, "test_fraction must be in (0, 1)");
  if (!fraction(seed_fraction)) throw Error(ErrorKind::ConfigError, "seed_fraction must be in (0, 1)");
  if (!fraction(stabilization_threshold)) {
    throw Error(ErrorKind::ConfigError, "stabilization_threshold must be in (0, 1)");
  }
  if (!(beta >= 0.0 && beta < 1.0)) throw Error(ErrorKind::ConfigError, "beta must be in [0, 1)");
  if (n_min < 1) throw Error(ErrorKind::ConfigError, "n_min must be >= 1");
  if (learners.empty() || learners.size() > 4) throw Error(ErrorKind::ConfigError, "need 1 to 4 learners");
  if (human_rate < Money{}) throw Error(ErrorKind::ConfigError, "human_rate must be >= 0");
  try {
    theta_grid.validate();
  } catch (const Error& e) {
    throw Error(ErrorKind::ConfigError, e.what());
  }
  for (const auto& l : learners) l.validate();
}

SharedDraws draw_initial_sets(const MCALConfig& config, const Dataset& dataset) {
  const std::size_t n = dataset.size();
  const std::size_t test = selection::fraction_count(config.test_fraction, n);
  const std::size_t seed = selection::fraction_count(config.seed_fraction, n);
  const auto classes = static_cast<std::size_t>(dataset.class_count);
  if (test < classes || seed < classes || test + seed >= n) {
    throw Error(ErrorKind::DatasetTooSmall, "dataset of " + std::to_string(n) + " items gives |T| = " +
                                                std::to_string(test) + " and |B0| = " + std::to_string(seed) +
                                                "; both must be >= class count " + std::to_string(classes));
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(derive_seed(config.seed, 1));
  rng.shuffle(perm);
  SharedDraws draws;
  draws.test.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(test));
  draws.seed.assign(perm.begin() + static_cast<std::ptrdiff_t>(test),
                    perm.begin() + static_cast<std::ptrdiff_t>(test + seed));
  std::sort(draws.test.begin(), draws.test.end());
  std::sort(draws.seed.begin(), draws.seed.end());
  return draws;
}

std::vector<int> LabelStore::labels(std::span<const std::size_t> indices) {
  std::vector<std::size_t> fresh;
  for (std::size_t idx : indices) {
    if (idx >= dataset_.size()) throw Error(ErrorKind::IndexOutOfRange, "index " + std::to_string(idx));
    if (!oracle_.is_labeled(idx)) fresh.push_back(idx);
  }
  oracle_.label(dataset_, fresh);
  std::vector<int> out;
  out.reserve(indices.size());
  for (std::size_t idx : indices) out.push_back(dataset_.true_labels[idx]);
  return out;
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::HumanTest: return "human_test";
    case Provenance::HumanTrain: return "human_train";
    case Provenance::HumanResidual: return "human_residual";
    case Provenance::Classifier: return "classifier";
  }
  return "unknown";
}

Campaign::Campaign(const MCALConfig& config, learner::LearnerSpec spec, const Dataset& dataset,
                   const SharedDraws& draws, LabelStore& store, RunLedger& ledger)
    : config_(config),
      spec_(std::move(spec)),
      dataset_(dataset),
      draws_(draws),
      store_(store),
      ledger_(ledger),
      in_train_(dataset.size(), false),
      history_(config.theta_grid.values.size()),
      seed_size_(draws.seed.size()),
      delta_(draws.seed.size()) {}

std::size_t Campaign::cap() const { return dataset_.size() - draws_.test.size(); }

void Campaign::start() {
  train_ = draws_.seed;
  train_labels_ = store_.labels(train_);
  for (std::size_t idx : train_) in_train_[idx] = true;
  train_and_measure(train_.size());
  plan_and_record();
}

void Campaign::train_and_measure(std::size_t batch) {
  model_ = learner::fit(spec_, dataset_, train_, train_labels_);
  const Money cost = model_->training_cost();
  training_cost_ += cost;
  cost_history_.push_back({train_.size(), cost});

  const auto predictions = model_->predict(dataset_, draws_.test);
  std::vector<selection::TestPrediction> test;
  test.reserve(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    test.push_back({predictions[i].probs, predictions[i].label, dataset_.true_labels[draws_.test[i]]});
  }
  theta_errors_ = selection::estimate_theta_errors(test, config_.theta_grid.values, config_.metric);
  for (std::size_t i = 0; i < theta_errors_.size(); ++i) history_[i].push_back({train_.size(), theta_errors_[i]});

  ledger_.costs.append(train_.size(), batch, cost, store_.spent());
  IterationRecord rec;
  rec.iteration = ledger_.iterations.size();
  rec.learner = spec_.name;
  rec.b_size = train_.size();
  rec.delta = batch;
  rec.theta_errors = theta_errors_;
  rec.iter_training_cost = cost;
  rec.cum_training_cost = training_cost_;
  ledger_.iterations.push_back(std::move(rec));
  plan_.reset();
}

planner::PerThetaModels Campaign::fit_models() const {
  planner::PerThetaModels models;
  models.thetas = config_.theta_grid.values;
  for (const auto& series : history_) {
    if (series.size() >= 3) {
      models.fits.push_back(curve::fit_truncated_power_law(series));
    } else if (series.size() == 2) {
      models.fits.push_back(curve::fit_power_law(series));
    } else {
      curve::FitReport flat;
      flat.model = curve::TruncatedPowerLawModel(curve::floor_error(series.back().error), 0.0, 0.0);
      flat.n_points = 1;
      models.fits.push_back(flat);
    }
  }
  return models;
}

planner::PerThetaModels Campaign::measured_models() const {
  planner::PerThetaModels models;
  models.thetas = config_.theta_grid.values;
  for (double err : theta_errors_) {
    curve::FitReport flat;
    flat.model = curve::TruncatedPowerLawModel(curve::floor_error(err), 0.0, 0.0);
    flat.n_points = 1;
    models.fits.push_back(flat);
  }
  return models;
}

planner::PlanContext Campaign::context() const {
  planner::PlanContext ctx;
  ctx.x_size = dataset_.size();
  ctx.test_size = draws_.test.size();
  ctx.b_current = train_.size();
  ctx.past_training_cost = training_cost_;
  ctx.delta = delta_;
  ctx.human_rate = config_.human_rate;
  ctx.eps_bound = config_.eps_bound;
  ctx.cost_model = costing::fit_cost_coefficient(cost_history_);
  return ctx;
}

void Campaign::plan_and_record() {
  const auto models = fit_models();
  const auto ctx = context();
  plan_ = planner::find_b_opt_refined(models, ctx, seed_size_);
  stable_now_ = c_old_.has_value() &&
                planner::is_stable(*c_old_, plan_->predicted_total_cost, config_.stabilization_threshold);
  stable_seen_ = stable_seen_ || stable_now_;

  auto& rec = ledger_.iterations.back();
  rec.fits = models.fits;
  rec.cost_coefficient = ctx.cost_model.k;
  rec.c_star = plan_->predicted_total_cost;
  rec.b_opt = plan_->b_opt;
  rec.theta_star = plan_->theta_star;
  rec.stable = stable_now_;
}

void Campaign::finish(std::string reason) {
  finished_ = true;
  stop_reason_ = std::move(reason);
}

void Campaign::acquire_and_train(std::size_t count) {
  std::vector<std::size_t> pool;
  pool.reserve(cap() - train_.size());
  std::size_t t = 0;
  for (std::size_t idx = 0; idx < dataset_.size(); ++idx) {
    while (t < draws_.test.size() && draws_.test[t] < idx) ++t;
    if (in_train_[idx] || (t < draws_.test.size() && draws_.test[t] == idx)) continue;
    pool.push_back(idx);
  }
  const auto predictions = model_->predict(dataset_, pool);
  std::vector<selection::InformativenessScore> scores;
  scores.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    scores.push_back({pool[i], selection::score(config_.metric, predictions[i].probs)});
  }
  const auto batch = selection::select_batch(scores, count);
  const auto labels = store_.labels(batch);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    train_.push_back(batch[i]);
    train_labels_.push_back(labels[i]);
    in_train_[batch[i]] = true;
  }
  train_and_measure(batch.size());
}

bool Campaign::step() {
  if (finished_) return false;
  if (!plan_) plan_and_record();
  const auto plan = *plan_;
  const std::size_t b = train_.size();
  const bool saturated = plan.theta_star == config_.theta_grid.values.back();

  if (b >= cap()) {
    finish("pool_exhausted");
  } else if (plan.b_opt <= b && (stable_seen_ || saturated)) {
    // With theta* at the top of the grid more labels can only shrink S*,
    // so b_current is optimal before the models stabilize too.
    finish("reached_b_opt");
  } else if (stable_seen_ && c_old_ && plan.predicted_total_cost > *c_old_) {
    finish("cost_increased");
  } else if (plan.b_opt + delta_ <= cap()) {
    const auto beyond = planner::predict_total_cost(fit_models(), context(), plan.b_opt + delta_);
    if (beyond.predicted_total_cost <= plan.predicted_total_cost) finish("no_gain_beyond_b_opt");
  }
  if (finished_) return false;

  if (stable_now_ && plan.b_opt > b) {
    delta_ = planner::adapt_delta(fit_models(), context(), plan.b_opt, config_.n_min, config_.beta,
                                  plan.predicted_total_cost);
  }
  c_old_ = plan.predicted_total_cost;
  std::size_t batch = std::min(delta_, cap() - b);
  if (stable_seen_ && plan.b_opt > b) batch = std::min(batch, plan.b_opt - b);
  acquire_and_train(batch);
  plan_and_record();
  return true;
}

namespace {

MCALResult finalize(const MCALConfig& config, const Dataset& dataset, const SharedDraws& draws, LabelStore& store,
                    RunLedger ledger, const Campaign& chosen, bool guard_with_model, std::string stop_reason) {
  const std::size_t n = dataset.size();
  const std::size_t b = chosen.b_size();

  // Commit only to a subset that the raw test measurements allow; for
  // min-cost runs the fitted curves must agree as well.
  double theta = planner::predict_theta_star(chosen.measured_models(), b, n, config.eps_bound, draws.test.size()).theta;
  if (guard_with_model) {
    const double fitted =
        planner::predict_theta_star(chosen.fit_models(), b, n, config.eps_bound, draws.test.size()).theta;
    theta = std::min(theta, fitted);
  }

  std::vector<std::size_t> unlabeled;
  for (std::size_t idx = 0; idx < n; ++idx) {
    if (!store.is_labeled(idx)) unlabeled.push_back(idx);
  }
  const auto predictions = chosen.model().predict(dataset, unlabeled);
  std::vector<selection::InformativenessScore> scores;
  scores.reserve(unlabeled.size());
  for (std::size_t i = 0; i < unlabeled.size(); ++i) {
    scores.push_back({unlabeled[i], selection::score(config.metric, predictions[i].probs)});
  }
  const auto subset = selection::select_confident_subset(scores, theta);

  MCALResult r;
  r.learner = chosen.spec().name;
  r.final_b = b;
  r.theta_star = theta;
  r.x_size = n;
  r.test_size = draws.test.size();
  r.assignment.provenance.assign(n, Provenance::HumanTrain);
  r.assignment.labels.assign(n, -1);
  for (std::size_t idx : draws.test) r.assignment.provenance[idx] = Provenance::HumanTest;

  std::vector<bool> in_subset(n, false);
  for (std::size_t idx : subset) in_subset[idx] = true;
  std::vector<std::size_t> residual;
  std::size_t errors = 0;
  for (std::size_t i = 0; i < unlabeled.size(); ++i) {
    const std::size_t idx = unlabeled[i];
    if (in_subset[idx]) {
      r.assignment.provenance[idx] = Provenance::Classifier;
      r.assignment.labels[idx] = predictions[i].label;
      if (predictions[i].label != dataset.true_labels[idx]) ++errors;
    } else {
      r.assignment.provenance[idx] = Provenance::HumanResidual;
      residual.push_back(idx);
    }
  }
  store.labels(residual);
  for (std::size_t idx = 0; idx < n; ++idx) {
    if (r.assignment.provenance[idx] != Provenance::Classifier) r.assignment.labels[idx] = dataset.true_labels[idx];
  }

  r.s_size = subset.size();
  r.infeasible = subset.empty();
  r.measured_error_s = subset.empty() ? 0.0 : static_cast<double>(errors) / static_cast<double>(subset.size());
  r.measured_overall_error = costing::overall_error(n, r.s_size, r.measured_error_s);
  r.cost.human_cost = store.spent();
  r.cost.training_cost = ledger.costs.cumulative_training_cost();
  r.cost.total = r.cost.human_cost + r.cost.training_cost;
  r.test_set_cost = config.human_rate * static_cast<std::int64_t>(draws.test.size());
  r.full_human_cost = config.human_rate * static_cast<std::int64_t>(n);
  r.stop_reason = std::move(stop_reason);
  r.ledger = std::move(ledger);
  return r;
}

}  // namespace

MCALResult run_multi_candidate(const MCALConfig& config, const Dataset& dataset, Oracle& oracle) {
  config.validate();
  dataset.validate();
  const SharedDraws draws = draw_initial_sets(config, dataset);
  LabelStore store(dataset, oracle);
  RunLedger ledger;
  store.labels(draws.test);

  std::vector<std::unique_ptr<Campaign>> campaigns;
  for (std::size_t i = 0; i < config.learners.size(); ++i) {
    auto spec = config.learners[i];
    spec.seed = derive_seed(config.seed, 100 + i);
    campaigns.push_back(std::make_unique<Campaign>(config, spec, dataset, draws, store, ledger));
  }
  for (auto& c : campaigns) c->start();

  // Every candidate runs until its models stabilize or it stops on its own.
  const auto settled = [](const Campaign& c) { return c.finished() || c.stable_seen(); };
  while (!std::all_of(campaigns.begin(), campaigns.end(), [&](const auto& c) { return settled(*c); })) {
    for (auto& c : campaigns) {
      if (!settled(*c)) c->step();
    }
  }
  Campaign* chosen = campaigns.front().get();
  for (auto& c : campaigns) {
    if (c->plan()->predicted_total_cost < chosen->plan()->predicted_total_cost) chosen = c.get();
  }
  while (chosen->step()) {
  }
  return finalize(config, dataset, draws, store, std::move(ledger), *chosen, true, chosen->stop_reason());
}

MCALResult run(const MCALConfig& config, const Dataset& dataset, Oracle& oracle) {
  if (config.learners.size() != 1) return run_multi_candidate(config, dataset, oracle);
  config.validate();
  dataset.validate();
  const SharedDraws draws = draw_initial_sets(config, dataset);
  LabelStore store(dataset, oracle);
  RunLedger ledger;
  store.labels(draws.test);

  auto spec = config.learners.front();
  spec.seed = derive_seed(config.seed, 100);
  Campaign campaign(config, spec, dataset, draws, store, ledger);
  campaign.start();
  while (campaign.step()) {
  }
  return finalize(config, dataset, draws, store, std::move(ledger), campaign, true, campaign.stop_reason());
}

MCALResult run_fixed_delta(const MCALConfig& config, const Dataset& dataset, Oracle& oracle, std::size_t delta) {
  config.validate();
  dataset.validate();
  if (delta < 1) throw Error(ErrorKind::InvalidRange, "delta must be >= 1");
  const SharedDraws draws = draw_initial_sets(config, dataset);
  LabelStore store(dataset, oracle);
  RunLedger ledger;
  store.labels(draws.test);

  auto spec = config.learners.front();
  spec.seed = derive_seed(config.seed, 100);
  Campaign campaign(config, spec, dataset, draws, store, ledger);
  campaign.start();
  std::string reason;
  while (true) {
    const double top = config.theta_grid.values.back();
    const auto measured = planner::predict_theta_star(campaign.measured_models(), campaign.b_size(), dataset.size(),
                                                      config.eps_bound, draws.test.size());
    if (measured.theta == top) {
      reason = "target_met";
      break;
    }
    if (campaign.b_size() >= campaign.cap()) {
      reason = "pool_exhausted";
      break;
    }
    campaign.acquire_and_train(std::min(delta, campaign.cap() - campaign.b_size()));
  }
  return finalize(config, dataset, draws, store, std::move(ledger), campaign, false, reason);
}

ErrorReport evaluate_result(const MCALResult& result, const Dataset& dataset) {
  const auto& a = result.assignment;
  if (a.provenance.size() != dataset.size() || a.labels.size() != dataset.size()) {
    throw Error(ErrorKind::PartitionViolation, "assignment does not cover the dataset");
  }
  ErrorReport rep;
  rep.x_size = dataset.size();
  for (std::size_t idx = 0; idx < dataset.size(); ++idx) {
    if (a.labels[idx] < 0) throw Error(ErrorKind::PartitionViolation, "item " + std::to_string(idx) + " unlabeled");
    if (a.provenance[idx] == Provenance::Classifier) {
      ++rep.s_size;
      if (a.labels[idx] != dataset.true_labels[idx]) ++rep.s_errors;
    } else if (a.labels[idx] != dataset.true_labels[idx]) {
      throw Error(ErrorKind::PartitionViolation, "human label differs from ground truth");
    }
  }
  rep.error_on_s = rep.s_size == 0 ? 0.0 : static_cast<double>(rep.s_errors) / static_cast<double>(rep.s_size);
  rep.overall_error = costing::overall_error(rep.x_size, rep.s_size, rep.error_on_s);
  if (rep.s_size != result.s_size || rep.overall_error != result.measured_overall_error) {
    throw Error(ErrorKind::PartitionViolation, "recomputed errors disagree with the result");
  }
  return rep;
}

}  // namespace mcal
