#pragma once

// The min-cost labeling campaign: test-set and seed labeling, the
// active-learning/refit loop, stabilization-gated batch adaptation,
// termination, and the final classifier/human split of the dataset.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mcal/costing.hpp"
#include "mcal/curve.hpp"
#include "mcal/learner.hpp"
#include "mcal/money.hpp"
#include "mcal/planner.hpp"
#include "mcal/selection.hpp"
#include "mcal/simworld.hpp"

namespace mcal {

struct MCALConfig {
  double eps_bound = 0.05;
  double test_fraction = 0.05;
  double seed_fraction = 0.01;
  double stabilization_threshold = 0.05;
  double beta = 0.10;
  std::size_t n_min = 3;
  planner::ThetaGrid theta_grid = planner::ThetaGrid::uniform(0.05);
  selection::Metric metric = selection::Metric::Margin;
  std::vector<learner::LearnerSpec> learners;
  Money human_rate = Money::from_micros(40000);
  std::uint64_t seed = 0;

  /// Throws ConfigError.
  void validate() const;
};

/// Test set and seed batch, drawn once per campaign and shared by every
/// candidate learner.
struct SharedDraws {
  std::vector<std::size_t> test;  // ascending
  std::vector<std::size_t> seed;  // ascending, disjoint from test
};

/// Throws DatasetTooSmall.
SharedDraws draw_initial_sets(const MCALConfig& config, const Dataset& dataset);

/// Oracle front end that hands out cached labels for items some candidate
/// already paid for.
class LabelStore {
 public:
  LabelStore(const Dataset& dataset, Oracle& oracle) : dataset_(dataset), oracle_(oracle) {}

  std::vector<int> labels(std::span<const std::size_t> indices);
  bool is_labeled(std::size_t index) const { return oracle_.is_labeled(index); }
  Money spent() const { return oracle_.dollars_accrued(); }
  Oracle& oracle() { return oracle_; }

 private:
  const Dataset& dataset_;
  Oracle& oracle_;
};

struct IterationRecord {
  std::size_t iteration = 0;  // chronological across candidates
  std::string learner;
  std::size_t b_size = 0;
  std::size_t delta = 0;
  std::vector<double> theta_errors;              // measured on T, grid-aligned
  std::vector<curve::FitReport> fits;            // grid-aligned; refit on full history
  double cost_coefficient = 0.0;                 // fitted k, dollars per sample-pass
  Money iter_training_cost;
  Money cum_training_cost;                       // this candidate
  Money c_star;
  std::size_t b_opt = 0;
  double theta_star = 0.0;
  bool stable = false;
};

struct RunLedger {
  std::vector<IterationRecord> iterations;
  costing::CostLedger costs;  // chronological, all candidates
};

enum class Provenance : std::uint8_t { HumanTest, HumanTrain, HumanResidual, Classifier };

std::string_view to_string(Provenance p);

struct LabelAssignment {
  std::vector<Provenance> provenance;  // per dataset row
  std::vector<int> labels;             // label delivered for each row
};

struct MCALResult {
  std::string learner;
  std::size_t final_b = 0;
  double theta_star = 0.0;
  std::size_t s_size = 0;
  std::size_t test_size = 0;
  std::size_t x_size = 0;
  costing::CostBreakdown cost;
  Money test_set_cost;
  Money full_human_cost;
  double measured_error_s = 0.0;
  double measured_overall_error = 0.0;
  bool infeasible = false;  // classifier ended up labeling nothing
  std::string stop_reason;
  LabelAssignment assignment;
  RunLedger ledger;
};

/// One candidate learner's view of the campaign: its own training set,
/// measurements, fitted models and stopping state.
class Campaign {
 public:
  Campaign(const MCALConfig& config, learner::LearnerSpec spec, const Dataset& dataset, const SharedDraws& draws,
           LabelStore& store, RunLedger& ledger);

  /// Labels the seed batch, trains, measures and plans (iteration 0).
  void start();
  /// Decides whether to stop; otherwise acquires the next batch, retrains,
  /// measures and plans. Returns false once finished.
  bool step();
  /// Acquires `count` most-informative pool items, retrains and measures,
  /// with no planning or stopping logic (fixed-batch active learning).
  void acquire_and_train(std::size_t count);

  bool finished() const { return finished_; }
  bool stable_seen() const { return stable_seen_; }
  const std::string& stop_reason() const { return stop_reason_; }
  const learner::LearnerSpec& spec() const { return spec_; }
  std::size_t b_size() const { return train_.size(); }
  const std::vector<std::size_t>& training_set() const { return train_; }
  const std::vector<double>& theta_errors() const { return theta_errors_; }
  const std::optional<planner::LabelingPlan>& plan() const { return plan_; }
  Money training_cost() const { return training_cost_; }
  const learner::TrainedModel& model() const { return *model_; }

  /// Grid-aligned fits on the full measurement history: one point gives a
  /// flat curve, two a power law, three or more the truncated law.
  planner::PerThetaModels fit_models() const;
  planner::PlanContext context() const;
  /// Per-theta flat models built from the latest test measurements.
  planner::PerThetaModels measured_models() const;

  std::size_t cap() const;

 private:
  void train_and_measure(std::size_t batch);
  void plan_and_record();
  void finish(std::string reason);

  const MCALConfig& config_;
  learner::LearnerSpec spec_;
  const Dataset& dataset_;
  const SharedDraws& draws_;
  LabelStore& store_;
  RunLedger& ledger_;

  std::vector<std::size_t> train_;
  std::vector<int> train_labels_;
  std::vector<bool> in_train_;
  std::shared_ptr<const learner::TrainedModel> model_;
  std::vector<double> theta_errors_;
  std::vector<std::vector<curve::CurveSample>> history_;  // per theta
  std::vector<costing::CostObservation> cost_history_;
  Money training_cost_;
  std::size_t seed_size_ = 0;
  std::size_t delta_ = 0;
  std::optional<planner::LabelingPlan> plan_;
  std::optional<Money> c_old_;
  bool stable_seen_ = false;
  bool stable_now_ = false;
  bool finished_ = false;
  std::string stop_reason_;
};

/// Runs the campaign; a single candidate takes the plain loop, several take
/// the architecture-selection path. Throws DatasetTooSmall / ConfigError.
MCALResult run(const MCALConfig& config, const Dataset& dataset, Oracle& oracle);

/// Always uses the architecture-selection path: every candidate runs until
/// its models stabilize (or it stops), then the one with the lowest C*
/// continues alone.
MCALResult run_multi_candidate(const MCALConfig& config, const Dataset& dataset, Oracle& oracle);

/// Plain active learning with a fixed batch size, seeded with the shared
/// seed batch, stopped once the measured errors allow the classifier to label
/// the whole remaining pool (or the pool runs out). Uses the first learner.
MCALResult run_fixed_delta(const MCALConfig& config, const Dataset& dataset, Oracle& oracle, std::size_t delta);

struct ErrorReport {
  std::size_t x_size = 0;
  std::size_t s_size = 0;
  std::size_t s_errors = 0;
  double error_on_s = 0.0;
  double overall_error = 0.0;
};

/// Recomputes errors against ground truth. Throws PartitionViolation if the
/// assignment does not cover the dataset or the error identity fails.
ErrorReport evaluate_result(const MCALResult& result, const Dataset& dataset);

}  // namespace mcal
