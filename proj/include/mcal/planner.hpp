#pragma once

// Predicts the cost-optimal training-set size and classifier-labeled
// fraction from the fitted per-theta learning curves and the training-cost
// model.

#include <cstddef>
#include <optional>
#include <vector>

#include "mcal/costing.hpp"
#include "mcal/curve.hpp"
#include "mcal/money.hpp"

namespace mcal::planner {

struct ThetaGrid {
  std::vector<double> values;

  /// {step, 2*step, ..., 1}; step 0.05 gives the default 20-point grid.
  static ThetaGrid uniform(double step = 0.05);
  /// Throws InvalidParams unless strictly ascending within (0, 1].
  void validate() const;
};

/// One fitted curve per grid theta, index-aligned with `thetas`.
struct PerThetaModels {
  std::vector<double> thetas;
  std::vector<curve::FitReport> fits;
};

struct PlanContext {
  std::size_t x_size = 0;     // |X|, including the test set
  std::size_t test_size = 0;  // |T|; never trained on nor classifier-labeled
  std::size_t b_current = 0;
  Money past_training_cost;
  std::size_t delta = 1;
  Money human_rate;
  double eps_bound = 0.05;
  costing::TrainingCostModel cost_model;

  /// Items still eligible for S after training on b samples.
  std::size_t pool_after(std::size_t b) const { return x_size - test_size - b; }
  std::size_t b_cap() const { return x_size - test_size; }
};

struct ThetaChoice {
  double theta = 0.0;  // 0 means the classifier labels nothing
  double predicted_error = 0.0;
};

struct LabelingPlan {
  std::size_t b_opt = 0;
  double theta_star = 0.0;
  std::size_t s_star_size = 0;
  Money predicted_total_cost;
  Money predicted_training_cost;
  double predicted_overall_error = 0.0;
  std::size_t delta_used = 1;
};

/// Largest grid theta whose predicted overall error
/// floor(theta * (x - |T| - b)) / x * error_theta(b) stays below eps_bound,
/// found by a descending scan.
ThetaChoice predict_theta_star(const PerThetaModels& models, std::size_t b, std::size_t x_size,
                               double eps_bound, std::size_t test_size = 0);

/// Total cost of stopping at b: human labels for X \ S* plus realized and
/// predicted training cost from b_current to b. Throws InvalidRange for b < b_current.
LabelingPlan predict_total_cost(const PerThetaModels& models, const PlanContext& ctx, std::size_t b);

/// Argmin of predict_total_cost over b in {b_lo, b_lo + step, ...} plus b_hi
/// itself; ties go to the smallest b.
LabelingPlan search_b(const PerThetaModels& models, const PlanContext& ctx, std::size_t b_lo, std::size_t b_hi,
                      std::size_t step);

/// search_b over [b_current, x_size - |T|].
LabelingPlan find_b_opt(const PerThetaModels& models, const PlanContext& ctx, std::size_t search_step);

/// Coarse search at `coarse_step`, then one pass at max(1, coarse_step / 10)
/// within one coarse step of the coarse argmin.
LabelingPlan find_b_opt_refined(const PerThetaModels& models, const PlanContext& ctx, std::size_t coarse_step);

/// |c_new - c_prev| / |c_new| < threshold.
bool is_stable(Money c_star_prev, Money c_star_new, double threshold);

/// Smallest N >= n_min whose batch ceil((b_opt - b_current) / N) keeps the
/// predicted cost at b_opt below c_star * (1 + beta); falls back to
/// ctx.delta. Throws InvalidRange unless b_opt > b_current and n_min >= 1.
std::size_t adapt_delta(const PerThetaModels& models, const PlanContext& ctx, std::size_t b_opt, std::size_t n_min,
                        double beta, Money c_star);

}  // namespace mcal::planner
