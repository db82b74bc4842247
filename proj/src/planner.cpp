#include "mcal/planner.hpp"

#include <algorithm>
#include <cmath>

#include "mcal/error.hpp"
#include "mcal/selection.hpp"

namespace mcal::planner {

ThetaGrid ThetaGrid::uniform(double step) {
  if (!(step > 0.0 && step <= 1.0)) throw Error(ErrorKind::InvalidParams, "theta step must be in (0, 1]");
  ThetaGrid grid;
  const auto count = static_cast<int>(std::floor(1.0 / step + 1e-9));
  for (int i = 1; i <= count; ++i) grid.values.push_back(std::min(1.0, std::round(i * step * 1e12) / 1e12));
  if (grid.values.back() < 1.0 - 1e-12) grid.values.push_back(1.0);
  grid.values.back() = 1.0;
  return grid;
}

void ThetaGrid::validate() const {
  if (values.empty()) throw Error(ErrorKind::InvalidParams, "theta grid is empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0 && values[i] <= 1.0)) throw Error(ErrorKind::InvalidParams, "theta outside (0, 1]");
    if (i > 0 && !(values[i] > values[i - 1])) throw Error(ErrorKind::InvalidParams, "theta grid not ascending");
  }
}

ThetaChoice predict_theta_star(const PerThetaModels& models, std::size_t b, std::size_t x_size, double eps_bound,
                               std::size_t test_size) {
  if (x_size == 0 || b + test_size > x_size) throw Error(ErrorKind::InvalidRange, "b + |T| exceeds x_size");
  const std::size_t pool = x_size - test_size - b;
  // Independent per-theta fits may cross, so no monotonicity is assumed.
  for (std::size_t i = models.thetas.size(); i-- > 0;) {
    const double theta = models.thetas[i];
    const auto s = selection::fraction_count(theta, pool);
    const double err = static_cast<double>(s) / static_cast<double>(x_size) *
                       curve::predict_error(models.fits[i].model, static_cast<double>(std::max<std::size_t>(b, 1)));
    if (err < eps_bound) return {theta, err};
  }
  return {0.0, 0.0};
}

LabelingPlan predict_total_cost(const PerThetaModels& models, const PlanContext& ctx, std::size_t b) {
  if (b < ctx.b_current) throw Error(ErrorKind::InvalidRange, "b < b_current");
  if (b > ctx.b_cap()) throw Error(ErrorKind::InvalidRange, "b exceeds x_size - |T|");
  const auto choice = predict_theta_star(models, b, ctx.x_size, ctx.eps_bound, ctx.test_size);
  LabelingPlan plan;
  plan.b_opt = b;
  plan.theta_star = choice.theta;
  plan.s_star_size = selection::fraction_count(choice.theta, ctx.pool_after(b));
  plan.predicted_overall_error = choice.predicted_error;
  plan.delta_used = ctx.delta;
  plan.predicted_training_cost = costing::predict_cumulative_training_cost(ctx.cost_model, ctx.b_current,
                                                                           ctx.past_training_cost, b, ctx.delta);
  plan.predicted_total_cost =
      costing::total_cost(ctx.x_size, plan.s_star_size, ctx.human_rate, plan.predicted_training_cost).total;
  return plan;
}

LabelingPlan search_b(const PerThetaModels& models, const PlanContext& ctx, std::size_t b_lo, std::size_t b_hi,
                      std::size_t step) {
  if (step < 1) throw Error(ErrorKind::InvalidRange, "search step must be >= 1");
  if (b_lo > b_hi) throw Error(ErrorKind::InvalidRange, "empty b search range");
  std::optional<LabelingPlan> best;
  const auto consider = [&](std::size_t b) {
    auto plan = predict_total_cost(models, ctx, b);
    if (!best || plan.predicted_total_cost < best->predicted_total_cost) best = plan;
  };
  for (std::size_t b = b_lo; b <= b_hi; b += step) consider(b);
  if ((b_hi - b_lo) % step != 0) consider(b_hi);
  return *best;
}

LabelingPlan find_b_opt(const PerThetaModels& models, const PlanContext& ctx, std::size_t search_step) {
  return search_b(models, ctx, ctx.b_current, ctx.b_cap(), search_step);
}

LabelingPlan find_b_opt_refined(const PerThetaModels& models, const PlanContext& ctx, std::size_t coarse_step) {
  const auto coarse = find_b_opt(models, ctx, coarse_step);
  const std::size_t fine = std::max<std::size_t>(1, coarse_step / 10);
  if (fine == coarse_step) return coarse;
  const std::size_t lo = coarse.b_opt > ctx.b_current + coarse_step ? coarse.b_opt - coarse_step : ctx.b_current;
  const std::size_t hi = std::min(ctx.b_cap(), coarse.b_opt + coarse_step);
  const auto refined = search_b(models, ctx, lo, hi, fine);
  if (refined.predicted_total_cost < coarse.predicted_total_cost ||
      (refined.predicted_total_cost == coarse.predicted_total_cost && refined.b_opt < coarse.b_opt)) {
    return refined;
  }
  return coarse;
}

bool is_stable(Money c_star_prev, Money c_star_new, double threshold) {
  const double next = c_star_new.dollars();
  const double diff = std::abs(next - c_star_prev.dollars());
  if (next == 0.0) return diff == 0.0;
  return diff / std::abs(next) < threshold;
}

std::size_t adapt_delta(const PerThetaModels& models, const PlanContext& ctx, std::size_t b_opt, std::size_t n_min,
                        double beta, Money c_star) {
  if (b_opt <= ctx.b_current) throw Error(ErrorKind::InvalidRange, "b_opt must exceed b_current");
  if (n_min < 1) throw Error(ErrorKind::InvalidRange, "n_min must be >= 1");
  const std::size_t remaining = b_opt - ctx.b_current;
  const double envelope = c_star.dollars() * (1.0 + beta);
  for (std::size_t n = n_min; n <= remaining; ++n) {
    PlanContext trial = ctx;
    trial.delta = (remaining + n - 1) / n;
    if (predict_total_cost(models, trial, b_opt).predicted_total_cost.dollars() < envelope) return trial.delta;
  }
  return ctx.delta;
}

}  // namespace mcal::planner
