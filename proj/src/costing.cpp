#include "mcal/costing.hpp"

#include <algorithm>
#include <ostream>

#include "mcal/error.hpp"

namespace mcal::costing {

TrainingCostModel fit_cost_coefficient(std::span<const CostObservation> observations) {
  double cross = 0.0;
  double square = 0.0;
  for (const auto& obs : observations) {
    if (obs.train_size < 1) throw Error(ErrorKind::InsufficientData, "observation with train_size 0");
    if (obs.measured_cost < Money{}) throw Error(ErrorKind::InvalidRange, "negative measured cost");
    const double n = static_cast<double>(obs.train_size);
    cross += obs.measured_cost.dollars() * n;
    square += n * n;
  }
  if (square == 0.0) throw Error(ErrorKind::InsufficientData, "no cost observations");
  return {std::max(0.0, cross / square)};
}

Money run_cost(const TrainingCostModel& model, std::size_t train_size) {
  return Money::from_dollars(model.k * static_cast<double>(train_size));
}

Money predict_cumulative_training_cost(const TrainingCostModel& model, std::size_t b_current,
                                       Money past_cost, std::size_t b_target, std::size_t delta) {
  if (b_target < b_current) throw Error(ErrorKind::InvalidRange, "b_target < b_current");
  if (delta < 1) throw Error(ErrorKind::InvalidRange, "delta must be >= 1");
  const std::size_t remaining = b_target - b_current;
  const std::size_t steps = (remaining + delta - 1) / delta;
  // sum_{m=1..steps} min(b_current + m*delta, b_target)
  double sample_passes = 0.0;
  if (steps > 0) {
    const double full = static_cast<double>(steps - 1);
    sample_passes = full * static_cast<double>(b_current) +
                    static_cast<double>(delta) * full * (full + 1.0) / 2.0 +
                    static_cast<double>(b_target);
  }
  return past_cost + Money::from_dollars(model.k * sample_passes);
}

double closed_form_training_cost(const TrainingCostModel& model, std::size_t b, std::size_t delta) {
  if (delta < 1) throw Error(ErrorKind::InvalidRange, "delta must be >= 1");
  const double size = static_cast<double>(b);
  return model.k * size * (size / static_cast<double>(delta) + 1.0);
}

CostBreakdown total_cost(std::size_t x_size, std::size_t s_star_size, Money human_rate,
                         Money training_cost) {
  if (s_star_size > x_size) throw Error(ErrorKind::InvalidRange, "s_star_size > x_size");
  if (human_rate < Money{} || training_cost < Money{}) {
    throw Error(ErrorKind::InvalidRange, "negative rate or training cost");
  }
  CostBreakdown out;
  out.human_cost = human_rate * static_cast<std::int64_t>(x_size - s_star_size);
  out.training_cost = training_cost;
  out.total = out.human_cost + out.training_cost;
  return out;
}

double overall_error(std::size_t x_size, std::size_t s_size, double error_on_s) {
  if (x_size == 0) throw Error(ErrorKind::InvalidRange, "x_size must be > 0");
  if (s_size > x_size) throw Error(ErrorKind::InvalidRange, "s_size > x_size");
  if (!(error_on_s >= 0.0 && error_on_s <= 1.0)) throw Error(ErrorKind::InvalidRange, "error_on_s outside [0, 1]");
  return static_cast<double>(s_size) / static_cast<double>(x_size) * error_on_s;
}

void CostLedger::append(std::size_t b_size, std::size_t delta, Money iter_training_cost,
                        Money cum_human_cost) {
  LedgerRow row;
  row.iteration = rows_.size();
  row.b_size = b_size;
  row.delta = delta;
  row.iter_training_cost = iter_training_cost;
  row.cum_training_cost = cumulative_training_cost() + iter_training_cost;
  row.cum_human_cost = cum_human_cost;
  rows_.push_back(row);
}

Money CostLedger::cumulative_training_cost() const {
  return rows_.empty() ? Money{} : rows_.back().cum_training_cost;
}

std::vector<CostObservation> CostLedger::observations() const {
  std::vector<CostObservation> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) out.push_back({r.b_size, r.iter_training_cost});
  return out;
}

void CostLedger::write_csv(std::ostream& out) const {
  out << "iteration,b_size,delta,iter_training_cost,cum_training_cost,cum_human_cost\n";
  for (const auto& r : rows_) {
    out << r.iteration << ',' << r.b_size << ',' << r.delta << ',' << r.iter_training_cost.to_string()
        << ',' << r.cum_training_cost.to_string() << ',' << r.cum_human_cost.to_string() << '\n';
  }
}

}  // namespace mcal::costing
