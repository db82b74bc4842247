#pragma once

// Training-cost and total-campaign-cost accounting.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "mcal/money.hpp"

namespace mcal::costing {

/// Dollars per sample per training run (fixed epoch count per run).
struct TrainingCostModel {
  double k = 0.0;
};

struct CostObservation {
  std::size_t train_size = 0;
  Money measured_cost;
};

struct CostBreakdown {
  Money human_cost;
  Money training_cost;
  Money total;
};

/// k = sum(c_i * n_i) / sum(n_i^2), clamped at zero.
TrainingCostModel fit_cost_coefficient(std::span<const CostObservation> observations);

/// Cost of one training run over `train_size` samples.
Money run_cost(const TrainingCostModel& model, std::size_t train_size);

/// Past cost plus one run per future batch while growing from b_current to
/// b_target in steps of delta; the last (possibly partial) batch trains on
/// exactly b_target.
Money predict_cumulative_training_cost(const TrainingCostModel& model, std::size_t b_current,
                                       Money past_cost, std::size_t b_target, std::size_t delta);

/// k * |B| * (|B| / delta + 1): the closed-form constant-delta estimate.
/// For a run seeded at delta that reached |B| = M * delta this is exactly
/// twice the sum of per-run costs k * delta * M (M + 1) / 2.
double closed_form_training_cost(const TrainingCostModel& model, std::size_t b, std::size_t delta);

/// Human cost for everything outside S*, plus training.
CostBreakdown total_cost(std::size_t x_size, std::size_t s_star_size, Money human_rate,
                         Money training_cost);

/// (|S| / |X|) * error_on_s; human labels are exact.
double overall_error(std::size_t x_size, std::size_t s_size, double error_on_s);

struct LedgerRow {
  std::size_t iteration = 0;
  std::size_t b_size = 0;
  std::size_t delta = 0;
  Money iter_training_cost;
  Money cum_training_cost;
  Money cum_human_cost;
};

/// Append-only per-iteration cost record.
class CostLedger {
 public:
  void append(std::size_t b_size, std::size_t delta, Money iter_training_cost, Money cum_human_cost);

  const std::vector<LedgerRow>& rows() const { return rows_; }
  Money cumulative_training_cost() const;
  std::vector<CostObservation> observations() const;

  void write_csv(std::ostream& out) const;

 private:
  std::vector<LedgerRow> rows_;
};

}  // namespace mcal::costing
