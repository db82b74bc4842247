#pragma once

// Informativeness scoring and the subset selections built on it. Scores are
// oriented so that higher always means more informative (less confident).

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace mcal::selection {

enum class Metric { Margin, LeastConfidence, Entropy };

std::string_view to_string(Metric metric);
/// Throws ConfigError for unknown names.
Metric parse_metric(std::string_view name);

using ProbVector = std::vector<double>;

/// Throws InvalidDistribution unless p has >= 2 entries in [0, 1] summing to 1 +- 1e-6.
void validate_distribution(std::span<const double> p);

/// margin: 1 - (p1 - p2); least_confidence: 1 - p1; entropy: -sum p ln p.
double score(Metric metric, std::span<const double> p);

std::size_t argmax(std::span<const double> p);

struct InformativenessScore {
  std::size_t item_index = 0;
  double score = 0.0;
};

/// floor(theta * n) with a small guard against representation error
/// (0.3 * 10 must give 3).
std::size_t fraction_count(double theta, std::size_t n);

/// The delta highest-scoring items (ties: lower index first), returned in
/// ascending index order. Throws DeltaTooLarge.
std::vector<std::size_t> select_batch(std::span<const InformativenessScore> pool, std::size_t delta);

/// The floor(theta * |pool|) lowest-scoring items, ascending index order.
std::vector<std::size_t> select_confident_subset(std::span<const InformativenessScore> pool, double theta);

/// Indices of `pool` entries ordered from most confident to least
/// (score ascending, then index ascending).
std::vector<std::size_t> confidence_order(std::span<const InformativenessScore> pool);

struct TestPrediction {
  ProbVector probs;
  int predicted = 0;
  int truth = 0;
};

/// Misclassification rate on the floor(theta * |T|) most confident test
/// items; 0 for an empty subset. Throws EmptyTestSet.
double estimate_theta_error(std::span<const TestPrediction> test, double theta, Metric metric);

/// Same as estimate_theta_error for each theta, ranking the test set once.
std::vector<double> estimate_theta_errors(std::span<const TestPrediction> test,
                                          std::span<const double> thetas, Metric metric);

}  // namespace mcal::selection
