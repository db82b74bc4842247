#include "mcal/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mcal/error.hpp"

namespace mcal::selection {

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::Margin: return "margin";
    case Metric::LeastConfidence: return "least_confidence";
    case Metric::Entropy: return "entropy";
  }
  return "margin";
}

Metric parse_metric(std::string_view name) {
  if (name == "margin") return Metric::Margin;
  if (name == "least_confidence") return Metric::LeastConfidence;
  if (name == "entropy") return Metric::Entropy;
  throw Error(ErrorKind::ConfigError, "unknown metric '" + std::string(name) + "'");
}

void validate_distribution(std::span<const double> p) {
  if (p.size() < 2) throw Error(ErrorKind::InvalidDistribution, "need at least 2 classes");
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorKind::InvalidDistribution, "probability outside [0, 1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-6) throw Error(ErrorKind::InvalidDistribution, "probabilities do not sum to 1");
}

std::size_t argmax(std::span<const double> p) {
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

double score(Metric metric, std::span<const double> p) {
  validate_distribution(p);
  switch (metric) {
    case Metric::Margin: {
      double top1 = 0.0;
      double top2 = 0.0;
      for (double v : p) {
        if (v > top1) {
          top2 = top1;
          top1 = v;
        } else if (v > top2) {
          top2 = v;
        }
      }
      return 1.0 - (top1 - top2);
    }
    case Metric::LeastConfidence:
      return 1.0 - *std::max_element(p.begin(), p.end());
    case Metric::Entropy: {
      double h = 0.0;
      for (double v : p) {
        if (v > 0.0) h -= v * std::log(v);
      }
      return h;
    }
  }
  return 0.0;
}

std::size_t fraction_count(double theta, std::size_t n) {
  if (!(theta >= 0.0)) return 0;
  const double raw = theta * static_cast<double>(n);
  const auto count = static_cast<std::size_t>(std::floor(raw + 1e-9 * std::max(1.0, raw)));
  return std::min(count, n);
}

std::vector<std::size_t> confidence_order(std::span<const InformativenessScore> pool) {
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (pool[a].score != pool[b].score) return pool[a].score < pool[b].score;
    return pool[a].item_index < pool[b].item_index;
  });
  return order;
}

std::vector<std::size_t> select_batch(std::span<const InformativenessScore> pool, std::size_t delta) {
  if (delta > pool.size()) {
    throw Error(ErrorKind::DeltaTooLarge,
                "delta " + std::to_string(delta) + " exceeds pool size " + std::to_string(pool.size()));
  }
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto more_informative = [&](std::size_t a, std::size_t b) {
    if (pool[a].score != pool[b].score) return pool[a].score > pool[b].score;
    return pool[a].item_index < pool[b].item_index;
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(delta), order.end(),
                    more_informative);
  std::vector<std::size_t> out;
  out.reserve(delta);
  for (std::size_t i = 0; i < delta; ++i) out.push_back(pool[order[i]].item_index);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::size_t> select_confident_subset(std::span<const InformativenessScore> pool, double theta) {
  const std::size_t count = fraction_count(theta, pool.size());
  const auto order = confidence_order(pool);
  std::vector<std::size_t> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(pool[order[i]].item_index);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<double> estimate_theta_errors(std::span<const TestPrediction> test,
                                          std::span<const double> thetas, Metric metric) {
  if (test.empty()) throw Error(ErrorKind::EmptyTestSet, "test set is empty");
  std::vector<InformativenessScore> scores;
  scores.reserve(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) scores.push_back({i, score(metric, test[i].probs)});
  const auto order = confidence_order(scores);
  // wrong_prefix[j] = misclassified count among the j most confident items
  std::vector<std::size_t> wrong_prefix(order.size() + 1, 0);
  for (std::size_t j = 0; j < order.size(); ++j) {
    const auto& t = test[order[j]];
    wrong_prefix[j + 1] = wrong_prefix[j] + (t.predicted != t.truth ? 1 : 0);
  }
  std::vector<double> out;
  out.reserve(thetas.size());
  for (double theta : thetas) {
    const std::size_t count = fraction_count(theta, test.size());
    out.push_back(count == 0 ? 0.0
                             : static_cast<double>(wrong_prefix[count]) / static_cast<double>(count));
  }
  return out;
}

double estimate_theta_error(std::span<const TestPrediction> test, double theta, Metric metric) {
  const double thetas[] = {theta};
  return estimate_theta_errors(test, thetas, metric).front();
}

}  // namespace mcal::selection
