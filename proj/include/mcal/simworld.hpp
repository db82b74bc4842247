#pragma once

// Datasets, synthetic generators and the simulated human labeling oracle.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mcal/money.hpp"

namespace mcal {

using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Dataset {
  std::string name;
  FeatureMatrix features;  // n x d
  std::vector<int> true_labels;
  int class_count = 0;

  std::size_t size() const { return true_labels.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }

  /// Throws InvalidParams when labels/shape break the dataset invariants.
  void validate() const;
};

bool operator==(const Dataset& a, const Dataset& b);

struct BlobParams {
  int classes = 2;
  int dim = 2;
  int per_class = 100;
  double separation = 4.0;
};

/// Named difficulty tiers: "easy" (separation 8), "medium" (4), "hard" (1.5).
/// Throws InvalidParams for unknown names.
BlobParams blob_preset(const std::string& name);

/// Unit-variance isotropic Gaussian clusters. When classes <= dim the
/// centers sit on a randomly rotated simplex so every pair is exactly
/// `separation` apart; otherwise random centers are scaled to that mean
/// pairwise distance. Rows are shuffled. Throws InvalidParams.
Dataset generate_blobs(const BlobParams& params, std::uint64_t seed);

struct CsvLoad {
  Dataset dataset;
  std::vector<std::string> warnings;
};

/// Reads `f0,...,f{d-1},label`. Throws IoError, EmptyFile, ParseError.
CsvLoad load_csv(const std::string& path);
CsvLoad parse_csv(std::istream& in, const std::string& name);

void save_csv(const Dataset& dataset, std::ostream& out);
/// Throws IoError.
void save_csv(const Dataset& dataset, const std::string& path);

/// Simulated human labeler: always returns ground truth and bills every
/// item exactly once.
class Oracle {
 public:
  explicit Oracle(Money price_per_label) : price_(price_per_label) {}

  /// Throws IndexOutOfRange or AlreadyLabeled; on error nothing is billed.
  std::vector<int> label(const Dataset& dataset, std::span<const std::size_t> indices);

  bool is_labeled(std::size_t index) const { return index < billed_.size() && billed_[index]; }
  Money price_per_label() const { return price_; }
  std::size_t labels_issued() const { return labels_issued_; }
  Money dollars_accrued() const { return dollars_accrued_; }

 private:
  Money price_;
  std::size_t labels_issued_ = 0;
  Money dollars_accrued_;
  std::vector<bool> billed_;
};

}  // namespace mcal
