#pragma once

// Classifier contract plus two implementations: softmax regression trained
// by minibatch SGD, and a synthetic learner whose error follows a given
// learning curve exactly in expectation.

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcal/curve.hpp"
#include "mcal/money.hpp"
#include "mcal/selection.hpp"
#include "mcal/simworld.hpp"

namespace mcal::learner {

enum class FeatureMap { Raw, Fourier };

struct SyntheticCurve {
  curve::TruncatedPowerLawModel curve;
  /// Errors concentrate among low-confidence items: the most confident theta
  /// fraction misclassifies at rate error * theta^q.
  double q = 2.0;
  std::uint64_t noise_seed = 0;
};

struct LearnerSpec {
  std::string name = "softmax";
  /// Price of one sample in one training run (a run is a fixed number of epochs).
  Money cost_per_sample_pass = Money::from_micros(300);
  int epochs = 50;
  int minibatch = 32;
  double base_lr = 0.5;
  /// Epoch indices at which the learning rate is multiplied by 0.1.
  std::vector<int> lr_drops{20, 30, 40, 45};
  double l2 = 1e-4;
  std::uint64_t seed = 0;
  FeatureMap feature_map = FeatureMap::Raw;
  int fourier_width = 0;
  double fourier_scale = 1.0;
  /// When present the learner is synthetic and the SGD fields are unused.
  std::optional<SyntheticCurve> synthetic;

  /// Throws ConfigError.
  void validate() const;
};

/// Drops at 40%, 60%, 80% and 90% of the epoch budget.
std::vector<int> scaled_lr_drops(int epochs);

/// Three stand-ins with distinct cost/capacity tradeoffs: "cnn18" (raw
/// features), "resnet18" (64 Fourier features), "resnet50" (256 Fourier
/// features), priced at 0.00007 / 0.0003 / 0.0009 dollars per sample.
LearnerSpec architecture_preset(const std::string& name);

struct Prediction {
  selection::ProbVector probs;
  int label = 0;
};

/// An immutable trained classifier D(B).
class TrainedModel {
 public:
  virtual ~TrainedModel() = default;

  /// Predictions for dataset rows `indices`.
  virtual std::vector<Prediction> predict(const Dataset& data, std::span<const std::size_t> indices) const = 0;

  const std::string& learner_name() const { return name_; }
  std::size_t training_size() const { return training_size_; }
  Money training_cost() const { return cost_; }

 protected:
  TrainedModel(std::string name, std::size_t training_size, Money cost)
      : name_(std::move(name)), training_size_(training_size), cost_(cost) {}

 private:
  std::string name_;
  std::size_t training_size_ = 0;
  Money cost_;
};

class SoftmaxModel final : public TrainedModel {
 public:
  SoftmaxModel(std::string name, std::size_t training_size, Money cost, int classes, Eigen::VectorXd mean,
               Eigen::VectorXd scale, Eigen::MatrixXd projection, Eigen::VectorXd phase, Eigen::MatrixXd weights,
               std::vector<double> loss_history);

  std::vector<Prediction> predict(const Dataset& data, std::span<const std::size_t> indices) const override;

  /// Softmax rows for an arbitrary feature matrix. Throws DimensionMismatch.
  std::vector<selection::ProbVector> predict_proba(const FeatureMatrix& features) const;

  /// Design matrix after standardisation and the feature map (no bias column).
  Eigen::MatrixXd transform(const FeatureMatrix& features) const;

  std::size_t input_dim() const { return static_cast<std::size_t>(mean_.size()); }
  int class_count() const { return classes_; }
  /// (features + 1) x classes; last row is the bias.
  const Eigen::MatrixXd& weights() const { return weights_; }
  /// Mean training loss at the end of each epoch.
  const std::vector<double>& loss_history() const { return loss_history_; }

 private:
  int classes_;
  Eigen::VectorXd mean_;
  Eigen::VectorXd scale_;
  Eigen::MatrixXd projection_;  // empty for raw features
  Eigen::VectorXd phase_;
  Eigen::MatrixXd weights_;
  std::vector<double> loss_history_;
};

/// Minibatch SGD on softmax cross-entropy. Deterministic in (spec, inputs).
/// Throws EmptyTrainingSet, LabelOutOfRange, DimensionMismatch.
SoftmaxModel train(const LearnerSpec& spec, const FeatureMatrix& features, std::span<const int> labels,
                   int class_count);

/// Mean cross-entropy over rows of `design` (bias column appended
/// internally) plus l2/2 * ||W||^2 on the non-bias rows, and its gradient.
struct LossAndGradient {
  double loss = 0.0;
  Eigen::MatrixXd gradient;
};
LossAndGradient softmax_loss_gradient(const Eigen::MatrixXd& weights, const Eigen::MatrixXd& design,
                                      std::span<const int> labels, double l2);

class SyntheticModel final : public TrainedModel {
 public:
  SyntheticModel(std::string name, std::size_t training_size, Money cost, SyntheticCurve curve);

  std::vector<Prediction> predict(const Dataset& data, std::span<const std::size_t> indices) const override;

  /// predict_error(curve, training_size)
  double error_rate() const { return error_rate_; }

 private:
  SyntheticCurve curve_;
  double error_rate_;
};

/// Throws EmptyTrainingSet.
SyntheticModel synthetic_train(const LearnerSpec& spec, const Dataset& pool_truth,
                               std::span<const std::size_t> train_indices);

/// Trains whichever learner `spec` describes on dataset rows `indices`.
std::shared_ptr<const TrainedModel> fit(const LearnerSpec& spec, const Dataset& data,
                                        std::span<const std::size_t> indices, std::span<const int> labels);

}  // namespace mcal::learner
