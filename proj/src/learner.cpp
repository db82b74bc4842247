#include "mcal/learner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "mcal/error.hpp"
#include "mcal/random.hpp"

namespace mcal::learner {

void LearnerSpec::validate() const {
  if (name.empty()) throw Error(ErrorKind::ConfigError, "learner name is empty");
  if (cost_per_sample_pass < Money{}) throw Error(ErrorKind::ConfigError, name + ": cost_per_sample_pass < 0");
  if (synthetic) {
    if (!(synthetic->q >= 1.0)) throw Error(ErrorKind::ConfigError, name + ": synthetic q must be >= 1");
    const auto& c = synthetic->curve;
    if (!(c.alpha > 0.0) || !(c.gamma >= 0.0) || !(c.inv_k >= 0.0)) {
      throw Error(ErrorKind::ConfigError, name + ": synthetic curve needs alpha > 0, gamma >= 0, inv_k >= 0");
    }
    return;
  }
  if (epochs < 1) throw Error(ErrorKind::ConfigError, name + ": epochs must be >= 1");
  if (minibatch < 1) throw Error(ErrorKind::ConfigError, name + ": minibatch must be >= 1");
  if (!(base_lr > 0.0)) throw Error(ErrorKind::ConfigError, name + ": base_lr must be > 0");
  if (!(l2 >= 0.0)) throw Error(ErrorKind::ConfigError, name + ": l2 must be >= 0");
  if (feature_map == FeatureMap::Fourier && fourier_width < 1) {
    throw Error(ErrorKind::ConfigError, name + ": fourier_width must be >= 1");
  }
}

std::vector<int> scaled_lr_drops(int epochs) {
  std::vector<int> drops;
  for (int pct : {40, 60, 80, 90}) {
    const int e = epochs * pct / 100;
    if (e > 0 && (drops.empty() || drops.back() != e)) drops.push_back(e);
  }
  return drops;
}

LearnerSpec architecture_preset(const std::string& name) {
  LearnerSpec spec;
  spec.name = name;
  spec.lr_drops = scaled_lr_drops(spec.epochs);
  if (name == "cnn18") {
    spec.cost_per_sample_pass = Money::from_micros(70);
  } else if (name == "resnet18") {
    spec.cost_per_sample_pass = Money::from_micros(300);
    spec.feature_map = FeatureMap::Fourier;
    spec.fourier_width = 64;
  } else if (name == "resnet50") {
    spec.cost_per_sample_pass = Money::from_micros(900);
    spec.feature_map = FeatureMap::Fourier;
    spec.fourier_width = 256;
  } else {
    throw Error(ErrorKind::ConfigError, "unknown architecture preset '" + name + "'");
  }
  return spec;
}

namespace {

// Row-wise softmax in place, shifted by the row max.
void softmax_rows(Eigen::MatrixXd& logits) {
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    logits.row(i) = (logits.row(i).array() - m).exp();
    logits.row(i) /= logits.row(i).sum();
  }
}

Eigen::MatrixXd with_bias(const Eigen::MatrixXd& design) {
  Eigen::MatrixXd out(design.rows(), design.cols() + 1);
  out.leftCols(design.cols()) = design;
  out.col(design.cols()).setOnes();
  return out;
}

}  // namespace

LossAndGradient softmax_loss_gradient(const Eigen::MatrixXd& weights, const Eigen::MatrixXd& design,
                                      std::span<const int> labels, double l2) {
  const Eigen::MatrixXd z = with_bias(design);
  if (weights.rows() != z.cols()) throw Error(ErrorKind::DimensionMismatch, "weights rows != features + 1");
  if (static_cast<std::size_t>(z.rows()) != labels.size()) {
    throw Error(ErrorKind::DimensionMismatch, "design rows != label count");
  }
  const auto n = static_cast<double>(z.rows());
  Eigen::MatrixXd probs = z * weights;
  softmax_rows(probs);
  LossAndGradient out;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const auto y = labels[static_cast<std::size_t>(i)];
    out.loss -= std::log(std::max(probs(i, y), 1e-300));
    probs(i, y) -= 1.0;
  }
  out.loss /= n;
  out.gradient = z.transpose() * probs / n;
  const auto body = weights.rows() - 1;
  out.loss += 0.5 * l2 * weights.topRows(body).squaredNorm();
  out.gradient.topRows(body) += l2 * weights.topRows(body);
  return out;
}

SoftmaxModel::SoftmaxModel(std::string name, std::size_t training_size, Money cost, int classes,
                           Eigen::VectorXd mean, Eigen::VectorXd scale, Eigen::MatrixXd projection,
                           Eigen::VectorXd phase, Eigen::MatrixXd weights, std::vector<double> loss_history)
    : TrainedModel(std::move(name), training_size, cost),
      classes_(classes),
      mean_(std::move(mean)),
      scale_(std::move(scale)),
      projection_(std::move(projection)),
      phase_(std::move(phase)),
      weights_(std::move(weights)),
      loss_history_(std::move(loss_history)) {}

Eigen::MatrixXd SoftmaxModel::transform(const FeatureMatrix& features) const {
  if (features.cols() != mean_.size()) {
    throw Error(ErrorKind::DimensionMismatch, "expected " + std::to_string(mean_.size()) + " features, got " +
                                                  std::to_string(features.cols()));
  }
  Eigen::MatrixXd x = features;
  x.rowwise() -= mean_.transpose();
  x = x.array().rowwise() / scale_.transpose().array();
  if (projection_.size() == 0) return x;
  Eigen::MatrixXd proj = x * projection_;
  proj.rowwise() += phase_.transpose();
  const double amp = std::sqrt(2.0 / static_cast<double>(projection_.cols()));
  return amp * proj.array().cos();
}

std::vector<selection::ProbVector> SoftmaxModel::predict_proba(const FeatureMatrix& features) const {
  std::vector<selection::ProbVector> out;
  if (features.rows() == 0) return out;
  Eigen::MatrixXd probs = with_bias(transform(features)) * weights_;
  softmax_rows(probs);
  out.reserve(static_cast<std::size_t>(probs.rows()));
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    auto& row = out.emplace_back(static_cast<std::size_t>(classes_));
    for (int c = 0; c < classes_; ++c) row[static_cast<std::size_t>(c)] = probs(i, c);
  }
  return out;
}

std::vector<Prediction> SoftmaxModel::predict(const Dataset& data, std::span<const std::size_t> indices) const {
  FeatureMatrix rows(static_cast<Eigen::Index>(indices.size()), data.features.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    rows.row(static_cast<Eigen::Index>(i)) = data.features.row(static_cast<Eigen::Index>(indices[i]));
  }
  auto probs = predict_proba(rows);
  std::vector<Prediction> out;
  out.reserve(probs.size());
  for (auto& p : probs) {
    const int label = static_cast<int>(selection::argmax(p));
    out.push_back({std::move(p), label});
  }
  return out;
}

SoftmaxModel train(const LearnerSpec& spec, const FeatureMatrix& features, std::span<const int> labels,
                   int class_count) {
  spec.validate();
  if (spec.synthetic) throw Error(ErrorKind::ConfigError, spec.name + " is a synthetic learner");
  const auto n = static_cast<std::size_t>(features.rows());
  if (n == 0) throw Error(ErrorKind::EmptyTrainingSet, "no training rows");
  if (labels.size() != n) throw Error(ErrorKind::DimensionMismatch, "label count != feature rows");
  if (features.cols() < 1) throw Error(ErrorKind::DimensionMismatch, "need at least one feature");
  if (class_count < 2) throw Error(ErrorKind::LabelOutOfRange, "class_count must be >= 2");
  for (int y : labels) {
    if (y < 0 || y >= class_count) throw Error(ErrorKind::LabelOutOfRange, "label " + std::to_string(y));
  }

  const auto d = features.cols();
  Eigen::VectorXd mean = features.colwise().mean().transpose();
  Eigen::VectorXd scale(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double var = (features.col(j).array() - mean(j)).square().mean();
    scale(j) = var > 1e-24 ? std::sqrt(var) : 1.0;
  }

  Rng rng(derive_seed(spec.seed, 0x6d63616cULL));
  Eigen::MatrixXd projection;
  Eigen::VectorXd phase;
  if (spec.feature_map == FeatureMap::Fourier) {
    const Eigen::Index width = spec.fourier_width;
    projection.resize(d, width);
    phase.resize(width);
    for (Eigen::Index j = 0; j < width; ++j) {
      for (Eigen::Index i = 0; i < d; ++i) projection(i, j) = rng.normal() * spec.fourier_scale;
      phase(j) = rng.uniform() * 2.0 * std::numbers::pi;
    }
  }

  // Build the model shell first so transform() is shared with prediction.
  SoftmaxModel shell(spec.name, n, spec.cost_per_sample_pass * static_cast<std::int64_t>(n), class_count, mean,
                     scale, projection, phase, Eigen::MatrixXd(), {});
  const Eigen::MatrixXd design = shell.transform(features);
  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(design.cols() + 1, class_count);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto batch = static_cast<std::size_t>(spec.minibatch);
  std::vector<double> losses;
  losses.reserve(static_cast<std::size_t>(spec.epochs));
  Eigen::MatrixXd batch_x;
  std::vector<int> batch_y;
  for (int epoch = 0; epoch < spec.epochs; ++epoch) {
    const auto drops = std::count_if(spec.lr_drops.begin(), spec.lr_drops.end(), [&](int e) { return e <= epoch; });
    const double lr = spec.base_lr * std::pow(0.1, static_cast<double>(drops));
    rng.shuffle(order);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(n, start + batch);
      batch_x.resize(static_cast<Eigen::Index>(stop - start), design.cols());
      batch_y.resize(stop - start);
      for (std::size_t i = start; i < stop; ++i) {
        batch_x.row(static_cast<Eigen::Index>(i - start)) = design.row(static_cast<Eigen::Index>(order[i]));
        batch_y[i - start] = labels[order[i]];
      }
      weights -= lr * softmax_loss_gradient(weights, batch_x, batch_y, spec.l2).gradient;
    }
    losses.push_back(softmax_loss_gradient(weights, design, labels, spec.l2).loss);
  }
  return SoftmaxModel(spec.name, n, spec.cost_per_sample_pass * static_cast<std::int64_t>(n), class_count,
                      std::move(mean), std::move(scale), std::move(projection), std::move(phase),
                      std::move(weights), std::move(losses));
}

SyntheticModel::SyntheticModel(std::string name, std::size_t training_size, Money cost, SyntheticCurve curve)
    : TrainedModel(std::move(name), training_size, cost),
      curve_(curve),
      error_rate_(curve::predict_error(curve.curve, static_cast<double>(training_size))) {}

std::vector<Prediction> SyntheticModel::predict(const Dataset& data, std::span<const std::size_t> indices) const {
  const int classes = data.class_count;
  // Confidence shrinks with the error rate so a perfect curve yields margin 1.
  const double spread = std::min(1.0, error_rate_ * (curve_.q + 1.0));
  std::vector<Prediction> out;
  out.reserve(indices.size());
  for (std::size_t idx : indices) {
    if (idx >= data.size()) throw Error(ErrorKind::IndexOutOfRange, "index " + std::to_string(idx));
    const std::uint64_t h = derive_seed(curve_.noise_seed, idx);
    // u: the item's rank in confidence (0 = most confident); v: flip draw.
    const double u = unit_interval(mix64(h ^ 1));
    const double v = unit_interval(mix64(h ^ 2));
    const double flip_prob = std::min(1.0, error_rate_ * (curve_.q + 1.0) * std::pow(u, curve_.q));
    const int truth = data.true_labels[idx];
    int label = truth;
    int runner_up = (truth + 1) % classes;
    if (v < flip_prob) {
      const auto shift = 1 + static_cast<int>(mix64(h ^ 3) % static_cast<std::uint64_t>(classes - 1));
      label = (truth + shift) % classes;
      runner_up = truth;
    }
    const double margin_gap = u * spread;  // 1 - (p1 - p2)
    Prediction p;
    p.probs.assign(static_cast<std::size_t>(classes), 0.0);
    p.probs[static_cast<std::size_t>(label)] = 1.0 - margin_gap / 2.0;
    p.probs[static_cast<std::size_t>(runner_up)] = margin_gap / 2.0;
    p.label = label;
    out.push_back(std::move(p));
  }
  return out;
}

SyntheticModel synthetic_train(const LearnerSpec& spec, const Dataset& pool_truth,
                               std::span<const std::size_t> train_indices) {
  if (!spec.synthetic) throw Error(ErrorKind::ConfigError, spec.name + " is not a synthetic learner");
  spec.validate();
  if (train_indices.empty()) throw Error(ErrorKind::EmptyTrainingSet, "no training indices");
  for (std::size_t idx : train_indices) {
    if (idx >= pool_truth.size()) throw Error(ErrorKind::IndexOutOfRange, "index " + std::to_string(idx));
  }
  const std::size_t n = train_indices.size();
  return SyntheticModel(spec.name, n, spec.cost_per_sample_pass * static_cast<std::int64_t>(n), *spec.synthetic);
}

std::shared_ptr<const TrainedModel> fit(const LearnerSpec& spec, const Dataset& data,
                                        std::span<const std::size_t> indices, std::span<const int> labels) {
  if (spec.synthetic) return std::make_shared<SyntheticModel>(synthetic_train(spec, data, indices));
  if (indices.size() != labels.size()) throw Error(ErrorKind::DimensionMismatch, "indices/labels length");
  FeatureMatrix rows(static_cast<Eigen::Index>(indices.size()), data.features.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= data.size()) throw Error(ErrorKind::IndexOutOfRange, "index " + std::to_string(indices[i]));
    rows.row(static_cast<Eigen::Index>(i)) = data.features.row(static_cast<Eigen::Index>(indices[i]));
  }
  return std::make_shared<SoftmaxModel>(train(spec, rows, labels, data.class_count));
}

}  // namespace mcal::learner
