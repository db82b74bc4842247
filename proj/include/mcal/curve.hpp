#pragma once

// Learning-curve models: predicted classifier error as a function of the
// number of human-labeled training samples.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace mcal::curve {

/// Observed errors below this are floored before the log transform.
inline constexpr double kErrorFloor = 1e-4;

struct CurveSample {
  std::size_t train_size = 0;
  double error = 0.0;
};

/// error = alpha * n^-gamma
struct PowerLawModel {
  double alpha = 1.0;
  double gamma = 0.0;
};

/// error = alpha * n^-gamma * exp(-inv_k * n). inv_k == 0 is the plain power law.
struct TruncatedPowerLawModel {
  double alpha = 1.0;
  double gamma = 0.0;
  double inv_k = 0.0;

  TruncatedPowerLawModel() = default;
  TruncatedPowerLawModel(double a, double g, double ik) : alpha(a), gamma(g), inv_k(ik) {}
  TruncatedPowerLawModel(const PowerLawModel& p) : alpha(p.alpha), gamma(p.gamma) {}  // NOLINT
};

enum class Family { PowerLaw, Truncated };

std::string_view to_string(Family family);

struct FitReport {
  TruncatedPowerLawModel model;
  Family family = Family::PowerLaw;
  double log_rmse = 0.0;
  std::size_t n_points = 0;
};

struct ComparisonReport {
  FitReport power;
  FitReport truncated;
  double power_holdout_rmse = 0.0;
  double truncated_holdout_rmse = 0.0;
  Family winner = Family::PowerLaw;
};

/// Least squares of log(error) = log(alpha) - gamma*log(n); gamma is clamped
/// at zero. Throws InsufficientData / NonPositiveError.
FitReport fit_power_law(std::span<const CurveSample> samples);

/// Least squares of log(error) = log(alpha) - gamma*log(n) - inv_k*n subject to
/// gamma >= 0 and inv_k >= 0, solved exactly by enumerating the active sets.
/// Throws InsufficientData / NonPositiveError / DegenerateDesign.
FitReport fit_truncated_power_law(std::span<const CurveSample> samples);

double predict_error(const TruncatedPowerLawModel& model, double train_size);
inline double predict_error(const PowerLawModel& model, double train_size) {
  return predict_error(TruncatedPowerLawModel(model), train_size);
}

/// Unclamped log of the model value; used for residuals.
double log_model(const TruncatedPowerLawModel& model, double train_size);

/// RMS residual in log-error space (observed errors floored first).
double log_rmse(const TruncatedPowerLawModel& model, std::span<const CurveSample> samples);

/// Fits both families on `train`, scores them on `holdout`; ties within
/// 1e-12 go to the power law.
ComparisonReport compare_extrapolation(std::span<const CurveSample> train,
                                       std::span<const CurveSample> holdout);

/// Floors a raw observed error into (0, 1]; throws NonPositiveError for
/// negative or NaN input.
double floor_error(double error);

/// Series CSV with header `train_size,error`. Throws EmptyFile, ParseError.
std::vector<CurveSample> parse_series_csv(std::istream& in);
void write_series_csv(std::span<const CurveSample> samples, std::ostream& out);

}  // namespace mcal::curve
