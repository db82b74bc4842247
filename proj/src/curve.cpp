#include "mcal/curve.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>
#include <limits>
#include <optional>

#include "mcal/error.hpp"

namespace mcal::curve {

std::string_view to_string(Family family) {
  return family == Family::PowerLaw ? "power" : "truncated";
}

double floor_error(double error) {
  if (!(error >= 0.0)) {
    throw Error(ErrorKind::NonPositiveError, "observed error must be >= 0, got " + std::to_string(error));
  }
  return std::clamp(error, kErrorFloor, 1.0);
}

namespace {

struct Prepared {
  std::vector<double> n;      // train sizes
  std::vector<double> log_n;  // log train sizes
  std::vector<double> y;      // log floored errors
  std::size_t distinct = 0;
};

// Sorting makes the fit independent of input order down to the last bit.
Prepared prepare(std::span<const CurveSample> samples) {
  std::vector<CurveSample> sorted(samples.begin(), samples.end());
  for (const auto& s : sorted) {
    if (s.train_size < 1) throw Error(ErrorKind::InvalidRange, "train_size must be >= 1");
  }
  std::sort(sorted.begin(), sorted.end(), [](const CurveSample& a, const CurveSample& b) {
    return a.train_size != b.train_size ? a.train_size < b.train_size : a.error < b.error;
  });
  Prepared p;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double n = static_cast<double>(sorted[i].train_size);
    p.n.push_back(n);
    p.log_n.push_back(std::log(n));
    p.y.push_back(std::log(floor_error(sorted[i].error)));
    if (i == 0 || sorted[i].train_size != sorted[i - 1].train_size) ++p.distinct;
  }
  return p;
}

// Coefficients are (log alpha, gamma, inv_k); columns are (1, -log n, -n).
struct SubsetSolution {
  std::array<double, 3> coef{};
  double sse = 0.0;
};

std::optional<SubsetSolution> solve_subset(const Prepared& p, const std::array<bool, 3>& free) {
  const auto rows = static_cast<Eigen::Index>(p.n.size());
  const double n_scale = *std::max_element(p.n.begin(), p.n.end());
  std::array<int, 3> col_of{-1, -1, -1};
  Eigen::Index cols = 0;
  for (int j = 0; j < 3; ++j) {
    if (free[j]) col_of[j] = static_cast<int>(cols++);
  }
  Eigen::MatrixXd a(rows, cols);
  Eigen::VectorXd b(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (col_of[0] >= 0) a(i, col_of[0]) = 1.0;
    if (col_of[1] >= 0) a(i, col_of[1]) = -p.log_n[k];
    if (col_of[2] >= 0) a(i, col_of[2]) = -p.n[k] / n_scale;
    b(i) = p.y[k];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-12);
  if (qr.rank() < cols) return std::nullopt;
  const Eigen::VectorXd x = qr.solve(b);
  SubsetSolution sol;
  for (int j = 0; j < 3; ++j) {
    if (col_of[j] >= 0) sol.coef[j] = x(col_of[j]);
  }
  sol.coef[2] /= n_scale;
  for (std::size_t i = 0; i < p.n.size(); ++i) {
    const double r = p.y[i] - (sol.coef[0] - sol.coef[1] * p.log_n[i] - sol.coef[2] * p.n[i]);
    sol.sse += r * r;
  }
  return sol;
}

FitReport make_report(const SubsetSolution& sol, Family family, std::size_t n_points) {
  FitReport r;
  r.model = TruncatedPowerLawModel(std::exp(sol.coef[0]), sol.coef[1], sol.coef[2]);
  r.family = family;
  r.n_points = n_points;
  r.log_rmse = std::sqrt(sol.sse / static_cast<double>(n_points));
  return r;
}

}  // namespace

FitReport fit_power_law(std::span<const CurveSample> samples) {
  const Prepared p = prepare(samples);
  if (p.distinct < 2) {
    throw Error(ErrorKind::InsufficientData, "power-law fit needs >= 2 distinct train sizes");
  }
  auto sol = solve_subset(p, {true, true, false});
  if (!sol) throw Error(ErrorKind::DegenerateDesign, "collinear power-law design");
  if (sol->coef[1] < 0.0) sol = solve_subset(p, {true, false, false});
  return make_report(*sol, Family::PowerLaw, p.n.size());
}

FitReport fit_truncated_power_law(std::span<const CurveSample> samples) {
  if (samples.size() < 3) {
    throw Error(ErrorKind::InsufficientData, "truncated power-law fit needs >= 3 samples");
  }
  const Prepared p = prepare(samples);
  if (p.distinct < 3) {
    throw Error(ErrorKind::DegenerateDesign, "truncated power-law fit needs >= 3 distinct train sizes");
  }
  // Unconstrained solve first; the remaining active sets pin gamma and/or
  // inv_k at zero. The convex optimum is the feasible candidate with least SSE.
  constexpr std::array<std::array<bool, 3>, 4> kActiveSets{{
      {true, true, true},
      {true, true, false},
      {true, false, true},
      {true, false, false},
  }};
  std::optional<SubsetSolution> best;
  for (const auto& free : kActiveSets) {
    const auto sol = solve_subset(p, free);
    if (!sol) {
      if (free[1] && free[2]) throw Error(ErrorKind::DegenerateDesign, "collinear truncated design");
      continue;
    }
    if (sol->coef[1] < 0.0 || sol->coef[2] < 0.0) continue;
    if (!best || sol->sse < best->sse) best = sol;
    if (free[1] && free[2]) break;
  }
  return make_report(*best, Family::Truncated, p.n.size());
}

double log_model(const TruncatedPowerLawModel& model, double train_size) {
  return std::log(model.alpha) - model.gamma * std::log(train_size) - model.inv_k * train_size;
}

double predict_error(const TruncatedPowerLawModel& model, double train_size) {
  const double value =
      model.alpha * std::pow(train_size, -model.gamma) * std::exp(-model.inv_k * train_size);
  if (!(value > std::numeric_limits<double>::min())) return std::numeric_limits<double>::min();
  return std::min(value, 1.0);
}

double log_rmse(const TruncatedPowerLawModel& model, std::span<const CurveSample> samples) {
  if (samples.empty()) return 0.0;
  double sse = 0.0;
  for (const auto& s : samples) {
    const double r = std::log(floor_error(s.error)) - log_model(model, static_cast<double>(s.train_size));
    sse += r * r;
  }
  return std::sqrt(sse / static_cast<double>(samples.size()));
}

ComparisonReport compare_extrapolation(std::span<const CurveSample> train,
                                       std::span<const CurveSample> holdout) {
  if (holdout.empty()) throw Error(ErrorKind::InsufficientData, "holdout is empty");
  std::size_t max_train = 0;
  for (const auto& s : train) max_train = std::max(max_train, s.train_size);
  for (const auto& s : holdout) {
    if (s.train_size <= max_train) {
      throw Error(ErrorKind::InvalidRange, "holdout sizes must exceed the largest train size");
    }
  }
  ComparisonReport r;
  r.power = fit_power_law(train);
  r.truncated = fit_truncated_power_law(train);
  r.power_holdout_rmse = log_rmse(r.power.model, holdout);
  r.truncated_holdout_rmse = log_rmse(r.truncated.model, holdout);
  r.winner = r.truncated_holdout_rmse < r.power_holdout_rmse - 1e-12 ? Family::Truncated
                                                                      : Family::PowerLaw;
  return r;
}

std::vector<CurveSample> parse_series_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::EmptyFile, "series file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "train_size,error") throw Error(ErrorKind::ParseError, "line 1: expected header train_size,error");
  std::vector<CurveSample> out;
  for (std::size_t lineno = 2; std::getline(in, line); ++lineno) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    const auto where = "line " + std::to_string(lineno);
    if (comma == std::string::npos) throw Error(ErrorKind::ParseError, where + ": expected two columns");
    CurveSample s;
    const char* end = line.data() + line.size();
    auto r1 = std::from_chars(line.data(), line.data() + comma, s.train_size);
    if (r1.ec != std::errc{} || r1.ptr != line.data() + comma) {
      throw Error(ErrorKind::ParseError, where + ", column 1: bad train_size");
    }
    auto r2 = std::from_chars(line.data() + comma + 1, end, s.error);
    if (r2.ec != std::errc{} || r2.ptr != end) throw Error(ErrorKind::ParseError, where + ", column 2: bad error");
    out.push_back(s);
  }
  if (out.empty()) throw Error(ErrorKind::EmptyFile, "series file has no rows");
  return out;
}

void write_series_csv(std::span<const CurveSample> samples, std::ostream& out) {
  out << "train_size,error\n";
  for (const auto& s : samples) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, s.error);
    out << s.train_size << ',' << std::string_view(buf, static_cast<std::size_t>(r.ptr - buf)) << '\n';
  }
}

}  // namespace mcal::curve
