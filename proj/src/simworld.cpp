#include "mcal/simworld.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "mcal/error.hpp"
#include "mcal/random.hpp"

namespace mcal {

void Dataset::validate() const {
  if (class_count < 2) throw Error(ErrorKind::InvalidParams, "class_count must be >= 2");
  if (static_cast<std::size_t>(features.rows()) != true_labels.size()) {
    throw Error(ErrorKind::InvalidParams, "feature rows do not match label count");
  }
  if (size() < static_cast<std::size_t>(class_count)) {
    throw Error(ErrorKind::InvalidParams, "dataset smaller than class_count");
  }
  for (int label : true_labels) {
    if (label < 0 || label >= class_count) throw Error(ErrorKind::InvalidParams, "label out of range");
  }
}

bool operator==(const Dataset& a, const Dataset& b) {
  return a.class_count == b.class_count && a.true_labels == b.true_labels &&
         a.features.rows() == b.features.rows() && a.features.cols() == b.features.cols() &&
         a.features == b.features;
}

BlobParams blob_preset(const std::string& name) {
  if (name == "easy") return {2, 4, 2000, 8.0};
  if (name == "medium") return {4, 8, 1000, 4.0};
  if (name == "hard") return {10, 10, 400, 1.5};
  throw Error(ErrorKind::InvalidParams, "unknown preset '" + name + "' (easy|medium|hard)");
}

Dataset generate_blobs(const BlobParams& p, std::uint64_t seed) {
  if (p.classes < 2 || p.dim < 1 || p.per_class < 1 || !(p.separation >= 0.0)) {
    throw Error(ErrorKind::InvalidParams, "need classes >= 2, dim >= 1, per_class >= 1, separation >= 0");
  }
  Rng rng(seed);
  const auto classes = static_cast<Eigen::Index>(p.classes);
  const auto dim = static_cast<Eigen::Index>(p.dim);
  Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(classes, dim);

  if (p.classes <= p.dim) {
    Eigen::MatrixXd g(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i)
      for (Eigen::Index j = 0; j < dim; ++j) g(i, j) = rng.normal();
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    // Rows of q are orthonormal, so scaled rows are pairwise sep apart.
    centers = q.topRows(classes) * (p.separation / std::sqrt(2.0));
  } else {
    for (Eigen::Index c = 0; c < classes; ++c)
      for (Eigen::Index j = 0; j < dim; ++j) centers(c, j) = rng.normal();
    double total = 0.0;
    int pairs = 0;
    for (Eigen::Index a = 0; a < classes; ++a)
      for (Eigen::Index b = a + 1; b < classes; ++b, ++pairs) total += (centers.row(a) - centers.row(b)).norm();
    const double mean = total / pairs;
    centers *= mean > 0.0 ? p.separation / mean : 0.0;
  }

  const std::size_t n = static_cast<std::size_t>(p.classes) * static_cast<std::size_t>(p.per_class);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);

  Dataset d;
  d.name = "blobs";
  d.class_count = p.classes;
  d.features = FeatureMatrix::Zero(static_cast<Eigen::Index>(n), dim);
  d.true_labels.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i / static_cast<std::size_t>(p.per_class));
    const auto row = static_cast<Eigen::Index>(order[i]);
    d.true_labels[order[i]] = label;
    for (Eigen::Index j = 0; j < dim; ++j) d.features(row, j) = centers(label, j) + rng.normal();
  }
  return d;
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void parse_fail(std::size_t line_no, std::size_t col, const std::string& msg) {
  throw Error(ErrorKind::ParseError,
              "line " + std::to_string(line_no) + ", column " + std::to_string(col + 1) + ": " + msg);
}

}  // namespace

CsvLoad parse_csv(std::istream& in, const std::string& name) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      have_header = true;
      break;
    }
  }
  if (!have_header) throw Error(ErrorKind::EmptyFile, name + ": no header");
  const auto header = split_commas(trim(line));
  if (header.size() < 2) parse_fail(line_no, 0, "header needs at least one feature and a label column");
  for (std::size_t j = 0; j + 1 < header.size(); ++j) {
    if (trim(header[j]) != "f" + std::to_string(j)) parse_fail(line_no, j, "expected column name f" + std::to_string(j));
  }
  if (trim(header.back()) != "label") parse_fail(line_no, header.size() - 1, "expected final column 'label'");
  const std::size_t dim = header.size() - 1;

  std::vector<double> values;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    ++line_no;
    const auto row = trim(line);
    if (row.empty()) continue;
    const auto fields = split_commas(row);
    if (fields.size() != dim + 1) {
      parse_fail(line_no, std::min(fields.size(), dim + 1) - 1,
                 "expected " + std::to_string(dim + 1) + " fields, got " + std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j < dim; ++j) {
      const auto f = trim(fields[j]);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc{} || ptr != f.data() + f.size() || !std::isfinite(v)) {
        parse_fail(line_no, j, "invalid number '" + std::string(f) + "'");
      }
      values.push_back(v);
    }
    const auto f = trim(fields[dim]);
    int label = -1;
    const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), label);
    if (ec != std::errc{} || ptr != f.data() + f.size() || label < 0) {
      parse_fail(line_no, dim, "label must be a non-negative integer, got '" + std::string(f) + "'");
    }
    labels.push_back(label);
  }
  if (labels.empty()) throw Error(ErrorKind::EmptyFile, name + ": header only, no data rows");

  CsvLoad out;
  out.dataset.name = name;
  out.dataset.true_labels = std::move(labels);
  const int max_label = *std::max_element(out.dataset.true_labels.begin(), out.dataset.true_labels.end());
  out.dataset.class_count = std::max(2, max_label + 1);
  std::vector<bool> seen(static_cast<std::size_t>(out.dataset.class_count), false);
  for (int l : out.dataset.true_labels) seen[static_cast<std::size_t>(l)] = true;
  for (std::size_t c = 0; c < seen.size(); ++c) {
    if (!seen[c]) out.warnings.push_back("label " + std::to_string(c) + " never occurs (non-contiguous labels)");
  }
  const auto n = static_cast<Eigen::Index>(out.dataset.true_labels.size());
  out.dataset.features = Eigen::Map<FeatureMatrix>(values.data(), n, static_cast<Eigen::Index>(dim));
  return out;
}

CsvLoad load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path);
  return parse_csv(in, path);
}

void save_csv(const Dataset& dataset, std::ostream& out) {
  const auto dim = dataset.features.cols();
  for (Eigen::Index j = 0; j < dim; ++j) out << 'f' << j << ',';
  out << "label\n";
  char buf[64];
  for (Eigen::Index i = 0; i < dataset.features.rows(); ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, dataset.features(i, j));
      out.write(buf, ptr - buf);
      out << ',';
    }
    out << dataset.true_labels[static_cast<std::size_t>(i)] << '\n';
  }
}

void save_csv(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path);
  save_csv(dataset, out);
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path);
}

std::vector<int> Oracle::label(const Dataset& dataset, std::span<const std::size_t> indices) {
  if (billed_.size() < dataset.size()) billed_.resize(dataset.size(), false);
  std::vector<std::size_t> sorted(indices.begin(), indices.end());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] >= dataset.size()) {
      throw Error(ErrorKind::IndexOutOfRange, "index " + std::to_string(sorted[i]) + " out of range");
    }
    if (billed_[sorted[i]] || (i > 0 && sorted[i] == sorted[i - 1])) {
      throw Error(ErrorKind::AlreadyLabeled, "index " + std::to_string(sorted[i]) + " already labeled");
    }
  }
  std::vector<int> out;
  out.reserve(indices.size());
  for (std::size_t idx : indices) {
    billed_[idx] = true;
    out.push_back(dataset.true_labels[idx]);
  }
  labels_issued_ += indices.size();
  dollars_accrued_ += price_ * static_cast<std::int64_t>(indices.size());
  return out;
}

}  // namespace mcal
