#include "mcal/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include "mcal/config.hpp"
#include "mcal/error.hpp"
#include "mcal/orchestrator.hpp"
#include "mcal/report.hpp"

namespace mcal::cli {

namespace {

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::IoError:
    case ErrorKind::ParseError:
    case ErrorKind::EmptyFile:
      return kIo;
    case ErrorKind::DatasetTooSmall:
      return kInfeasibleDataset;
    case ErrorKind::InsufficientData:
    case ErrorKind::NonPositiveError:
    case ErrorKind::DegenerateDesign:
      return kNumeric;
    case ErrorKind::ConfigError:
    case ErrorKind::InvalidParams:
    case ErrorKind::InvalidRange:
      return kUsage;
    default:
      return kNumeric;
  }
}

std::string shortest(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Fixed six decimals with trailing zeros removed, so an exact fit prints 0.
std::string trimmed(double v) {
  std::string s = fixed(v, 6);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s == "-0" ? "0" : s;
}

std::string general(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback) {
  if (flag) return *flag;
  if (const char* env = std::getenv("MCAL_SEED")) {
    std::uint64_t seed = 0;
    const std::string_view text(env);
    const auto r = std::from_chars(text.data(), text.data() + text.size(), seed);
    if (r.ec != std::errc{} || r.ptr != text.data() + text.size()) {
      throw Error(ErrorKind::ConfigError, "MCAL_SEED must be a non-negative integer, got '" + std::string(text) + "'");
    }
    return seed;
  }
  return fallback;
}

Dataset load_dataset(const std::string& path) {
  auto loaded = load_csv(path);
  loaded.dataset.name = std::filesystem::path(path).stem().string();
  return std::move(loaded.dataset);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::IoError, "cannot write '" + path + "'");
  return out;
}

struct GenDataArgs {
  std::string preset;
  BlobParams blobs;
  std::optional<std::uint64_t> seed;
  std::string out;
};

int gen_data(const GenDataArgs& a, std::ostream& out) {
  const BlobParams params = a.preset.empty() ? a.blobs : blob_preset(a.preset);
  Dataset d = generate_blobs(params, resolve_seed(a.seed, 0));
  if (!a.preset.empty()) d.name = a.preset;
  save_csv(d, a.out);
  out << "wrote " << d.size() << " rows, " << d.class_count << " classes, dim " << d.dim() << " to " << a.out << '\n';
  return kOk;
}

struct RunArgs {
  std::string data;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_report;
  std::string out_ledger;
};

int run_campaign(const RunArgs& a, std::ostream& out, std::ostream& err) {
  MCALConfig config = load_config(a.config);
  config.seed = resolve_seed(a.seed, config.seed);
  const Dataset dataset = load_dataset(a.data);
  Oracle oracle(config.human_rate);
  const MCALResult result = run(config, dataset, oracle);
  const auto report = build_run_report(config, dataset, result);
  if (!a.out_report.empty()) write_json(report, a.out_report);
  if (!a.out_ledger.empty()) {
    auto ledger = open_out(a.out_ledger);
    result.ledger.costs.write_csv(ledger);
  }
  if (result.infeasible) err << "note: no feasible classifier subset; every item was human-labeled\n";
  out << summary_row(dataset, result) << '\n';
  return kOk;
}

struct SweepArgs {
  std::string data;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string deltas;
  std::string out_csv;
};

int sweep_delta(const SweepArgs& a, std::ostream& out) {
  const auto fractions = parse_delta_list(a.deltas);
  MCALConfig config = load_config(a.config);
  config.seed = resolve_seed(a.seed, config.seed);
  const Dataset dataset = load_dataset(a.data);
  const double n = static_cast<double>(dataset.size());

  std::string csv = "delta_fraction,total_cost,b_final,s_fraction\n";
  const auto row = [&](const std::string& label, const MCALResult& r) {
    csv += label + "," + r.cost.total.to_string() + "," + std::to_string(r.final_b) + "," +
           fixed(static_cast<double>(r.s_size) / n, 6) + "\n";
  };
  for (double f : fractions) {
    const auto delta = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(f * n + 1e-9)));
    Oracle oracle(config.human_rate);
    row(shortest(f), run_fixed_delta(config, dataset, oracle, delta));
  }
  Oracle oracle(config.human_rate);
  row("mcal", run(config, dataset, oracle));

  if (a.out_csv.empty()) {
    out << csv;
  } else {
    auto file = open_out(a.out_csv);
    file << csv;
    out << "wrote " << fractions.size() + 1 << " rows to " << a.out_csv << '\n';
  }
  return kOk;
}

struct FitArgs {
  std::string in;
  std::string family = "truncated";
  std::optional<std::size_t> holdout_from;
};

std::string describe(const curve::FitReport& fit) {
  return "alpha=" + general(fit.model.alpha) + " gamma=" + fixed(fit.model.gamma, 4) +
         " inv_k=" + general(fit.model.inv_k) + " rmse=" + trimmed(fit.log_rmse);
}

int fit_curve(const FitArgs& a, std::ostream& out) {
  std::ifstream in(a.in);
  if (!in) throw Error(ErrorKind::IoError, "cannot open '" + a.in + "'");
  const auto samples = curve::parse_series_csv(in);
  std::vector<curve::CurveSample> train;
  std::vector<curve::CurveSample> holdout;
  for (const auto& s : samples) {
    (a.holdout_from && s.train_size >= *a.holdout_from ? holdout : train).push_back(s);
  }
  if (a.family == "compare") {
    if (!a.holdout_from) throw Error(ErrorKind::ConfigError, "--family compare needs --holdout-from");
    const auto cmp = curve::compare_extrapolation(train, holdout);
    out << "power " << describe(cmp.power) << " holdout_rmse=" << trimmed(cmp.power_holdout_rmse) << '\n';
    out << "truncated " << describe(cmp.truncated) << " holdout_rmse=" << trimmed(cmp.truncated_holdout_rmse) << '\n';
    out << "winner=" << curve::to_string(cmp.winner) << '\n';
    return kOk;
  }
  const auto fit = a.family == "power" ? curve::fit_power_law(train) : curve::fit_truncated_power_law(train);
  out << "family=" << curve::to_string(fit.family) << ' ' << describe(fit);
  if (!holdout.empty()) out << " holdout_rmse=" << trimmed(curve::log_rmse(fit.model, holdout));
  out << '\n';
  return kOk;
}

}  // namespace

std::vector<double> parse_delta_list(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = std::min(text.find(',', start), text.size());
    std::string item = text.substr(start, comma - start);
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    start = comma + 1;
    if (item.empty()) {
      if (text.find_first_not_of(" \t,") == std::string::npos) break;
      throw Error(ErrorKind::ConfigError, "empty entry in delta list '" + text + "'");
    }
    const bool percent = item.back() == '%';
    if (percent) item.pop_back();
    double v = 0.0;
    const auto r = std::from_chars(item.data(), item.data() + item.size(), v);
    if (r.ec != std::errc{} || r.ptr != item.data() + item.size()) {
      throw Error(ErrorKind::ConfigError, "bad delta '" + item + "'");
    }
    if (percent) v /= 100.0;
    if (!(v > 0.0 && v <= 1.0)) throw Error(ErrorKind::ConfigError, "delta '" + item + "' outside (0, 1]");
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorKind::ConfigError, "delta list is empty");
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Labels a dataset at minimum total cost with active learning and learning-curve prediction", "mcal"};
  app.require_subcommand(1);

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Write a synthetic Gaussian-blob dataset as CSV");
  auto* preset = gen_cmd->add_option("--preset", gen.preset, "Difficulty tier")->check(CLI::IsMember({"easy", "medium", "hard"}));
  auto* classes = gen_cmd->add_option("--classes", gen.blobs.classes, "Number of classes");
  auto* dim = gen_cmd->add_option("--dim", gen.blobs.dim, "Feature dimension");
  auto* per_class = gen_cmd->add_option("--per-class", gen.blobs.per_class, "Rows per class");
  auto* separation = gen_cmd->add_option("--separation", gen.blobs.separation, "Distance between class centers");
  preset->excludes(classes)->excludes(dim)->excludes(per_class)->excludes(separation);
  gen_cmd->add_option("--seed", gen.seed, "Generator seed (falls back to MCAL_SEED, then 0)");
  gen_cmd->add_option("--out", gen.out, "Output CSV path")->required();

  RunArgs run_args;
  auto* run_cmd = app.add_subcommand("run", "Run a min-cost labeling campaign");
  run_cmd->add_option("--data", run_args.data, "Dataset CSV")->required();
  run_cmd->add_option("--config", run_args.config, "Config JSON")->required();
  run_cmd->add_option("--seed", run_args.seed, "Campaign seed (falls back to MCAL_SEED, then the config)");
  run_cmd->add_option("--out-report", run_args.out_report, "Run report JSON path");
  run_cmd->add_option("--out-ledger", run_args.out_ledger, "Cost ledger CSV path");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep-delta", "Compare fixed-batch active learning against the campaign");
  sweep_cmd->add_option("--data", sweep.data, "Dataset CSV")->required();
  sweep_cmd->add_option("--config", sweep.config, "Config JSON")->required();
  sweep_cmd->add_option("--seed", sweep.seed, "Campaign seed (falls back to MCAL_SEED, then the config)");
  sweep_cmd->add_option("--deltas", sweep.deltas, "Batch sizes as fractions of |X|, e.g. \"1%,5%,10%\"")->required();
  sweep_cmd->add_option("--out-csv", sweep.out_csv, "Output CSV path (stdout when omitted)");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit-curve", "Fit a learning curve to a train_size,error series");
  fit_cmd->add_option("--in", fit.in, "Series CSV")->required();
  fit_cmd->add_option("--family", fit.family, "power, truncated or compare")
      ->check(CLI::IsMember({"power", "truncated", "compare"}));
  fit_cmd->add_option("--holdout-from", fit.holdout_from, "Rows with train_size >= N form the holdout");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen_cmd) return gen_data(gen, out);
    if (*run_cmd) return run_campaign(run_args, out, err);
    if (*sweep_cmd) return sweep_delta(sweep, out);
    return fit_curve(fit, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumeric;
  }
}

}  // namespace mcal::cli
