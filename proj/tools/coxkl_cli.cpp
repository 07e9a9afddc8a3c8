#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "coxkl/coxkl.hpp"
#include "coxkl/dataset.hpp"
#include "coxkl/lasso.hpp"
#include "coxkl/metrics.hpp"
#include "coxkl/serialize.hpp"
#include "coxkl/sim.hpp"
#include "coxkl/tuning.hpp"

namespace {

using namespace coxkl;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

std::string iso_now() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<double> parse_number_list(const std::string& text,
                                      const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(cell, &pos));
      if (pos != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ValidationError(flag + ": malformed number '" + cell + "'");
    }
  }
  if (out.empty()) throw ValidationError(flag + ": empty list");
  return out;
}

SurvivalDataset load_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open data file '" + path + "'");
  try {
    return load_dataset(in);
  } catch (const Error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

std::vector<ExternalScores> load_score_files(
    const std::vector<std::string>& paths, const SurvivalDataset& data) {
  std::vector<ExternalScores> exts;
  for (const std::string& path : paths) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open scores file '" + path + "'");
    try {
      std::vector<ExternalScores> part = load_scores(in, data);
      for (ExternalScores& ext : part) exts.push_back(std::move(ext));
    } catch (const Error& e) {
      throw ValidationError(path + ": " + e.what());
    }
  }
  return exts;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write to '" + path + "'");
  return out;
}

void write_manifest(const std::string& path, const std::string& command,
                    const std::string& canonical, std::uint64_t seed,
                    const std::string& started) {
  RunManifest manifest;
  manifest.command = command;
  manifest.config_digest = config_digest(canonical);
  manifest.seed = seed;
  manifest.tool_version = kToolVersion;
  manifest.started = started;
  manifest.finished = iso_now();
  std::ofstream out = open_output(path);
  write_manifest_json(out, manifest);
}

struct FitArgs {
  std::string data_path;
  std::vector<std::string> score_paths;
  std::string eta_text;
  bool lasso = false;
  double lambda = 0.0;
  std::string out_path = "fit.json";
  std::string baseline_path;
  bool allow_nonconverged = false;
};

int cmd_fit(const FitArgs& args, const std::string& canonical,
            const std::string& started) {
  const SurvivalDataset data = load_dataset_file(args.data_path);
  const std::vector<ExternalScores> exts =
      load_score_files(args.score_paths, data);
  std::vector<double> etas;
  if (!args.eta_text.empty()) etas = parse_number_list(args.eta_text, "--eta");
  if (!exts.empty() && etas.size() != exts.size())
    throw ValidationError("--eta must supply one value per score column (" +
                          std::to_string(exts.size()) + " loaded)");
  if (exts.empty() && !etas.empty())
    throw ValidationError("--eta given but no --scores");

  bool converged = false;
  Vector beta;
  {
    std::ofstream out = open_output(args.out_path);
    if (args.lasso) {
      if (!(args.lambda > 0.0))
        throw ValidationError("--lasso requires --lambda > 0");
      const LassoFit fit =
          fit_coxkl_lasso(data, exts, etas, args.lambda, std::nullopt);
      write_fit_json(out, fit);
      converged = fit.converged;
      beta = fit.beta;
      int nonzeros = 0;
      for (int j = 0; j < beta.size(); ++j) nonzeros += beta[j] != 0.0;
      std::cout << "converged=" << converged << " objective=" << fit.objective
                << " nonzeros=" << nonzeros << '\n';
    } else {
      const CoxKLFit fit =
          exts.empty() ? fit_cox(data) : fit_coxkl(data, exts, etas);
      write_fit_json(out, fit);
      converged = fit.converged;
      beta = fit.beta;
      std::cout << "converged=" << converged << " objective=" << fit.objective
                << " iterations=" << fit.iterations << '\n';
    }
  }
  if (!args.baseline_path.empty()) {
    std::ofstream out = open_output(args.baseline_path);
    breslow_baseline(data, beta).write_csv(out);
  }
  write_manifest(args.out_path + ".manifest.json", "fit", canonical, 0, started);
  if (!converged && !args.allow_nonconverged) {
    std::cerr << "fit did not converge (use --allow-nonconverged to accept)\n";
    return kExitNumeric;
  }
  return kExitOk;
}

struct CvArgs {
  std::string data_path;
  std::vector<std::string> score_paths;
  std::string eta_grid_text;
  std::string lambda_grid_text;
  bool lasso = false;
  int folds = 5;
  std::uint64_t seed = 1;
  std::string out_path = "cv.json";
};

int cmd_cv(const CvArgs& args, const std::string& canonical,
           const std::string& started) {
  const SurvivalDataset data = load_dataset_file(args.data_path);
  const std::vector<ExternalScores> exts =
      load_score_files(args.score_paths, data);

  std::vector<double> eta_grid =
      args.eta_grid_text.empty()
          ? (exts.empty() ? std::vector<double>{0.0} : default_eta_grid())
          : parse_number_list(args.eta_grid_text, "--eta-grid");

  std::optional<std::vector<double>> lambdas;
  if (!args.lambda_grid_text.empty())
    lambdas = parse_number_list(args.lambda_grid_text, "--lambda-grid");
  else if (args.lasso) {
    double lmax = 0.0;
    for (double eta : eta_grid) {
      std::vector<double> etas(exts.size(), eta);
      lmax = std::max(lmax, lambda_max(data, exts, etas));
    }
    if (!(lmax > 0.0))
      throw ValidationError("cv: lambda_max is zero; no penalized path");
    std::vector<double> grid(100);
    const double ratio = data.n() < data.p() ? 0.05 : 1e-4;
    for (int t = 0; t < 100; ++t)
      grid[t] = lmax * std::pow(ratio, static_cast<double>(t) / 99.0);
    lambdas = std::move(grid);
  }

  const CvReport report =
      select_tuning(data, exts, eta_grid, lambdas, args.folds, args.seed);
  std::ofstream out = open_output(args.out_path);
  write_cv_report_json(out, report);
  std::cout << "selected_eta=";
  for (std::size_t i = 0; i < report.selected_eta.size(); ++i)
    std::cout << (i ? "," : "") << report.selected_eta[i];
  if (report.selected_eta.empty()) std::cout << "none";
  if (report.selected_lambda)
    std::cout << " selected_lambda=" << *report.selected_lambda;
  std::cout << '\n';
  write_manifest(args.out_path + ".manifest.json", "cv", canonical, args.seed,
                 started);
  return kExitOk;
}

struct SimulateArgs {
  int setting = 0;
  std::string cell;
  int reps = 500;
  std::uint64_t seed = 7;
  int jobs = 1;
  int folds = 5;
  std::string cv_grid_text;
  std::string sweep_grid_text;
  int n_external = 0;
  std::string out_dir = "sim_out";
};

int cmd_simulate(const SimulateArgs& args, const std::string& canonical,
                 const std::string& started) {
  SimConfig config;
  config.cell = args.cell;
  config.replicates = args.reps;
  config.seed = args.seed;
  config.jobs = args.jobs;
  config.cv_folds = args.folds;
  if (!args.cv_grid_text.empty())
    config.cv_eta_grid = parse_number_list(args.cv_grid_text, "--cv-grid");
  if (!args.sweep_grid_text.empty())
    config.sweep_eta_grid =
        parse_number_list(args.sweep_grid_text, "--sweep-grid");
  config.n_external_override = args.n_external;

  const SimScenario scenario = scenario_for_cell(args.cell);
  if (args.setting != 0 && args.setting != scenario.setting)
    throw ValidationError("--setting does not match cell '" + args.cell + "'");

  const ExperimentReport report = run_cell(config);

  namespace fs = std::filesystem;
  fs::create_directories(args.out_dir);
  {
    std::ofstream out = open_output(args.out_dir + "/report.json");
    write_experiment_json(out, report);
  }
  {
    std::ofstream out = open_output(args.out_dir + "/table.csv");
    write_experiment_table_csv(out, report);
  }
  {
    std::ofstream out = open_output(args.out_dir + "/curves.csv");
    write_experiment_curves_csv(out, report);
  }
  write_manifest(args.out_dir + "/manifest.json", "simulate", canonical,
                 args.seed, started);

  std::cout << "cell=" << report.cell << " completed=" << report.completed
            << " failed=" << report.failed << '\n';
  for (const MethodSummary& m : report.methods) {
    std::cout << "  " << m.method << ": c_index=" << m.c_mean;
    if (!std::isnan(m.mse)) std::cout << " mse=" << m.mse;
    std::cout << '\n';
  }
  return kExitOk;
}

struct EvaluateArgs {
  std::string fit_path;
  std::string data_path;
};

int cmd_evaluate(const EvaluateArgs& args) {
  const SurvivalDataset data = load_dataset_file(args.data_path);
  std::ifstream in(args.fit_path);
  if (!in) throw ValidationError("cannot open fit file '" + args.fit_path + "'");
  const LoadedFit fit = read_fit_json(in);
  if (fit.beta.size() != data.p())
    throw ValidationError("fit has " + std::to_string(fit.beta.size()) +
                          " coefficients for " + std::to_string(data.p()) +
                          " covariates");
  const double c =
      c_index(data.times(), data.statuses(), data.covariates() * fit.beta);
  std::cout << "c_index=" << std::fixed << std::setprecision(3) << c << '\n';
  return kExitOk;
}

struct KmArgs {
  std::string data_path;
  std::string scores_path;
  std::string fit_path;
  std::string cuts_text = "20,80";
  std::string out_path = "km.csv";
};

int cmd_km(const KmArgs& args, const std::string& canonical,
           const std::string& started) {
  const SurvivalDataset data = load_dataset_file(args.data_path);
  Vector risk;
  if (!args.fit_path.empty()) {
    std::ifstream in(args.fit_path);
    if (!in)
      throw ValidationError("cannot open fit file '" + args.fit_path + "'");
    const LoadedFit fit = read_fit_json(in);
    if (fit.beta.size() != data.p())
      throw ValidationError("fit coefficient count does not match data");
    risk = data.covariates() * fit.beta;
  } else if (!args.scores_path.empty()) {
    std::ifstream in(args.scores_path);
    if (!in)
      throw ValidationError("cannot open scores file '" + args.scores_path +
                            "'");
    const std::vector<ExternalScores> exts = load_scores(in, data);
    risk = exts.front().scores();
  } else {
    throw ValidationError("km needs --scores or --fit");
  }

  const std::vector<double> cuts = parse_number_list(args.cuts_text, "--cuts");
  const RiskStrata strata =
      risk_stratify(risk, cuts, data.times(), data.statuses());
  for (const std::string& warning : strata.warnings)
    std::cerr << "warning: " << warning << '\n';

  std::ofstream out = open_output(args.out_path);
  write_km_csv(out, strata);
  std::cout << "groups:";
  for (const RiskGroup& g : strata.groups)
    std::cout << ' ' << g.label << "=" << g.members.size();
  std::cout << '\n';
  write_manifest(args.out_path + ".manifest.json", "km", canonical, 0, started);
  return kExitOk;
}

std::string canonical_config(const CLI::App* cmd) {
  std::ostringstream out;
  out << cmd->get_name();
  for (const CLI::Option* opt : cmd->get_options()) {
    if (opt->count() == 0) continue;
    out << ' ' << opt->get_name() << '=';
    const auto& results = opt->results();
    for (std::size_t i = 0; i < results.size(); ++i)
      out << (i ? "," : "") << results[i];
  }
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CoxKL: Cox models integrating external risk scores via a "
               "KL-weighted partial likelihood"};
  app.require_subcommand(1);

  FitArgs fit_args;
  CLI::App* fit = app.add_subcommand(
      "fit", "Fit internal Cox, CoxKL, or CoxKL-LASSO on a dataset");
  fit->add_option("--data", fit_args.data_path,
                  "dataset CSV (id,time,status,z1,...)")
      ->required();
  fit->add_option("--scores", fit_args.score_paths,
                  "external scores CSV (repeatable)");
  fit->add_option("--eta", fit_args.eta_text,
                  "integration weights, one per score column (e.g. 1 or 0.5,2)");
  fit->add_flag("--lasso", fit_args.lasso, "L1-penalized fit");
  fit->add_option("--lambda", fit_args.lambda, "L1 penalty level");
  fit->add_option("--out", fit_args.out_path, "fit JSON output path");
  fit->add_option("--baseline", fit_args.baseline_path,
                  "also write the cumulative baseline hazard CSV");
  fit->add_flag("--allow-nonconverged", fit_args.allow_nonconverged,
                "exit 0 even when the fit is flagged non-converged");

  CvArgs cv_args;
  CLI::App* cv = app.add_subcommand(
      "cv", "Cross-validated selection of eta (and lambda) by V&VH");
  cv->add_option("--data", cv_args.data_path, "dataset CSV")->required();
  cv->add_option("--scores", cv_args.score_paths, "external scores CSV");
  cv->add_option("--eta-grid", cv_args.eta_grid_text, "comma-separated etas");
  cv->add_option("--lambda-grid", cv_args.lambda_grid_text,
                 "comma-separated decreasing lambdas");
  cv->add_flag("--lasso", cv_args.lasso,
               "tune CoxKL-LASSO (default lambda grid when none given)");
  cv->add_option("--folds", cv_args.folds, "number of folds (default 5)");
  cv->add_option("--seed", cv_args.seed, "fold RNG seed");
  cv->add_option("--out", cv_args.out_path, "CV report JSON path");

  SimulateArgs sim_args;
  CLI::App* sim = app.add_subcommand(
      "simulate", "Monte Carlo experiment for a named scenario cell");
  sim->add_option("--setting", sim_args.setting, "1 or 2 (implied by --cell)");
  sim->add_option("--cell", sim_args.cell,
                  "cell name, e.g. n50_c60_E1 or E5 (see docs)")
      ->required();
  sim->add_option("--reps", sim_args.reps, "replicates (default 500)");
  sim->add_option("--seed", sim_args.seed, "master seed");
  sim->add_option("--jobs", sim_args.jobs, "worker threads");
  sim->add_option("--folds", sim_args.folds, "CV folds per replicate");
  sim->add_option("--cv-grid", sim_args.cv_grid_text,
                  "comma-separated eta grid for CV");
  sim->add_option("--sweep-grid", sim_args.sweep_grid_text,
                  "comma-separated eta grid for sweep curves");
  sim->add_option("--n-external", sim_args.n_external,
                  "override the external cohort size");
  sim->add_option("--out", sim_args.out_dir, "output directory");

  EvaluateArgs eval_args;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "C-index of a fitted model's linear predictor on a dataset");
  evaluate->add_option("--fit", eval_args.fit_path, "fit JSON")->required();
  evaluate->add_option("--data", eval_args.data_path, "dataset CSV")
      ->required();

  KmArgs km_args;
  CLI::App* km = app.add_subcommand(
      "km", "Percentile risk groups and per-group Kaplan-Meier curves");
  km->add_option("--data", km_args.data_path, "dataset CSV")->required();
  km->add_option("--scores", km_args.scores_path, "risk scores CSV");
  km->add_option("--fit", km_args.fit_path, "fit JSON (linear predictor)");
  km->add_option("--cuts", km_args.cuts_text,
                 "percentile cutpoints (default 20,80)");
  km->add_option("--out", km_args.out_path, "KM CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // prints help, exits 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const std::string started = iso_now();
  try {
    if (*fit) return cmd_fit(fit_args, canonical_config(fit), started);
    if (*cv) return cmd_cv(cv_args, canonical_config(cv), started);
    if (*sim) return cmd_simulate(sim_args, canonical_config(sim), started);
    if (*evaluate) return cmd_evaluate(eval_args);
    if (*km) return cmd_km(km_args, canonical_config(km), started);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitUsage;
}
