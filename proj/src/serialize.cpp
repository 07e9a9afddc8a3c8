#include "coxkl/serialize.hpp"

#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "text_util.hpp"

namespace coxkl {

using nlohmann::json;
using nlohmann::ordered_json;

const char* const kToolVersion = "coxkl 0.1.0";

namespace {

ordered_json vec_to_json(const Vector& v) {
  ordered_json arr = ordered_json::array();
  for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

ordered_json finite_or_null(double x) {
  if (std::isnan(x)) return nullptr;
  return x;
}

ordered_json fit_core_json(const Vector& beta, const std::vector<double>& eta,
                           bool converged, int iterations, double objective,
                           double gradient_norm) {
  ordered_json j;
  j["beta"] = vec_to_json(beta);
  j["eta"] = eta;
  j["converged"] = converged;
  j["iterations"] = iterations;
  j["objective"] = objective;
  j["gradient_norm"] = gradient_norm;
  return j;
}

}  // namespace

void write_fit_json(std::ostream& out, const CoxKLFit& fit) {
  ordered_json j = fit_core_json(fit.beta, fit.eta, fit.converged,
                                 fit.iterations, fit.objective,
                                 fit.gradient_norm);
  j["std_errors"] = fit.std_errors ? vec_to_json(*fit.std_errors)
                                   : ordered_json(nullptr);
  out << j.dump(2) << '\n';
}

void write_fit_json(std::ostream& out, const LassoFit& fit) {
  ordered_json j = fit_core_json(fit.beta, {}, fit.converged,
                                 fit.outer_iterations, fit.objective,
                                 fit.kkt_violation);
  j["std_errors"] = nullptr;
  j["lambda"] = fit.lambda;
  out << j.dump(2) << '\n';
}

LoadedFit read_fit_json(std::istream& in) {
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(std::string("fit json: ") + e.what());
  }
  if (!j.contains("beta") || !j["beta"].is_array())
    throw ParseError("fit json: missing beta array");
  LoadedFit fit;
  fit.beta.resize(static_cast<Eigen::Index>(j["beta"].size()));
  for (std::size_t i = 0; i < j["beta"].size(); ++i)
    fit.beta[static_cast<Eigen::Index>(i)] = j["beta"][i].get<double>();
  if (j.contains("eta") && j["eta"].is_array())
    fit.eta = j["eta"].get<std::vector<double>>();
  return fit;
}

void write_path_json(std::ostream& out, const RegularizationPath& path) {
  ordered_json j;
  j["lambdas"] = path.lambdas;
  j["nonzero_counts"] = path.nonzero_counts;
  j["objective_values"] = path.objective_values;
  j["converged"] = path.converged;
  ordered_json coefs = ordered_json::array();
  for (const auto& sparse : path.coefficients) {
    ordered_json entry = ordered_json::array();
    for (const auto& [idx, value] : sparse)
      entry.push_back(ordered_json{{"index", idx}, {"value", value}});
    coefs.push_back(std::move(entry));
  }
  j["coefficients"] = std::move(coefs);
  out << j.dump(2) << '\n';
}

void write_cv_report_json(std::ostream& out, const CvReport& report) {
  ordered_json j;
  j["eta_grid"] = report.eta_grid;
  j["eta_combos"] = report.eta_combos;
  j["lambda_grid"] = report.lambda_grid.empty()
                         ? ordered_json(nullptr)
                         : ordered_json(report.lambda_grid);
  ordered_json cvpl = ordered_json::array();
  for (int ci = 0; ci < report.cvpl.rows(); ++ci) {
    ordered_json row = ordered_json::array();
    for (int li = 0; li < report.cvpl.cols(); ++li)
      row.push_back(report.cvpl(ci, li));
    cvpl.push_back(std::move(row));
  }
  j["cvpl"] = std::move(cvpl);
  j["selected_eta"] = report.selected_eta.size() == 1
                          ? ordered_json(report.selected_eta[0])
                          : ordered_json(report.selected_eta);
  j["selected_lambda"] =
      report.selected_lambda ? ordered_json(*report.selected_lambda) : ordered_json(nullptr);
  j["seed"] = report.seed;
  std::vector<int> fold_sizes;
  for (int f : report.fold_assignment) {
    if (f > static_cast<int>(fold_sizes.size())) fold_sizes.resize(f, 0);
    ++fold_sizes[f - 1];
  }
  j["fold_sizes"] = fold_sizes;
  j["fold_assignment"] = report.fold_assignment;
  j["nonconverged_fits"] = report.nonconverged_fits;
  out << j.dump(2) << '\n';
}

void write_experiment_json(std::ostream& out, const ExperimentReport& report) {
  ordered_json j;
  j["cell"] = report.cell;
  j["setting"] = report.setting;
  j["replicates"] = report.replicates;
  j["completed"] = report.completed;
  j["failed"] = report.failed;
  j["seed"] = report.seed;
  j["censor_upper"] = std::isfinite(report.censor_upper)
                          ? ordered_json(report.censor_upper)
                          : ordered_json(nullptr);
  j["aggregation"] = report.aggregation;
  ordered_json methods = ordered_json::array();
  for (const MethodSummary& m : report.methods) {
    ordered_json jm;
    jm["method"] = m.method;
    jm["bias"] = finite_or_null(m.bias);
    jm["se"] = finite_or_null(m.se);
    jm["mse"] = finite_or_null(m.mse);
    jm["c_index_mean"] = finite_or_null(m.c_mean);
    jm["c_index_median"] = finite_or_null(m.c_median);
    jm["c_index_q25"] = finite_or_null(m.c_q25);
    jm["c_index_q75"] = finite_or_null(m.c_q75);
    if (!m.selected_eta_mean.empty()) {
      jm["selected_eta_mean"] = m.selected_eta_mean;
      jm["selected_eta_median"] = m.selected_eta_median;
    }
    methods.push_back(std::move(jm));
  }
  j["methods"] = std::move(methods);
  ordered_json sweep = ordered_json::array();
  for (const SweepPoint& pt : report.sweep)
    sweep.push_back(ordered_json{{"eta", pt.eta}, {"mse", pt.mse}, {"c_index", pt.c_mean}});
  j["sweep"] = std::move(sweep);
  out << j.dump(2) << '\n';
}

namespace {

std::string csv_number(double x) {
  if (std::isnan(x)) return "";
  return detail::format_double(x);
}

}  // namespace

void write_experiment_table_csv(std::ostream& out,
                                const ExperimentReport& report) {
  out << "cell,method,bias,se,mse,c_index\n";
  for (const MethodSummary& m : report.methods) {
    out << report.cell << ',' << m.method << ',' << csv_number(m.bias) << ','
        << csv_number(m.se) << ',' << csv_number(m.mse) << ','
        << csv_number(m.c_mean) << '\n';
  }
}

void write_experiment_curves_csv(std::ostream& out,
                                 const ExperimentReport& report) {
  out << "eta,metric,value,method,cell\n";
  for (const SweepPoint& pt : report.sweep) {
    out << detail::format_double(pt.eta) << ",mse,"
        << detail::format_double(pt.mse) << ",coxkl," << report.cell << '\n';
    out << detail::format_double(pt.eta) << ",c_index,"
        << detail::format_double(pt.c_mean) << ",coxkl," << report.cell << '\n';
  }
  for (const MethodSummary& m : report.methods) {
    if (!std::isnan(m.mse))
      out << ",mse," << detail::format_double(m.mse) << ',' << m.method << ','
          << report.cell << '\n';
    if (!std::isnan(m.c_mean))
      out << ",c_index," << detail::format_double(m.c_mean) << ',' << m.method
          << ',' << report.cell << '\n';
    if (!std::isnan(m.c_median))
      out << ",c_index_median," << detail::format_double(m.c_median) << ','
          << m.method << ',' << report.cell << '\n';
    for (std::size_t i = 0; i < m.selected_eta_median.size(); ++i)
      out << ",selected_eta_median_" << i + 1 << ','
          << detail::format_double(m.selected_eta_median[i]) << ',' << m.method
          << ',' << report.cell << '\n';
  }
}

std::string config_digest(const std::string& canonical_config) {
  std::ostringstream hex;
  hex << std::hex << std::setw(16) << std::setfill('0')
      << detail::fnv1a(canonical_config);
  return hex.str();
}

void write_manifest_json(std::ostream& out, const RunManifest& manifest) {
  ordered_json j;
  j["command"] = manifest.command;
  j["config_digest"] = manifest.config_digest;
  j["seed"] = manifest.seed;
  j["tool_version"] = manifest.tool_version;
  j["started"] = manifest.started;
  j["finished"] = manifest.finished;
  out << j.dump(2) << '\n';
}

}  // namespace coxkl
