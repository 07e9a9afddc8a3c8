#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "coxkl/cox.hpp"
#include "coxkl/lasso.hpp"
#include "coxkl/sim.hpp"
#include "coxkl/tuning.hpp"

namespace coxkl {

/// Fit JSON: {beta, eta, converged, iterations, objective, gradient_norm,
/// std_errors}. Lasso fits reuse the same keys plus lambda.
void write_fit_json(std::ostream& out, const CoxKLFit& fit);
void write_fit_json(std::ostream& out, const LassoFit& fit);

/// Reads the `beta` array (and optionally `eta`) back from fit JSON.
struct LoadedFit {
  Vector beta;
  std::vector<double> eta;
};
LoadedFit read_fit_json(std::istream& in);

void write_path_json(std::ostream& out, const RegularizationPath& path);

void write_cv_report_json(std::ostream& out, const CvReport& report);

void write_experiment_json(std::ostream& out, const ExperimentReport& report);

/// Table-shaped CSV: cell,method,bias,se,mse,c_index (blank where a metric
/// does not apply).
void write_experiment_table_csv(std::ostream& out,
                                const ExperimentReport& report);

/// Long-format CSV `eta,metric,value,method,cell` carrying both the
/// eta-sweep curves and the per-method summary metrics (blank eta).
void write_experiment_curves_csv(std::ostream& out,
                                 const ExperimentReport& report);

struct RunManifest {
  std::string command;
  std::string config_digest;  // stable hash of the canonicalized flags
  std::uint64_t seed = 0;
  std::string tool_version;
  std::string started;
  std::string finished;
};

std::string config_digest(const std::string& canonical_config);
void write_manifest_json(std::ostream& out, const RunManifest& manifest);

extern const char* const kToolVersion;

}  // namespace coxkl
