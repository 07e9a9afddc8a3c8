#pragma once

#include <optional>
#include <vector>

#include "coxkl/dataset.hpp"
#include "coxkl/types.hpp"

namespace coxkl {

struct CoxFitOptions {
  int max_iterations = 100;
  double objective_tolerance = 1e-9;  // relative objective change
  double gradient_tolerance = 1e-8;   // sup-norm of the per-n score
  int step_halving_max = 20;
  bool compute_information = true;
};

/// Result of a (penalized) partial-likelihood fit. `eta` is empty for the
/// internal-only Cox fit. `objective` is the unscaled final objective;
/// `gradient_norm` the sup-norm of the per-n score at `beta`. `information`
/// holds the unscaled observed information at `beta` when requested;
/// `ridged` marks a ridge-stabilized information solve.
struct CoxKLFit {
  Vector beta;
  std::vector<double> eta;
  bool converged = false;
  int iterations = 0;
  double objective = 0.0;
  double gradient_norm = 0.0;
  bool ridged = false;
  std::optional<Matrix> information;
  std::optional<Vector> std_errors;
};

/// Breslow log-partial likelihood, max-shift stabilized denominators.
double log_partial_likelihood(const SurvivalDataset& data, const Vector& beta);

/// Score vector and observed information of the log-partial likelihood at
/// beta (unscaled sums over event times).
std::pair<Vector, Matrix> score_and_information(const SurvivalDataset& data,
                                                const Vector& beta);

/// Newton-Raphson maximum partial likelihood fit. Monotone-likelihood
/// divergence is reported via converged=false, never thrown.
CoxKLFit fit_cox(const SurvivalDataset& data, const CoxFitOptions& opts = {});

}  // namespace coxkl
