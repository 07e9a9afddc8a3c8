#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "coxkl/coxkl.hpp"
#include "coxkl/dataset.hpp"
#include "coxkl/external_scores.hpp"
#include "coxkl/types.hpp"

namespace coxkl {

struct LassoOptions {
  int max_outer_iterations = 100;
  int max_inner_sweeps = 1000;
  double inner_tolerance = 1e-8;  // max coefficient change per sweep
  double kkt_tolerance = 1e-6;    // on the per-n gradient
};

/// Solution at one lambda. `objective` is l_eta(beta)/n - lambda*||beta||_1;
/// `kkt_violation` the largest stationarity residual at return.
struct LassoFit {
  Vector beta;
  double lambda = 0.0;
  bool converged = false;
  int outer_iterations = 0;
  double objective = 0.0;
  double kkt_violation = 0.0;
};

struct RegularizationPath {
  std::vector<double> lambdas;  // strictly decreasing
  std::vector<std::vector<std::pair<int, double>>> coefficients;  // sparse
  std::vector<int> nonzero_counts;
  std::vector<double> objective_values;
  std::vector<bool> converged;

  Vector dense_coefficients(int idx, int p) const;
};

/// L1-penalized maximizer of the KL-penalized partial likelihood,
/// glmnet-style: outer Newton surrogate with per-subject curvature weights,
/// inner cyclic coordinate descent over an active set, exact-gradient KKT
/// sweep before accepting a solution. Reusable across lambdas (warm starts)
/// because the numerator weights and risk bookkeeping are independent of
/// both beta and lambda.
class LassoSolver {
 public:
  LassoSolver(const SurvivalDataset& data,
              const std::vector<ExternalScores>& exts,
              std::vector<double> etas, LassoOptions opts = {});
  ~LassoSolver();
  LassoSolver(LassoSolver&&) noexcept;
  LassoSolver& operator=(LassoSolver&&) noexcept;

  /// Sup-norm of the per-n gradient at beta = 0; any lambda at or above it
  /// yields the exact zero solution.
  double lambda_max() const;

  /// Constant covariates, pinned at coefficient 0.
  const std::vector<int>& pinned_covariates() const;

  LassoFit fit(double lambda, const Vector* warm_start = nullptr) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

double lambda_max(const SurvivalDataset& data,
                  const std::vector<ExternalScores>& exts,
                  const std::vector<double>& etas);

LassoFit fit_coxkl_lasso(const SurvivalDataset& data,
                         const std::vector<ExternalScores>& exts,
                         const std::vector<double>& etas, double lambda,
                         std::optional<Vector> warm_start = std::nullopt,
                         const LassoOptions& opts = {});

/// Log-spaced grid from lambda_max down to ratio*lambda_max. ratio <= 0
/// picks the default: 0.05 when n < p, 1e-4 otherwise.
std::vector<double> lambda_grid(const SurvivalDataset& data,
                                const std::vector<ExternalScores>& exts,
                                const std::vector<double>& etas,
                                int n_lambda = 100,
                                double lambda_min_ratio = 0.0);

RegularizationPath lasso_path(const SurvivalDataset& data,
                              const std::vector<ExternalScores>& exts,
                              const std::vector<double>& etas,
                              int n_lambda = 100, double lambda_min_ratio = 0.0,
                              const LassoOptions& opts = {});

}  // namespace coxkl
