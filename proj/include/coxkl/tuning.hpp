#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "coxkl/coxkl.hpp"
#include "coxkl/dataset.hpp"
#include "coxkl/external_scores.hpp"
#include "coxkl/lasso.hpp"
#include "coxkl/types.hpp"

namespace coxkl {

/// {0} followed by 15 log-spaced values in [0.01, 100].
std::vector<double> default_eta_grid();

/// Fold labels 1..V. Stratified assignment deals shuffled events first and
/// shuffled censored records second, round-robin, so per-fold event counts
/// differ by at most one.
std::vector<int> make_folds(int n, int V, std::uint64_t seed,
                            bool stratify_on_events,
                            const std::vector<int>& statuses);

struct CvReport {
  std::vector<double> eta_grid;                 // scalar base grid
  std::vector<std::vector<double>> eta_combos;  // evaluated eta vectors
  std::vector<double> lambda_grid;              // empty for unpenalized fits
  Matrix cvpl;                                  // combos x max(1, lambdas)
  std::vector<double> selected_eta;
  std::optional<double> selected_lambda;
  std::vector<int> fold_assignment;
  std::uint64_t seed = 0;
  int nonconverged_fits = 0;
};

/// V&VH cross-validated partial likelihood:
/// sum_v [ l_full(beta_-v) - l_train(beta_-v) ], both terms the unpenalized
/// log-partial likelihood, with beta_-v the CoxKL (or CoxKL-LASSO when
/// lambda is given) fit excluding fold v. Larger is better.
double vvh_cvpl(const SurvivalDataset& data,
                const std::vector<ExternalScores>& exts,
                const std::vector<double>& etas, std::optional<double> lambda,
                const std::vector<int>& folds, int* nonconverged = nullptr);

struct TuningOptions {
  int folds = 5;
  bool stratify_on_events = true;
  CoxFitOptions fit;      // compute_information is forced off internally
  LassoOptions lasso;
};

/// Joint grid search: the full Cartesian product of the eta grid (one axis
/// per external score set) by the lambda grid, lambda warm-started within
/// each eta combination. Ties break toward smaller eta, then larger lambda.
CvReport select_tuning(const SurvivalDataset& data,
                       const std::vector<ExternalScores>& exts,
                       const std::vector<double>& eta_grid,
                       const std::optional<std::vector<double>>& lambda_grid,
                       int V, std::uint64_t seed, const TuningOptions& opts = {});

}  // namespace coxkl
