#include "coxkl/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "coxkl/rng.hpp"

namespace coxkl {

std::vector<double> default_eta_grid() {
  std::vector<double> grid{0.0};
  for (int t = 0; t < 15; ++t)
    grid.push_back(std::pow(10.0, -2.0 + 4.0 * t / 14.0));
  return grid;
}

std::vector<int> make_folds(int n, int V, std::uint64_t seed,
                            bool stratify_on_events,
                            const std::vector<int>& statuses) {
  if (V < 2 || V > n)
    throw ValidationError("make_folds: need 2 <= V <= n");
  if (stratify_on_events && static_cast<int>(statuses.size()) != n)
    throw ValidationError("make_folds: statuses length != n");

  std::mt19937_64 rng = make_rng(seed, 0x666f6c64);  // "fold"
  std::vector<int> fold(n, 0);
  auto deal = [&](std::vector<int>& idx, int& next) {
    std::shuffle(idx.begin(), idx.end(), rng);
    for (int i : idx) fold[i] = (next++ % V) + 1;
  };

  int next = 0;
  if (stratify_on_events) {
    std::vector<int> events, censored;
    for (int i = 0; i < n; ++i)
      (statuses[i] == 1 ? events : censored).push_back(i);
    deal(events, next);
    deal(censored, next);
  } else {
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    deal(all, next);
  }
  return fold;
}

namespace {

struct FoldData {
  SurvivalDataset train;
  std::vector<ExternalScores> exts;
  std::vector<PseudoCovariates> pseudo;
};

FoldData build_fold(const SurvivalDataset& data,
                    const std::vector<ExternalScores>& exts,
                    const std::vector<int>& folds, int v) {
  std::vector<int> keep;
  for (int i = 0; i < data.n(); ++i)
    if (folds[i] != v) keep.push_back(i);
  FoldData fd{data.subset(keep), {}, {}};
  fd.exts.reserve(exts.size());
  fd.pseudo.reserve(exts.size());
  for (const ExternalScores& ext : exts) {
    fd.exts.push_back(ext.subset(keep));
    fd.pseudo.push_back(external_weighted_covariates(fd.train, fd.exts.back()));
  }
  return fd;
}

int fold_count(const std::vector<int>& folds) {
  int V = 0;
  for (int f : folds) V = std::max(V, f);
  return V;
}

}  // namespace

double vvh_cvpl(const SurvivalDataset& data,
                const std::vector<ExternalScores>& exts,
                const std::vector<double>& etas, std::optional<double> lambda,
                const std::vector<int>& folds, int* nonconverged) {
  if (static_cast<int>(folds.size()) != data.n())
    throw ValidationError("vvh_cvpl: fold assignment length != n");
  const int V = fold_count(folds);

  double criterion = 0.0;
  for (int v = 1; v <= V; ++v) {
    FoldData fd = build_fold(data, exts, folds, v);
    Vector beta;
    bool converged = false;
    if (lambda) {
      LassoFit fit = fit_coxkl_lasso(fd.train, fd.exts, etas, *lambda);
      beta = fit.beta;
      converged = fit.converged;
    } else {
      CoxFitOptions opts;
      opts.compute_information = false;
      CoxKLFit fit = fit_coxkl(fd.train, fd.pseudo, etas, opts);
      beta = fit.beta;
      converged = fit.converged;
    }
    if (!converged && nonconverged) ++(*nonconverged);
    criterion +=
        log_partial_likelihood(data, beta) - log_partial_likelihood(fd.train, beta);
  }
  return criterion;
}

CvReport select_tuning(const SurvivalDataset& data,
                       const std::vector<ExternalScores>& exts,
                       const std::vector<double>& eta_grid,
                       const std::optional<std::vector<double>>& lambda_grid,
                       int V, std::uint64_t seed, const TuningOptions& opts) {
  if (eta_grid.empty())
    throw ValidationError("select_tuning: empty eta grid");
  for (double eta : eta_grid)
    if (!(eta >= 0.0))
      throw ValidationError("select_tuning: eta grid values must be >= 0");
  if (lambda_grid) {
    if (lambda_grid->empty())
      throw ValidationError("select_tuning: empty lambda grid");
    for (std::size_t t = 0; t < lambda_grid->size(); ++t) {
      if (!((*lambda_grid)[t] > 0.0))
        throw ValidationError("select_tuning: lambda grid values must be > 0");
      if (t > 0 && !((*lambda_grid)[t] < (*lambda_grid)[t - 1]))
        throw ValidationError("select_tuning: lambda grid must be decreasing");
    }
  }

  CvReport report;
  report.seed = seed;
  report.eta_grid = eta_grid;
  if (lambda_grid) report.lambda_grid = *lambda_grid;
  report.fold_assignment =
      make_folds(data.n(), V, seed, opts.stratify_on_events, data.statuses());

  // Cartesian product, one axis per external score set, first axis slowest
  // (lexicographically ascending, matching the tie-break rule). With no
  // externals the selection degenerates to the lambda axis alone.
  const int m = static_cast<int>(exts.size());
  const int g = static_cast<int>(eta_grid.size());
  int combos = 1;
  for (int axis = 0; axis < m; ++axis) combos *= g;
  report.eta_combos.reserve(combos);
  for (int ci = 0; ci < combos; ++ci) {
    std::vector<double> combo(m);
    int rem = ci;
    for (int axis = m - 1; axis >= 0; --axis) {
      combo[axis] = eta_grid[rem % g];
      rem /= g;
    }
    report.eta_combos.push_back(std::move(combo));
  }

  const int L = lambda_grid ? static_cast<int>(lambda_grid->size()) : 1;
  report.cvpl = Matrix::Zero(combos, L);

  CoxFitOptions fit_opts = opts.fit;
  fit_opts.compute_information = false;

  for (int v = 1; v <= V; ++v) {
    FoldData fd = build_fold(data, exts, report.fold_assignment, v);
    for (int ci = 0; ci < combos; ++ci) {
      const std::vector<double>& combo = report.eta_combos[ci];
      if (lambda_grid) {
        LassoSolver solver(fd.train, fd.exts, combo, opts.lasso);
        Vector warm = Vector::Zero(fd.train.p());
        for (int li = 0; li < L; ++li) {
          LassoFit fit = solver.fit((*lambda_grid)[li], &warm);
          warm = fit.beta;
          if (!fit.converged) ++report.nonconverged_fits;
          report.cvpl(ci, li) += log_partial_likelihood(data, fit.beta) -
                                 log_partial_likelihood(fd.train, fit.beta);
        }
      } else {
        CoxKLFit fit = fit_coxkl(fd.train, fd.pseudo, combo, fit_opts);
        if (!fit.converged) ++report.nonconverged_fits;
        report.cvpl(ci, 0) += log_partial_likelihood(data, fit.beta) -
                              log_partial_likelihood(fd.train, fit.beta);
      }
    }
  }

  // Maximize; scan order (ascending eta, descending lambda) plus strict
  // improvement keeps ties at the smaller eta / larger lambda.
  int best_ci = 0, best_li = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (int ci = 0; ci < combos; ++ci)
    for (int li = 0; li < L; ++li)
      if (report.cvpl(ci, li) > best) {
        best = report.cvpl(ci, li);
        best_ci = ci;
        best_li = li;
      }
  report.selected_eta = report.eta_combos[best_ci];
  if (lambda_grid) report.selected_lambda = (*lambda_grid)[best_li];
  return report;
}

}  // namespace coxkl
