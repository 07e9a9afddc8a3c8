#include "pl_kernel.hpp"

#include <cmath>
#include <limits>

namespace coxkl::detail {

namespace {

constexpr double kDivergenceBound = 1e3;  // sup-norm guard for separation

// Incremental risk-set accumulator over the descending-time order. The
// shift tracks the running max of lp within the accumulated prefix, so
// exp() arguments stay nonpositive.
struct RiskAccumulator {
  double s0 = 0.0;
  Vector s1;
  Matrix s2;
  double shift = -std::numeric_limits<double>::infinity();
  int order = 0;  // 0: s0 only, 1: +s1, 2: +s2

  explicit RiskAccumulator(int p, int order_) : order(order_) {
    if (order >= 1) s1 = Vector::Zero(p);
    if (order >= 2) s2 = Matrix::Zero(p, p);
  }

  void add(double lp, const Eigen::Ref<const Eigen::RowVectorXd>& z) {
    if (lp > shift) {
      const double r = std::exp(shift - lp);
      s0 *= r;
      if (order >= 1) s1 *= r;
      if (order >= 2) s2 *= r;
      shift = lp;
    }
    const double w = std::exp(lp - shift);
    s0 += w;
    if (order >= 1) s1 += w * z.transpose();
    if (order >= 2) s2.selfadjointView<Eigen::Lower>().rankUpdate(z.transpose(), w);
  }

  double log_s0() const { return shift + std::log(s0); }
};

}  // namespace

Matrix cox_event_numerators(const SurvivalDataset& data) {
  const int K = data.num_event_times();
  Matrix nu = Matrix::Zero(K, data.p());
  for (int k = 0; k < K; ++k)
    for (int i : data.events_at(k)) nu.row(k) += data.covariates().row(i);
  return nu;
}

std::vector<double> risk_log_denominators(const SurvivalDataset& data,
                                          const Vector& lp) {
  const int K = data.num_event_times();
  const std::vector<int>& order = data.rows_by_time_desc();
  std::vector<double> out(K);
  RiskAccumulator acc(data.p(), 0);
  int added = 0;
  for (int k = K - 1; k >= 0; --k) {
    while (added < data.risk_count(k))
      acc.add(lp[order[added]], data.covariates().row(order[added])), ++added;
    out[k] = acc.log_s0();
  }
  return out;
}

double pl_objective(const SurvivalDataset& data, const Matrix& numerators,
                    const Vector& beta) {
  const Vector lp = data.covariates() * beta;
  const std::vector<double> log_denom = risk_log_denominators(data, lp);
  double obj = 0.0;
  for (int k = 0; k < data.num_event_times(); ++k)
    obj += numerators.row(k).dot(beta) - data.event_count_at(k) * log_denom[k];
  return obj;
}

Vector pl_score(const SurvivalDataset& data, const Matrix& numerators,
                const Vector& beta) {
  const int K = data.num_event_times();
  const std::vector<int>& order = data.rows_by_time_desc();
  const Vector lp = data.covariates() * beta;

  Vector score = Vector::Zero(data.p());
  RiskAccumulator acc(data.p(), 1);
  int added = 0;
  for (int k = K - 1; k >= 0; --k) {
    while (added < data.risk_count(k))
      acc.add(lp[order[added]], data.covariates().row(order[added])), ++added;
    score += numerators.row(k).transpose() -
             data.event_count_at(k) * (acc.s1 / acc.s0);
  }
  return score;
}

std::pair<Vector, Matrix> pl_score_info(const SurvivalDataset& data,
                                        const Matrix& numerators,
                                        const Vector& beta) {
  const int K = data.num_event_times();
  const int p = data.p();
  const std::vector<int>& order = data.rows_by_time_desc();
  const Vector lp = data.covariates() * beta;

  Vector score = Vector::Zero(p);
  Matrix info = Matrix::Zero(p, p);
  RiskAccumulator acc(p, 2);
  int added = 0;
  for (int k = K - 1; k >= 0; --k) {
    while (added < data.risk_count(k))
      acc.add(lp[order[added]], data.covariates().row(order[added])), ++added;
    const double d = data.event_count_at(k);
    const Vector mean = acc.s1 / acc.s0;
    score += numerators.row(k).transpose() - d * mean;
    info += d * (Matrix(acc.s2.selfadjointView<Eigen::Lower>()) / acc.s0 -
                 mean * mean.transpose());
  }
  return {std::move(score), std::move(info)};
}

namespace {

// A vanishing per-coordinate information relative to beta = 0, with the
// coordinate drifting away from 0, marks a monotone-likelihood direction:
// the score criterion is met only because the risk sets degenerated.
bool separation_suspected(const Vector& beta, const Vector& info_diag,
                          const Vector& info0_diag) {
  for (int j = 0; j < beta.size(); ++j)
    if (std::abs(beta[j]) > 1e-8 && info0_diag[j] > 0.0 &&
        info_diag[j] < 1e-5 * info0_diag[j])
      return true;
  return false;
}

}  // namespace

CoxKLFit newton_fit(const SurvivalDataset& data, const Matrix& numerators,
                    std::vector<double> etas, const CoxFitOptions& opts) {
  const int p = data.p();
  const int n = data.n();
  if (p == 0) throw ValidationError("fit: dataset has no covariates");

  // Constant covariates carry no partial-likelihood information; pin their
  // coefficients at zero so the null direction cannot pollute the solve.
  std::vector<int> pinned;
  for (int j = 0; j < p; ++j) {
    const auto col = data.covariates().col(j);
    if ((col.array() == col[0]).all()) pinned.push_back(j);
  }
  auto apply_pins = [&](Vector& score, Matrix* info) {
    for (int j : pinned) {
      score[j] = 0.0;
      if (info) {
        info->row(j).setZero();
        info->col(j).setZero();
        (*info)(j, j) = 1.0;
      }
    }
  };

  CoxKLFit fit;
  fit.eta = std::move(etas);
  fit.beta = Vector::Zero(p);
  fit.objective = pl_objective(data, numerators, fit.beta);

  Vector score;
  Matrix info;
  Vector info0_diag;
  bool have_score_info = false;
  int stalls = 0;

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    std::tie(score, info) = pl_score_info(data, numerators, fit.beta);
    apply_pins(score, &info);
    have_score_info = true;
    if (iter == 0) info0_diag = info.diagonal();
    fit.gradient_norm = score.lpNorm<Eigen::Infinity>() / n;
    if (fit.gradient_norm <= opts.gradient_tolerance) {
      fit.converged =
          !separation_suspected(fit.beta, info.diagonal(), info0_diag);
      break;
    }

    Eigen::LDLT<Matrix> ldlt(info);
    Vector delta = ldlt.solve(score);
    const bool unreliable =
        !delta.allFinite() || ldlt.info() != Eigen::Success ||
        ldlt.rcond() < 1e-12;
    if (unreliable) {
      const double ridge = std::max(1e-10 * info.trace() / p, 1e-12);
      delta = (info + ridge * Matrix::Identity(p, p)).ldlt().solve(score);
      fit.ridged = true;
      if (!delta.allFinite()) break;  // hopeless direction; report last iterate
    }

    double cand_obj = pl_objective(data, numerators, fit.beta + delta);
    int halvings = 0;
    while ((!std::isfinite(cand_obj) || cand_obj < fit.objective) &&
           halvings < opts.step_halving_max) {
      delta *= 0.5;
      cand_obj = pl_objective(data, numerators, fit.beta + delta);
      ++halvings;
    }
    if (!std::isfinite(cand_obj) || cand_obj < fit.objective) break;  // stalled

    fit.beta += delta;
    fit.iterations = iter + 1;
    const double rel_change =
        std::abs(cand_obj - fit.objective) / (std::abs(cand_obj) + 1.0);
    fit.objective = cand_obj;
    have_score_info = false;

    if (fit.beta.lpNorm<Eigen::Infinity>() > kDivergenceBound) break;

    // Single tiny objective steps still happen one Newton step short of
    // stationarity on large datasets; exit only on a repeated stall.
    stalls = rel_change < opts.objective_tolerance ? stalls + 1 : 0;
    if (stalls >= 2) {
      std::tie(score, info) = pl_score_info(data, numerators, fit.beta);
      apply_pins(score, &info);
      have_score_info = true;
      fit.gradient_norm = score.lpNorm<Eigen::Infinity>() / n;
      fit.converged =
          fit.gradient_norm <= opts.gradient_tolerance &&
          !separation_suspected(fit.beta, info.diagonal(), info0_diag);
      break;
    }
  }

  if (opts.compute_information) {
    // Report the raw observed information (pins only steer the solver).
    std::tie(score, info) = pl_score_info(data, numerators, fit.beta);
    apply_pins(score, nullptr);
    fit.gradient_norm = score.lpNorm<Eigen::Infinity>() / n;
    (void)have_score_info;
    const Matrix identity = Matrix::Identity(p, p);
    Matrix inv = info.ldlt().solve(identity);
    const bool bad_solve =
        !inv.allFinite() || (inv.diagonal().array() < 0.0).any() ||
        (info * inv - identity).cwiseAbs().maxCoeff() > 1e-6;
    if (bad_solve) {
      const double ridge = std::max(1e-10 * info.trace() / p, 1e-12);
      inv = (info + ridge * identity).ldlt().solve(identity);
      fit.ridged = true;
    }
    fit.information = info;
    if (inv.allFinite())
      fit.std_errors = inv.diagonal().array().max(0.0).sqrt().matrix();
  }
  return fit;
}

}  // namespace coxkl::detail
