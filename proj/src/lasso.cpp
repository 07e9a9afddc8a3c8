#include "coxkl/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pl_kernel.hpp"

namespace coxkl {

namespace {

constexpr double kLpRangeBound = 500.0;  // linear-predictor spread guard
constexpr double kCurvatureFloor = 1e-12;

double soft_threshold(double x, double lambda) {
  if (x > lambda) return x - lambda;
  if (x < -lambda) return x + lambda;
  return 0.0;
}

void validate_etas(const std::vector<double>& etas, std::size_t m) {
  if (etas.size() != m)
    throw ValidationError("lasso: " + std::to_string(etas.size()) +
                          " eta values for " + std::to_string(m) +
                          " external score sets");
  for (double eta : etas)
    if (!(eta >= 0.0) || !std::isfinite(eta))
      throw ValidationError("lasso: eta must be nonnegative and finite");
}

}  // namespace

Vector RegularizationPath::dense_coefficients(int idx, int p) const {
  Vector beta = Vector::Zero(p);
  for (const auto& [j, value] : coefficients[idx]) beta[j] = value;
  return beta;
}

struct LassoSolver::Impl {
  const SurvivalDataset* data;
  LassoOptions opts;
  std::vector<double> etas;
  int n, p, K;
  double events_total;

  Vector c;  // per-subject numerator weight: sum_k nu_k' beta == c' Z beta
  std::vector<double> d;           // events per event time
  std::vector<int> subject_k;      // last event-time index <= X_i, or -1
  std::vector<char> constant_col;  // pinned covariates
  std::vector<int> pinned;
  double lmax = 0.0;

  // Scratch, reused across fits (fit is logically const; scratch mutable
  // through the Impl pointer held by a const solver is avoided by keeping
  // fit state local).

  Impl(const SurvivalDataset& data_, const std::vector<ExternalScores>& exts,
       std::vector<double> etas_, LassoOptions opts_)
      : data(&data_), opts(opts_), etas(std::move(etas_)) {
    validate_etas(etas, exts.size());
    n = data->n();
    p = data->p();
    K = data->num_event_times();
    if (p == 0) throw ValidationError("lasso: dataset has no covariates");
    for (const ExternalScores& ext : exts) ext.check_alignment(*data);

    d.resize(K);
    events_total = 0.0;
    for (int k = 0; k < K; ++k) {
      d[k] = data->event_count_at(k);
      events_total += d[k];
    }

    // subject_k via merge over ascending times.
    std::vector<int> asc(data->rows_by_time_desc().rbegin(),
                         data->rows_by_time_desc().rend());
    subject_k.assign(n, -1);
    {
      int k = -1;
      for (int i : asc) {
        while (k + 1 < K && data->event_times()[k + 1] <= data->time(i)) ++k;
        subject_k[i] = k;
      }
    }

    // Numerator weights c: event indicator plus, per external, the
    // risk-set mass the subject's score claims at each event time it is
    // at risk for (these are the row sums of the pseudo-covariate
    // construction).
    c = Vector::Zero(n);
    for (int i = 0; i < n; ++i) c[i] = data->status(i);
    double eta_sum = 0.0;
    for (std::size_t m = 0; m < exts.size(); ++m) {
      eta_sum += etas[m];
      if (etas[m] == 0.0) continue;
      Vector r = exts[m].scores();
      const double span = r.maxCoeff() - r.minCoeff();
      if (!(span <= 250.0))
        throw ValidationError("lasso: external score range too large ('" +
                              exts[m].label() + "')");
      r.array() -= r.maxCoeff();  // weights are shift-invariant
      const std::vector<double> log_w = detail::risk_log_denominators(*data, r);
      std::vector<double> cum(K);
      double acc = 0.0;
      for (int k = 0; k < K; ++k) {
        acc += d[k] * std::exp(-log_w[k]);
        cum[k] = acc;
      }
      for (int i = 0; i < n; ++i)
        if (subject_k[i] >= 0)
          c[i] += etas[m] * std::exp(r[i]) * cum[subject_k[i]];
    }
    c /= (1.0 + eta_sum);

    constant_col.assign(p, 0);
    for (int j = 0; j < p; ++j) {
      const auto col = data->covariates().col(j);
      if ((col.array() == col[0]).all()) {
        constant_col[j] = 1;
        pinned.push_back(j);
      }
    }

    lmax = gradient_at_zero().lpNorm<Eigen::Infinity>();
  }

  // Model state at a given beta.
  struct State {
    Vector lp;       // Z beta, shifted so max = 0
    double lp_shift; // subtracted max
    Vector g;        // per-subject death mass
    Vector w;        // curvature weights, >= 0
    Vector score;    // per-n gradient
    double loglik;   // l_eta(beta), unscaled
    bool stable = true;
  };

  void risk_masses(const Vector& lp_shifted, Vector& g, Vector* h) const {
    const std::vector<double> log_s0 =
        detail::risk_log_denominators(*data, lp_shifted);
    std::vector<double> cum1(K), cum2(K);
    double a1 = 0.0, a2 = 0.0;
    for (int k = 0; k < K; ++k) {
      a1 += d[k] * std::exp(-log_s0[k]);
      a2 += d[k] * std::exp(-2.0 * log_s0[k]);
      cum1[k] = a1;
      cum2[k] = a2;
    }
    g.resize(n);
    if (h) h->resize(n);
    for (int i = 0; i < n; ++i) {
      const int k = subject_k[i];
      if (k < 0) {
        g[i] = 0.0;
        if (h) (*h)[i] = 0.0;
        continue;
      }
      g[i] = std::exp(lp_shifted[i]) * cum1[k];
      if (h) (*h)[i] = std::exp(2.0 * lp_shifted[i]) * cum2[k];
    }
  }

  double loglik_from(const Vector& lp_shifted, double lp_shift) const {
    const std::vector<double> log_s0 =
        detail::risk_log_denominators(*data, lp_shifted);
    double obj = c.dot(lp_shifted) + events_total * lp_shift;
    for (int k = 0; k < K; ++k) obj -= d[k] * (log_s0[k] + lp_shift);
    return obj;
  }

  Vector linear_predictor(const Vector& beta) const {
    Vector lp = Vector::Zero(n);
    for (int j = 0; j < p; ++j)
      if (beta[j] != 0.0) lp += beta[j] * data->covariates().col(j);
    return lp;
  }

  State state_at(const Vector& beta, bool need_weights) const {
    State s;
    s.lp = linear_predictor(beta);
    const double span = s.lp.maxCoeff() - s.lp.minCoeff();
    if (!(span <= kLpRangeBound)) {
      s.stable = false;
      return s;
    }
    s.lp_shift = s.lp.maxCoeff();
    s.lp.array() -= s.lp_shift;
    Vector h;
    risk_masses(s.lp, s.g, need_weights ? &h : nullptr);
    if (need_weights) s.w = (s.g - h).cwiseMax(0.0);
    s.score = data->covariates().transpose() * (c - s.g) / n;
    for (int j : pinned) s.score[j] = 0.0;  // identically zero for constants
    s.loglik = loglik_from(s.lp, s.lp_shift);
    return s;
  }

  Vector gradient_at_zero() const {
    Vector zero = Vector::Zero(p);
    return state_at(zero, false).score;
  }

  double objective_at(const Vector& beta, double lambda) const {
    Vector lp = linear_predictor(beta);
    const double shift = lp.maxCoeff();
    lp.array() -= shift;
    return loglik_from(lp, shift) / n - lambda * beta.lpNorm<1>();
  }

  double kkt_violation(const Vector& beta, const Vector& score,
                       double lambda) const {
    double viol = 0.0;
    for (int j = 0; j < p; ++j) {
      if (beta[j] != 0.0)
        viol = std::max(viol, std::abs(score[j] - lambda * (beta[j] > 0 ? 1.0 : -1.0)));
      else
        viol = std::max(viol, std::abs(score[j]) - lambda);
    }
    return std::max(viol, 0.0);
  }

  LassoFit run(double lambda, const Vector* warm) const {
    LassoFit fit;
    fit.lambda = lambda;
    fit.beta = warm ? *warm : Vector::Zero(p);
    if (warm && warm->size() != p)
      throw ValidationError("lasso: warm start length != p");
    for (int j : pinned) fit.beta[j] = 0.0;

    const Matrix& Z = data->covariates();
    Vector v(n), wv(n);

    for (int outer = 0;; ++outer) {
      State s = state_at(fit.beta, true);
      if (!s.stable) {
        fit.converged = false;
        fit.kkt_violation = std::numeric_limits<double>::infinity();
        fit.objective = -std::numeric_limits<double>::infinity();
        fit.outer_iterations = outer;
        return fit;
      }
      fit.objective = s.loglik / n - lambda * fit.beta.lpNorm<1>();
      fit.kkt_violation = kkt_violation(fit.beta, s.score, lambda);
      fit.outer_iterations = outer;
      if (fit.kkt_violation <= opts.kkt_tolerance) {
        fit.converged = true;
        return fit;
      }
      if (outer >= opts.max_outer_iterations) return fit;  // flagged

      // Active set: current support plus the worst strict violators. New
      // entries per outer pass are capped so a dense low-lambda gradient
      // cannot flood the inner solve; the full KKT sweep above still gates
      // acceptance, so screening only affects scheduling.
      std::vector<int> active;
      std::vector<std::pair<double, int>> violators;
      for (int j = 0; j < p; ++j) {
        if (constant_col[j]) continue;
        if (fit.beta[j] != 0.0)
          active.push_back(j);
        else if (std::abs(s.score[j]) > lambda)
          violators.emplace_back(std::abs(s.score[j]) - lambda, j);
      }
      const std::size_t cap =
          std::max<std::size_t>(500, 2 * active.size());
      if (violators.size() > cap) {
        std::nth_element(violators.begin(), violators.begin() + cap,
                         violators.end(), std::greater<>());
        violators.resize(cap);
      }
      for (const auto& [gap, j] : violators) active.push_back(j);
      std::sort(active.begin(), active.end());
      if (active.empty()) {
        fit.converged = true;  // nothing exceeds the penalty
        return fit;
      }

      std::vector<double> curv(active.size());
      for (std::size_t a = 0; a < active.size(); ++a)
        curv[a] =
            Z.col(active[a]).array().square().matrix().dot(s.w) / n;

      // Cyclic coordinate descent on the quadratic surrogate anchored at
      // the current beta; v tracks Z * (beta_new - beta_anchor).
      Vector beta_new = fit.beta;
      v.setZero();
      for (int sweep = 0; sweep < opts.max_inner_sweeps; ++sweep) {
        double max_delta = 0.0;
        wv = s.w.cwiseProduct(v);
        for (std::size_t a = 0; a < active.size(); ++a) {
          const int j = active[a];
          if (curv[a] <= kCurvatureFloor) continue;
          const double slope = s.score[j] - Z.col(j).dot(wv) / n;
          const double target =
              soft_threshold(curv[a] * beta_new[j] + slope, lambda) / curv[a];
          const double delta = target - beta_new[j];
          if (delta != 0.0) {
            v += delta * Z.col(j);
            wv += delta * s.w.cwiseProduct(Z.col(j));
            beta_new[j] = target;
            max_delta = std::max(max_delta, std::abs(delta));
          }
        }
        if (max_delta < opts.inner_tolerance) break;
      }

      // Accept only non-decreasing true objectives; halve toward the
      // anchor when the surrogate overshoots.
      double cand_obj = objective_at(beta_new, lambda);
      int halvings = 0;
      while ((!std::isfinite(cand_obj) ||
              cand_obj < fit.objective - 1e-12 * (1.0 + std::abs(fit.objective))) &&
             halvings < 8) {
        beta_new = 0.5 * (beta_new + fit.beta);
        cand_obj = objective_at(beta_new, lambda);
        ++halvings;
      }
      if (!std::isfinite(cand_obj) ||
          cand_obj < fit.objective - 1e-12 * (1.0 + std::abs(fit.objective)))
        return fit;  // no usable step; report flagged iterate
      fit.beta = beta_new;
    }
  }
};

LassoSolver::LassoSolver(const SurvivalDataset& data,
                         const std::vector<ExternalScores>& exts,
                         std::vector<double> etas, LassoOptions opts)
    : impl_(std::make_unique<Impl>(data, exts, std::move(etas), opts)) {}

LassoSolver::~LassoSolver() = default;
LassoSolver::LassoSolver(LassoSolver&&) noexcept = default;
LassoSolver& LassoSolver::operator=(LassoSolver&&) noexcept = default;

double LassoSolver::lambda_max() const { return impl_->lmax; }

const std::vector<int>& LassoSolver::pinned_covariates() const {
  return impl_->pinned;
}

LassoFit LassoSolver::fit(double lambda, const Vector* warm_start) const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw ValidationError("lasso: lambda must be nonnegative and finite");
  return impl_->run(lambda, warm_start);
}

double lambda_max(const SurvivalDataset& data,
                  const std::vector<ExternalScores>& exts,
                  const std::vector<double>& etas) {
  return LassoSolver(data, exts, etas).lambda_max();
}

LassoFit fit_coxkl_lasso(const SurvivalDataset& data,
                         const std::vector<ExternalScores>& exts,
                         const std::vector<double>& etas, double lambda,
                         std::optional<Vector> warm_start,
                         const LassoOptions& opts) {
  if (!(lambda > 0.0))
    throw ValidationError("lasso: lambda must be positive");
  LassoSolver solver(data, exts, etas, opts);
  return solver.fit(lambda, warm_start ? &*warm_start : nullptr);
}

std::vector<double> lambda_grid(const SurvivalDataset& data,
                                const std::vector<ExternalScores>& exts,
                                const std::vector<double>& etas, int n_lambda,
                                double lambda_min_ratio) {
  if (n_lambda < 2) throw ValidationError("lambda_grid: need n_lambda >= 2");
  const double lmax = lambda_max(data, exts, etas);
  if (!(lmax > 0.0))
    throw ValidationError(
        "lambda_grid: lambda_max is zero (no covariate carries signal)");
  if (lambda_min_ratio <= 0.0)
    lambda_min_ratio = data.n() < data.p() ? 0.05 : 1e-4;
  if (!(lambda_min_ratio < 1.0))
    throw ValidationError("lambda_grid: lambda_min_ratio must be in (0,1)");
  std::vector<double> grid(n_lambda);
  const double log_max = std::log(lmax);
  const double log_min = std::log(lmax * lambda_min_ratio);
  for (int t = 0; t < n_lambda; ++t)
    grid[t] = std::exp(log_max + (log_min - log_max) * t / (n_lambda - 1));
  grid.front() = lmax;
  grid.back() = lmax * lambda_min_ratio;
  return grid;
}

RegularizationPath lasso_path(const SurvivalDataset& data,
                              const std::vector<ExternalScores>& exts,
                              const std::vector<double>& etas, int n_lambda,
                              double lambda_min_ratio, const LassoOptions& opts) {
  LassoSolver solver(data, exts, etas, opts);
  RegularizationPath path;
  path.lambdas = lambda_grid(data, exts, etas, n_lambda, lambda_min_ratio);

  Vector beta = Vector::Zero(data.p());
  for (double lambda : path.lambdas) {
    LassoFit fit = solver.fit(lambda, &beta);
    beta = fit.beta;
    std::vector<std::pair<int, double>> sparse;
    for (int j = 0; j < data.p(); ++j)
      if (fit.beta[j] != 0.0) sparse.emplace_back(j, fit.beta[j]);
    path.nonzero_counts.push_back(static_cast<int>(sparse.size()));
    path.coefficients.push_back(std::move(sparse));
    path.objective_values.push_back(fit.objective);
    path.converged.push_back(fit.converged);
  }
  return path;
}

}  // namespace coxkl
