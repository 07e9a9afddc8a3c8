#include "coxkl/coxkl.hpp"

#include <cmath>
#include <limits>

#include "pl_kernel.hpp"

namespace coxkl {

namespace {

void check_etas(const std::vector<double>& etas, std::size_t m) {
  if (etas.size() != m)
    throw ValidationError("coxkl: " + std::to_string(etas.size()) +
                          " eta values for " + std::to_string(m) +
                          " external score sets");
  for (double eta : etas)
    if (!(eta >= 0.0) || !std::isfinite(eta))
      throw ValidationError("coxkl: eta must be nonnegative and finite");
}

std::vector<PseudoCovariates> all_pseudo(const SurvivalDataset& data,
                                         const std::vector<ExternalScores>& exts) {
  std::vector<PseudoCovariates> pseudo;
  pseudo.reserve(exts.size());
  for (const ExternalScores& ext : exts)
    pseudo.push_back(external_weighted_covariates(data, ext));
  return pseudo;
}

}  // namespace

PseudoCovariates external_weighted_covariates(const SurvivalDataset& data,
                                              const ExternalScores& ext) {
  ext.check_alignment(data);
  const int K = data.num_event_times();
  const int p = data.p();
  const std::vector<int>& order = data.rows_by_time_desc();
  const Vector& r = ext.scores();

  Matrix z_tilde(K, p);
  double w0 = 0.0;
  Vector w1 = Vector::Zero(p);
  double shift = -std::numeric_limits<double>::infinity();
  int added = 0;
  for (int k = K - 1; k >= 0; --k) {
    while (added < data.risk_count(k)) {
      const int i = order[added++];
      if (r[i] > shift) {
        const double rescale = std::exp(shift - r[i]);
        w0 *= rescale;
        w1 *= rescale;
        shift = r[i];
      }
      const double w = std::exp(r[i] - shift);
      w0 += w;
      w1 += w * data.covariates().row(i).transpose();
    }
    z_tilde.row(k) = (w1 / w0).transpose();
  }
  return {std::move(z_tilde)};
}

double kl_divergence(const SurvivalDataset& data, const ExternalScores& ext,
                     const Vector& beta) {
  ext.check_alignment(data);
  if (beta.size() != data.p())
    throw ValidationError("kl_divergence: beta length != p");
  const int K = data.num_event_times();
  const std::vector<int>& order = data.rows_by_time_desc();
  const Vector& r = ext.scores();
  const Vector lp = data.covariates() * beta;

  // Per risk set: sum_i w_i log(w_i / q_i)
  //   = [sum_i e^{r_i}(r_i - lp_i)] / [sum_i e^{r_i}] - log W + log Q,
  // with W = sum e^{r_i}, Q = sum e^{lp_i}; both sums max-shift stabilized.
  double wsum = 0.0, wdot = 0.0, qsum = 0.0;
  double wshift = -std::numeric_limits<double>::infinity();
  double qshift = -std::numeric_limits<double>::infinity();
  double total = 0.0;
  int added = 0;
  for (int k = K - 1; k >= 0; --k) {
    while (added < data.risk_count(k)) {
      const int i = order[added++];
      if (r[i] > wshift) {
        const double rescale = std::exp(wshift - r[i]);
        wsum *= rescale;
        wdot *= rescale;
        wshift = r[i];
      }
      const double w = std::exp(r[i] - wshift);
      wsum += w;
      wdot += w * (r[i] - lp[i]);
      if (lp[i] > qshift) {
        qsum *= std::exp(qshift - lp[i]);
        qshift = lp[i];
      }
      qsum += std::exp(lp[i] - qshift);
    }
    const double log_w = wshift + std::log(wsum);
    const double log_q = qshift + std::log(qsum);
    const double term = wdot / wsum - log_w + log_q;
    total += data.event_count_at(k) * std::max(term, 0.0);
  }
  return total;
}

Matrix blended_event_numerators(const SurvivalDataset& data,
                                const std::vector<PseudoCovariates>& pseudo,
                                const std::vector<double>& etas) {
  check_etas(etas, pseudo.size());
  Matrix nu = detail::cox_event_numerators(data);
  double eta_sum = 0.0;
  for (std::size_t m = 0; m < pseudo.size(); ++m) {
    const Matrix& zt = pseudo[m].z_tilde;
    if (zt.rows() != nu.rows() || zt.cols() != nu.cols())
      throw ValidationError("coxkl: pseudo-covariate shape mismatch");
    eta_sum += etas[m];
    if (etas[m] == 0.0) continue;
    for (int k = 0; k < nu.rows(); ++k)
      nu.row(k) += etas[m] * data.event_count_at(k) * zt.row(k);
  }
  nu /= (1.0 + eta_sum);
  return nu;
}

double coxkl_objective(const SurvivalDataset& data,
                       const std::vector<PseudoCovariates>& pseudo,
                       const std::vector<double>& etas, const Vector& beta) {
  if (beta.size() != data.p())
    throw ValidationError("coxkl_objective: beta length != p");
  return detail::pl_objective(data, blended_event_numerators(data, pseudo, etas),
                              beta);
}

double coxkl_objective(const SurvivalDataset& data,
                       const std::vector<ExternalScores>& exts,
                       const std::vector<double>& etas, const Vector& beta) {
  check_etas(etas, exts.size());
  return coxkl_objective(data, all_pseudo(data, exts), etas, beta);
}

std::pair<Vector, Matrix> coxkl_score_and_information(
    const SurvivalDataset& data, const std::vector<ExternalScores>& exts,
    const std::vector<double>& etas, const Vector& beta) {
  check_etas(etas, exts.size());
  if (beta.size() != data.p())
    throw ValidationError("coxkl_score_and_information: beta length != p");
  return detail::pl_score_info(
      data, blended_event_numerators(data, all_pseudo(data, exts), etas), beta);
}

CoxKLFit fit_coxkl(const SurvivalDataset& data,
                   const std::vector<PseudoCovariates>& pseudo,
                   const std::vector<double>& etas, const CoxFitOptions& opts) {
  return detail::newton_fit(data, blended_event_numerators(data, pseudo, etas),
                            etas, opts);
}

CoxKLFit fit_coxkl(const SurvivalDataset& data,
                   const std::vector<ExternalScores>& exts,
                   const std::vector<double>& etas, const CoxFitOptions& opts) {
  check_etas(etas, exts.size());
  return fit_coxkl(data, all_pseudo(data, exts), etas, opts);
}

}  // namespace coxkl
