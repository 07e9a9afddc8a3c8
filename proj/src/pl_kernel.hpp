#pragma once

#include "coxkl/cox.hpp"
#include "coxkl/dataset.hpp"

namespace coxkl::detail {

// The Breslow log-partial likelihood and the penalized objective share one
// shape: sum_k [ nu_k' beta - d_k log sum_{risk k} exp(Z_i' beta) ], where
// nu_k is a per-event-time numerator covariate row. The plain Cox model uses
// nu_k = sum of event covariates at t_k; the KL-penalized model blends in the
// externally weighted pseudo-covariates. Everything below is unscaled (sums
// over events, no 1/n).

Matrix cox_event_numerators(const SurvivalDataset& data);

double pl_objective(const SurvivalDataset& data, const Matrix& numerators,
                    const Vector& beta);

Vector pl_score(const SurvivalDataset& data, const Matrix& numerators,
                const Vector& beta);

std::pair<Vector, Matrix> pl_score_info(const SurvivalDataset& data,
                                        const Matrix& numerators,
                                        const Vector& beta);

// Per-event-time log of sum_{risk k} exp(lp_i), max-shift stabilized.
std::vector<double> risk_log_denominators(const SurvivalDataset& data,
                                          const Vector& lp);

// Newton-Raphson with step halving on the objective above. Reports the
// per-n sup-norm of the score as gradient_norm; records `etas` verbatim.
CoxKLFit newton_fit(const SurvivalDataset& data, const Matrix& numerators,
                    std::vector<double> etas, const CoxFitOptions& opts);

}  // namespace coxkl::detail
