#pragma once

#include <vector>

#include "coxkl/cox.hpp"
#include "coxkl/dataset.hpp"
#include "coxkl/external_scores.hpp"
#include "coxkl/types.hpp"

namespace coxkl {

/// Row k is the exponential-score-weighted average of the covariates of
/// subjects at risk at event time t_k. Independent of beta, so it is
/// computed once per (dataset, scores) pair and reused across eta values.
struct PseudoCovariates {
  Matrix z_tilde;  // K x p
};

PseudoCovariates external_weighted_covariates(const SurvivalDataset& data,
                                              const ExternalScores& ext);

/// Accumulated partial-likelihood KL divergence between the external-score
/// and internal-model conditional densities over the event-time sequence
/// (tied events weight their time's term). Nonnegative.
double kl_divergence(const SurvivalDataset& data, const ExternalScores& ext,
                     const Vector& beta);

/// Per-event-time numerator rows of the penalized objective:
/// (sum of event covariates + sum_m eta_m d_k z_tilde_k^(m)) / (1 + sum eta).
Matrix blended_event_numerators(const SurvivalDataset& data,
                                const std::vector<PseudoCovariates>& pseudo,
                                const std::vector<double>& etas);

/// KL-penalized log-partial likelihood in its closed form: equal to
/// (l(beta) - sum_m eta_m D_KL^(m)(beta)) / (1 + sum eta) up to a constant
/// independent of beta. Reduces to log_partial_likelihood at eta = 0.
double coxkl_objective(const SurvivalDataset& data,
                       const std::vector<ExternalScores>& exts,
                       const std::vector<double>& etas, const Vector& beta);

std::pair<Vector, Matrix> coxkl_score_and_information(
    const SurvivalDataset& data, const std::vector<ExternalScores>& exts,
    const std::vector<double>& etas, const Vector& beta);

CoxKLFit fit_coxkl(const SurvivalDataset& data,
                   const std::vector<ExternalScores>& exts,
                   const std::vector<double>& etas,
                   const CoxFitOptions& opts = {});

/// Cached-pseudo-covariate variants for eta-grid loops.
double coxkl_objective(const SurvivalDataset& data,
                       const std::vector<PseudoCovariates>& pseudo,
                       const std::vector<double>& etas, const Vector& beta);

CoxKLFit fit_coxkl(const SurvivalDataset& data,
                   const std::vector<PseudoCovariates>& pseudo,
                   const std::vector<double>& etas,
                   const CoxFitOptions& opts = {});

}  // namespace coxkl
