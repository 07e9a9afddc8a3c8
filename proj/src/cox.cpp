#include "coxkl/cox.hpp"

#include "pl_kernel.hpp"

namespace coxkl {

double log_partial_likelihood(const SurvivalDataset& data, const Vector& beta) {
  if (beta.size() != data.p())
    throw ValidationError("log_partial_likelihood: beta length != p");
  if (!beta.allFinite())
    throw ValidationError("log_partial_likelihood: beta must be finite");
  return detail::pl_objective(data, detail::cox_event_numerators(data), beta);
}

std::pair<Vector, Matrix> score_and_information(const SurvivalDataset& data,
                                                const Vector& beta) {
  if (beta.size() != data.p())
    throw ValidationError("score_and_information: beta length != p");
  if (!beta.allFinite())
    throw ValidationError("score_and_information: beta must be finite");
  return detail::pl_score_info(data, detail::cox_event_numerators(data), beta);
}

CoxKLFit fit_cox(const SurvivalDataset& data, const CoxFitOptions& opts) {
  return detail::newton_fit(data, detail::cox_event_numerators(data), {}, opts);
}

}  // namespace coxkl
