#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "coxkl/step_function.hpp"
#include "coxkl/types.hpp"

namespace coxkl {

/// Harrell's concordance over usable pairs: a pair is usable iff the
/// observed times differ and the earlier time is an event; concordant when
/// the earlier-event subject has the higher risk score; score ties earn
/// half credit. Exact pair counting (matches n^2 enumeration bit for bit).
double c_index(const Vector& times, const std::vector<int>& statuses,
               const Vector& risk_scores);

/// Product-limit estimator; censored subjects tied with an event time stay
/// at risk for that event. No events -> constant 1.
StepFunction kaplan_meier(const Vector& times, const std::vector<int>& statuses);

struct RiskGroup {
  std::string label;
  std::vector<int> members;  // record indices, ascending risk group order
  StepFunction km;
};

struct RiskStrata {
  std::vector<RiskGroup> groups;
  std::vector<std::string> warnings;
};

/// Groups subjects by empirical percentile of risk score (average-rank
/// ties), e.g. cutpoints {20,80} -> 0-20%, 20-80%, 80-100%. Groups emptied
/// by mass ties are dropped with a warning.
RiskStrata risk_stratify(const Vector& risk_scores,
                         const std::vector<double>& cutpoints,
                         const Vector& times, const std::vector<int>& statuses);

/// Long-format CSV `group,t,survival`, one row per KM jump per group.
void write_km_csv(std::ostream& out, const RiskStrata& strata);

}  // namespace coxkl
