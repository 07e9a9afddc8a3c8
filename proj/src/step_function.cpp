#include "coxkl/step_function.hpp"

#include <algorithm>
#include <ostream>

#include "coxkl/types.hpp"
#include "text_util.hpp"

namespace coxkl {

StepFunction::StepFunction(std::vector<double> times,
                           std::vector<double> values, double initial)
    : times_(std::move(times)), values_(std::move(values)), initial_(initial) {
  if (times_.size() != values_.size())
    throw ValidationError("step function: times/values length mismatch");
  for (std::size_t i = 0; i + 1 < times_.size(); ++i) {
    if (!(times_[i] < times_[i + 1]))
      throw ValidationError("step function: times must be strictly increasing");
  }
}

double StepFunction::operator()(double t) const {
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return initial_;
  return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

void StepFunction::write_csv(std::ostream& out) const {
  out << "t,value\n";
  for (std::size_t i = 0; i < times_.size(); ++i) {
    out << detail::format_double(times_[i]) << ','
        << detail::format_double(values_[i]) << '\n';
  }
}

}  // namespace coxkl
