#pragma once

#include <iosfwd>
#include <vector>

namespace coxkl {

/// Right-continuous step function over positive time. Holds `initial`
/// before the first jump time; jump times are strictly increasing.
class StepFunction {
 public:
  StepFunction() = default;
  StepFunction(std::vector<double> times, std::vector<double> values,
               double initial);

  double operator()(double t) const;

  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& values() const { return values_; }
  double initial_value() const { return initial_; }
  std::size_t size() const { return times_.size(); }

  /// Two-column CSV `t,value`, one row per jump time.
  void write_csv(std::ostream& out) const;

 private:
  std::vector<double> times_;
  std::vector<double> values_;
  double initial_ = 1.0;
};

}  // namespace coxkl
