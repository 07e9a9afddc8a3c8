#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "coxkl/step_function.hpp"
#include "coxkl/types.hpp"

namespace coxkl {

/// One right-censored observation: observed time, event indicator and
/// covariate row.
struct SurvivalRecord {
  std::string id;
  double time = 0.0;
  int status = 0;  // 1 = event, 0 = censored
  Vector covariates;
};

/// Column mapping for load_dataset. Empty covariate list means "every
/// column that is not id/time/status, in header order".
struct DatasetSchema {
  std::string id_column = "id";
  std::string time_column = "time";
  std::string status_column = "status";
  std::vector<std::string> covariate_columns;
};

/// Immutable right-censored survival dataset with risk-set indexing.
///
/// Records keep their construction order. Event times t_1 < ... < t_K are
/// the distinct times with at least one event; the risk set of t_k is the
/// prefix of length risk_count(k) of rows_by_time_desc(). Tied events are
/// kept together per event time (Breslow handling downstream).
class SurvivalDataset {
 public:
  static SurvivalDataset from_records(std::vector<SurvivalRecord> records);

  int n() const { return static_cast<int>(times_.size()); }
  int p() const { return static_cast<int>(covariates_.cols()); }
  int num_event_times() const { return static_cast<int>(event_times_.size()); }

  const std::vector<std::string>& ids() const { return ids_; }
  const Vector& times() const { return times_; }
  const std::vector<int>& statuses() const { return statuses_; }
  const Matrix& covariates() const { return covariates_; }

  double time(int i) const { return times_[i]; }
  int status(int i) const { return statuses_[i]; }

  const std::vector<double>& event_times() const { return event_times_; }
  /// Record indices of subjects with an event at t_k (k is 0-based).
  const std::vector<int>& events_at(int k) const { return event_rows_[k]; }
  int event_count_at(int k) const {
    return static_cast<int>(event_rows_[k].size());
  }

  /// All record indices ordered by time descending (ties in input order).
  const std::vector<int>& rows_by_time_desc() const { return time_desc_; }
  /// Size of the risk set {i : X_i >= t_k}; the members are the first
  /// risk_count(k) entries of rows_by_time_desc().
  int risk_count(int k) const { return risk_counts_[k]; }
  std::span<const int> risk_rows_at(int k) const {
    return {time_desc_.data(), static_cast<std::size_t>(risk_counts_[k])};
  }

  /// Subset by record indices; relative input order is preserved.
  SurvivalDataset subset(const std::vector<int>& indices) const;

  SurvivalRecord record(int i) const;

 private:
  SurvivalDataset() = default;
  void build_index();

  std::vector<std::string> ids_;
  Vector times_;
  std::vector<int> statuses_;
  Matrix covariates_;  // n x p

  std::vector<int> time_desc_;
  std::vector<double> event_times_;           // ascending
  std::vector<std::vector<int>> event_rows_;  // per event time
  std::vector<int> risk_counts_;              // per event time
};

/// {i : X_i >= t} as record indices in record order.
std::vector<int> risk_set(const SurvivalDataset& data, double t);

/// Cumulative baseline hazard (Breslow): jumps d_k / sum_{risk} exp(Z'beta)
/// at each event time.
StepFunction breslow_baseline(const SurvivalDataset& data, const Vector& beta);

/// Reads the canonical CSV `id,time,status,z1,...,zp` (or any header the
/// schema maps). Throws ParseError / ValidationError with line context.
SurvivalDataset load_dataset(std::istream& source,
                             const DatasetSchema& schema = {});

/// Canonical CSV writer; numeric cells use shortest round-trip formatting.
void write_dataset(std::ostream& out, const SurvivalDataset& data);

}  // namespace coxkl
