#include "coxkl/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "text_util.hpp"

namespace coxkl {

SurvivalDataset SurvivalDataset::from_records(
    std::vector<SurvivalRecord> records) {
  if (records.empty()) throw ValidationError("dataset: no records");
  const int n = static_cast<int>(records.size());
  const int p = static_cast<int>(records.front().covariates.size());

  SurvivalDataset data;
  data.ids_.reserve(records.size());
  data.times_.resize(n);
  data.statuses_.resize(records.size());
  data.covariates_.resize(n, p);

  int events = 0;
  for (int i = 0; i < n; ++i) {
    SurvivalRecord& r = records[i];
    if (!(r.time > 0.0) || !std::isfinite(r.time))
      throw ValidationError("record '" + r.id +
                            "': time must be positive and finite");
    if (r.status != 0 && r.status != 1)
      throw ValidationError("record '" + r.id + "': status must be 0 or 1");
    if (static_cast<int>(r.covariates.size()) != p)
      throw ValidationError("record '" + r.id +
                            "': covariate length differs from first record");
    if (!r.covariates.allFinite())
      throw ValidationError("record '" + r.id +
                            "': covariates contain non-finite values");
    data.ids_.push_back(std::move(r.id));
    data.times_[i] = r.time;
    data.statuses_[i] = r.status;
    data.covariates_.row(i) = r.covariates.transpose();
    events += data.statuses_[i];
  }
  if (events == 0) throw ValidationError("dataset: no events");

  data.build_index();
  return data;
}

void SurvivalDataset::build_index() {
  const int n = this->n();
  time_desc_.resize(n);
  for (int i = 0; i < n; ++i) time_desc_[i] = i;
  std::stable_sort(time_desc_.begin(), time_desc_.end(),
                   [&](int a, int b) { return times_[a] > times_[b]; });

  // Distinct event times, ascending, with their event rows.
  std::map<double, std::vector<int>> by_time;
  for (int i = 0; i < n; ++i)
    if (statuses_[i] == 1) by_time[times_[i]].push_back(i);

  event_times_.clear();
  event_rows_.clear();
  risk_counts_.clear();
  for (auto& [t, rows] : by_time) {
    event_times_.push_back(t);
    event_rows_.push_back(std::move(rows));
  }

  // risk_count(k) = #{i : X_i >= t_k} = length of the qualifying prefix of
  // the descending-time order.
  risk_counts_.resize(event_times_.size());
  for (std::size_t k = 0; k < event_times_.size(); ++k) {
    const double t = event_times_[k];
    auto first_below =
        std::partition_point(time_desc_.begin(), time_desc_.end(),
                             [&](int i) { return times_[i] >= t; });
    risk_counts_[k] = static_cast<int>(first_below - time_desc_.begin());
  }
}

SurvivalDataset SurvivalDataset::subset(const std::vector<int>& indices) const {
  std::vector<SurvivalRecord> records;
  records.reserve(indices.size());
  for (int i : indices) records.push_back(record(i));
  return from_records(std::move(records));
}

SurvivalRecord SurvivalDataset::record(int i) const {
  return {ids_[i], times_[i], statuses_[i], covariates_.row(i).transpose()};
}

std::vector<int> risk_set(const SurvivalDataset& data, double t) {
  std::vector<int> out;
  for (int i = 0; i < data.n(); ++i)
    if (data.time(i) >= t) out.push_back(i);
  return out;
}

StepFunction breslow_baseline(const SurvivalDataset& data, const Vector& beta) {
  if (beta.size() != data.p())
    throw ValidationError("breslow_baseline: beta length != p");
  const Vector lp = data.covariates() * beta;
  const std::vector<int>& order = data.rows_by_time_desc();

  const int K = data.num_event_times();
  std::vector<double> jumps(K);
  double sum = 0.0, shift = -std::numeric_limits<double>::infinity();
  int added = 0;
  for (int k = K - 1; k >= 0; --k) {
    while (added < data.risk_count(k)) {
      const int i = order[added++];
      if (lp[i] > shift) {
        sum *= std::exp(shift - lp[i]);
        shift = lp[i];
      }
      sum += std::exp(lp[i] - shift);
    }
    jumps[k] = data.event_count_at(k) / (sum * std::exp(shift));
  }

  std::vector<double> values(K);
  double cum = 0.0;
  for (int k = 0; k < K; ++k) {
    cum += jumps[k];
    values[k] = cum;
  }
  return StepFunction(data.event_times(), std::move(values), 0.0);
}

namespace {

int find_column(const std::vector<std::string_view>& header,
                const std::string& name) {
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == name) return static_cast<int>(j);
  return -1;
}

[[noreturn]] void cell_error(int line, std::string_view column,
                             std::string_view what) {
  std::ostringstream msg;
  msg << "line " << line << ", column '" << column << "': " << what;
  throw ParseError(msg.str());
}

}  // namespace

SurvivalDataset load_dataset(std::istream& source, const DatasetSchema& schema) {
  std::string line;
  if (!std::getline(source, line)) throw ParseError("empty input");
  const auto header = detail::split_csv(line);

  const int time_col = find_column(header, schema.time_column);
  const int status_col = find_column(header, schema.status_column);
  const int id_col = find_column(header, schema.id_column);
  if (time_col < 0)
    throw ParseError("missing time column '" + schema.time_column + "'");
  if (status_col < 0)
    throw ParseError("missing status column '" + schema.status_column + "'");

  std::vector<int> z_cols;
  std::vector<std::string> z_names;
  if (schema.covariate_columns.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j) {
      const int jj = static_cast<int>(j);
      if (jj == time_col || jj == status_col || jj == id_col) continue;
      z_cols.push_back(jj);
      z_names.emplace_back(header[j]);
    }
  } else {
    for (const std::string& name : schema.covariate_columns) {
      const int j = find_column(header, name);
      if (j < 0) throw ParseError("missing covariate column '" + name + "'");
      z_cols.push_back(j);
      z_names.push_back(name);
    }
  }

  std::vector<SurvivalRecord> records;
  int line_no = 1;
  int row = 0;
  while (std::getline(source, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() != header.size())
      cell_error(line_no, "(row)", "expected " +
                                       std::to_string(header.size()) +
                                       " cells, got " +
                                       std::to_string(cells.size()));
    SurvivalRecord rec;
    rec.id = id_col >= 0 ? std::string(cells[id_col]) : std::to_string(row);

    const auto time = detail::parse_double(cells[time_col]);
    if (!time) cell_error(line_no, schema.time_column, "malformed number");
    if (!(*time > 0.0) || !std::isfinite(*time))
      cell_error(line_no, schema.time_column, "time must be positive");
    rec.time = *time;

    const auto status = detail::parse_double(cells[status_col]);
    if (!status) cell_error(line_no, schema.status_column, "malformed number");
    if (*status != 0.0 && *status != 1.0)
      cell_error(line_no, schema.status_column, "status must be 0 or 1");
    rec.status = static_cast<int>(*status);

    rec.covariates.resize(static_cast<Eigen::Index>(z_cols.size()));
    for (std::size_t j = 0; j < z_cols.size(); ++j) {
      const auto z = detail::parse_double(cells[z_cols[j]]);
      if (!z) cell_error(line_no, z_names[j], "malformed number");
      if (!std::isfinite(*z)) cell_error(line_no, z_names[j], "non-finite value");
      rec.covariates[static_cast<Eigen::Index>(j)] = *z;
    }
    records.push_back(std::move(rec));
    ++row;
  }
  if (records.empty()) throw ParseError("no data rows");
  return SurvivalDataset::from_records(std::move(records));
}

void write_dataset(std::ostream& out, const SurvivalDataset& data) {
  out << "id,time,status";
  for (int j = 1; j <= data.p(); ++j) out << ",z" << j;
  out << '\n';
  for (int i = 0; i < data.n(); ++i) {
    out << data.ids()[i] << ',' << detail::format_double(data.time(i)) << ','
        << data.status(i);
    for (int j = 0; j < data.p(); ++j)
      out << ',' << detail::format_double(data.covariates()(i, j));
    out << '\n';
  }
}

}  // namespace coxkl
