#include "coxkl/metrics.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <ostream>

#include "text_util.hpp"

namespace coxkl {

namespace {

class FenwickTree {
 public:
  explicit FenwickTree(int size) : counts_(size + 1, 0) {}

  void add(int rank) {  // 1-based
    for (int i = rank; i < static_cast<int>(counts_.size()); i += i & -i)
      ++counts_[i];
  }

  std::int64_t prefix(int rank) const {  // count of entries with rank <= rank
    std::int64_t total = 0;
    for (int i = rank; i > 0; i -= i & -i) total += counts_[i];
    return total;
  }

 private:
  std::vector<std::int64_t> counts_;
};

std::vector<int> dense_score_ranks(const Vector& scores) {
  const int n = static_cast<int>(scores.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return scores[a] < scores[b]; });
  std::vector<int> rank(n);
  int r = 0;
  for (int i = 0; i < n; ++i) {
    if (i == 0 || scores[order[i]] != scores[order[i - 1]]) ++r;
    rank[order[i]] = r;
  }
  return rank;
}

}  // namespace

double c_index(const Vector& times, const std::vector<int>& statuses,
               const Vector& risk_scores) {
  const int n = static_cast<int>(times.size());
  if (static_cast<int>(statuses.size()) != n ||
      static_cast<int>(risk_scores.size()) != n)
    throw ValidationError("c_index: input length mismatch");

  const std::vector<int> rank = dense_score_ranks(risk_scores);
  const int max_rank = *std::max_element(rank.begin(), rank.end());

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return times[a] > times[b]; });

  // Walk times descending; the tree holds subjects with strictly larger
  // time, so tied observed times never pair with each other.
  FenwickTree tree(max_rank);
  std::int64_t usable = 0;
  std::int64_t credit2 = 0;  // 2*concordant + 1*score-tied
  std::int64_t in_tree = 0;
  int pos = 0;
  while (pos < n) {
    int group_end = pos;
    while (group_end < n && times[order[group_end]] == times[order[pos]])
      ++group_end;
    for (int g = pos; g < group_end; ++g) {
      const int i = order[g];
      if (statuses[i] != 1) continue;
      const std::int64_t below = tree.prefix(rank[i] - 1);
      const std::int64_t tied = tree.prefix(rank[i]) - below;
      usable += in_tree;
      credit2 += 2 * below + tied;
    }
    for (int g = pos; g < group_end; ++g) tree.add(rank[order[g]]);
    in_tree += group_end - pos;
    pos = group_end;
  }

  if (usable == 0)
    throw UndefinedMetricError("c_index: no usable pairs");
  return static_cast<double>(credit2) / static_cast<double>(2 * usable);
}

StepFunction kaplan_meier(const Vector& times, const std::vector<int>& statuses) {
  const int n = static_cast<int>(times.size());
  if (n == 0) throw ValidationError("kaplan_meier: empty input");
  if (static_cast<int>(statuses.size()) != n)
    throw ValidationError("kaplan_meier: input length mismatch");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return times[a] < times[b]; });

  std::vector<double> event_times;
  std::vector<double> survival;
  double s = 1.0;
  int pos = 0;
  while (pos < n) {
    const double t = times[order[pos]];
    int group_end = pos;
    int deaths = 0;
    while (group_end < n && times[order[group_end]] == t) {
      deaths += statuses[order[group_end]];
      ++group_end;
    }
    if (deaths > 0) {
      const int at_risk = n - pos;
      s *= 1.0 - static_cast<double>(deaths) / at_risk;
      event_times.push_back(t);
      survival.push_back(s);
    }
    pos = group_end;
  }
  return StepFunction(std::move(event_times), std::move(survival), 1.0);
}

RiskStrata risk_stratify(const Vector& risk_scores,
                         const std::vector<double>& cutpoints,
                         const Vector& times, const std::vector<int>& statuses) {
  const int n = static_cast<int>(risk_scores.size());
  if (static_cast<int>(times.size()) != n ||
      static_cast<int>(statuses.size()) != n)
    throw ValidationError("risk_stratify: input length mismatch");
  if (cutpoints.empty())
    throw ValidationError("risk_stratify: need at least one cutpoint");
  for (std::size_t c = 0; c < cutpoints.size(); ++c) {
    if (!(cutpoints[c] > 0.0 && cutpoints[c] < 100.0))
      throw ValidationError("risk_stratify: cutpoints must lie in (0,100)");
    if (c > 0 && !(cutpoints[c] > cutpoints[c - 1]))
      throw ValidationError("risk_stratify: cutpoints must be increasing");
  }

  // Average-rank percentiles.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return risk_scores[a] < risk_scores[b]; });
  std::vector<double> percentile(n);
  int pos = 0;
  while (pos < n) {
    int group_end = pos;
    while (group_end < n &&
           risk_scores[order[group_end]] == risk_scores[order[pos]])
      ++group_end;
    const double avg_rank = (pos + 1 + group_end) / 2.0;  // mean of 1-based run
    for (int g = pos; g < group_end; ++g)
      percentile[order[g]] = 100.0 * avg_rank / n;
    pos = group_end;
  }

  const int num_groups = static_cast<int>(cutpoints.size()) + 1;
  std::vector<std::vector<int>> members(num_groups);
  for (int i = 0; i < n; ++i) {
    int g = 0;
    while (g < static_cast<int>(cutpoints.size()) && cutpoints[g] < percentile[i])
      ++g;
    members[g].push_back(i);
  }

  auto bound = [&](int g) { return g == 0 ? 0.0 : cutpoints[g - 1]; };
  auto upper = [&](int g) {
    return g == num_groups - 1 ? 100.0 : cutpoints[g];
  };

  RiskStrata strata;
  for (int g = 0; g < num_groups; ++g) {
    std::string label = detail::format_double(bound(g)) + "-" +
                        detail::format_double(upper(g)) + "%";
    if (members[g].empty()) {
      strata.warnings.push_back("group " + label +
                                " is empty (score ties); merged upward");
      continue;
    }
    Vector gt(static_cast<Eigen::Index>(members[g].size()));
    std::vector<int> gs(members[g].size());
    for (std::size_t j = 0; j < members[g].size(); ++j) {
      gt[static_cast<Eigen::Index>(j)] = times[members[g][j]];
      gs[j] = statuses[members[g][j]];
    }
    strata.groups.push_back({std::move(label), std::move(members[g]),
                             kaplan_meier(gt, gs)});
  }
  return strata;
}

void write_km_csv(std::ostream& out, const RiskStrata& strata) {
  out << "group,t,survival\n";
  for (const RiskGroup& group : strata.groups) {
    for (std::size_t i = 0; i < group.km.size(); ++i) {
      out << group.label << ',' << detail::format_double(group.km.times()[i])
          << ',' << detail::format_double(group.km.values()[i]) << '\n';
    }
  }
}

}  // namespace coxkl
