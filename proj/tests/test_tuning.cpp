#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "coxkl/cox.hpp"
#include "coxkl/tuning.hpp"
#include "test_util.hpp"

using namespace coxkl;
using testutil::make_data;

TEST_CASE("fold sizes and stratification") {
  std::vector<int> statuses10(10, 0);
  for (int i = 0; i < 4; ++i) statuses10[i] = 1;
  const std::vector<int> folds = make_folds(10, 5, 11, true, statuses10);
  std::vector<int> sizes(5, 0);
  for (int f : folds) ++sizes[f - 1];
  for (int s : sizes) CHECK(s == 2);

  std::vector<int> statuses12(12, 0);
  for (int i = 0; i < 6; ++i) statuses12[i] = 1;
  const std::vector<int> folds12 = make_folds(12, 3, 17, true, statuses12);
  std::vector<int> events_per(3, 0);
  for (int i = 0; i < 12; ++i)
    if (statuses12[i] == 1) ++events_per[folds12[i] - 1];
  for (int e : events_per) CHECK(e == 2);

  CHECK(make_folds(10, 5, 42, true, statuses10) ==
        make_folds(10, 5, 42, true, statuses10));
  CHECK(make_folds(10, 5, 42, true, statuses10) !=
        make_folds(10, 5, 43, true, statuses10));

  CHECK_THROWS_AS(make_folds(3, 4, 1, false, {}), ValidationError);
  CHECK_THROWS_AS(make_folds(3, 1, 1, false, {}), ValidationError);
}

TEST_CASE("vvh criterion: leave-one-out pair reduces to full-data terms") {
  // Both training sets are a single subject whose fit is pinned at zero,
  // so the criterion collapses to 2 * l_full(0).
  const SurvivalDataset data = make_data({1, 2}, {1, 1}, {{1.0}, {0.0}});
  const std::vector<int> folds{1, 2};
  const double criterion = vvh_cvpl(data, {}, {}, std::nullopt, folds);
  CHECK(criterion == doctest::Approx(2.0 * -std::log(2.0)).epsilon(1e-10));
}

TEST_CASE("vvh criterion with a constant covariate") {
  const SurvivalDataset data = make_data({1, 2, 3, 4}, {1, 1, 1, 1},
                                         {{2.0}, {2.0}, {2.0}, {2.0}});
  const std::vector<int> folds{1, 2, 1, 2};
  const Vector zero = Vector::Zero(1);
  double expected = 0.0;
  for (int v : {1, 2}) {
    std::vector<int> keep;
    for (int i = 0; i < 4; ++i)
      if (folds[i] != v) keep.push_back(i);
    expected += log_partial_likelihood(data, zero) -
                log_partial_likelihood(data.subset(keep), zero);
  }
  CHECK(vvh_cvpl(data, {}, {}, std::nullopt, folds) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("vvh is invariant to fold relabeling") {
  std::mt19937_64 rng(3);
  const SurvivalDataset data = testutil::random_dataset(rng, 24, 2, 0.25);
  const ExternalScores ext =
      ExternalScores::from_scores("e", testutil::random_vector(rng, 24));
  std::vector<int> folds = make_folds(24, 4, 5, true, data.statuses());
  const double base = vvh_cvpl(data, {ext}, {1.0}, std::nullopt, folds);

  std::vector<int> relabeled = folds;
  const int perm[5] = {0, 3, 1, 4, 2};
  for (int& f : relabeled) f = perm[f];
  CHECK(vvh_cvpl(data, {ext}, {1.0}, std::nullopt, relabeled) ==
        doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("select_tuning is deterministic and selects grid members") {
  std::mt19937_64 rng(13);
  const SurvivalDataset data = testutil::random_dataset(rng, 40, 2, 0.3);
  const ExternalScores ext = ExternalScores::linear(
      "lin", data, testutil::random_vector(rng, 2, 0.4));
  const std::vector<double> grid{0.0, 0.5, 2.0, 8.0};

  const CvReport a = select_tuning(data, {ext}, grid, std::nullopt, 4, 99);
  const CvReport b = select_tuning(data, {ext}, grid, std::nullopt, 4, 99);
  CHECK(a.cvpl == b.cvpl);
  CHECK(a.selected_eta == b.selected_eta);
  CHECK(a.fold_assignment == b.fold_assignment);
  CHECK(std::find(grid.begin(), grid.end(), a.selected_eta[0]) != grid.end());

  // The selected entry attains the maximum cvpl.
  double best = -1e300;
  for (int ci = 0; ci < a.cvpl.rows(); ++ci) best = std::max(best, a.cvpl(ci, 0));
  bool found = false;
  for (int ci = 0; ci < a.cvpl.rows(); ++ci)
    if (a.cvpl(ci, 0) == best && a.eta_combos[ci] == a.selected_eta)
      found = true;
  CHECK(found);
}

TEST_CASE("duplicated grid values give identical cvpl rows; ties pick first") {
  std::mt19937_64 rng(23);
  const SurvivalDataset data = testutil::random_dataset(rng, 30, 2, 0.3);
  const ExternalScores ext =
      ExternalScores::from_scores("e", testutil::random_vector(rng, 30));
  const CvReport report =
      select_tuning(data, {ext}, {1.0, 1.0, 3.0}, std::nullopt, 3, 7);
  CHECK(report.cvpl(0, 0) == report.cvpl(1, 0));
}

TEST_CASE("empty external set degenerates to the lambda axis") {
  std::mt19937_64 rng(33);
  const SurvivalDataset data = testutil::random_dataset(rng, 40, 3, 0.3);
  const std::vector<double> lgrid =
      lambda_grid(data, {}, {}, 12, 0.05);
  const CvReport report =
      select_tuning(data, {}, {0.0}, lgrid, 4, 21);
  REQUIRE(report.selected_lambda.has_value());
  CHECK(report.eta_combos.size() == 1);
  CHECK(report.eta_combos[0].empty());
  CHECK(report.cvpl.rows() == 1);
  CHECK(report.cvpl.cols() == 12);
  CHECK(std::find(lgrid.begin(), lgrid.end(), *report.selected_lambda) !=
        lgrid.end());

  // Classical V&VH agreement at a fixed lambda (the standalone evaluation
  // cold-starts each fit, so agreement is at the KKT tolerance scale).
  const double lam = lgrid[5];
  const double direct =
      vvh_cvpl(data, {}, {}, lam, report.fold_assignment);
  CHECK(report.cvpl(0, 5) == doctest::Approx(direct).epsilon(1e-6));
}

TEST_CASE("two external sets tune over the eta product grid") {
  std::mt19937_64 rng(43);
  const SurvivalDataset data = testutil::random_dataset(rng, 36, 2, 0.25);
  const ExternalScores e1 = ExternalScores::linear(
      "good", data, testutil::random_vector(rng, 2, 0.4));
  const ExternalScores e2 =
      ExternalScores::from_scores("noise", testutil::random_vector(rng, 36));
  const CvReport report =
      select_tuning(data, {e1, e2}, {0.0, 1.0}, std::nullopt, 3, 5);
  CHECK(report.eta_combos.size() == 4);
  CHECK(report.selected_eta.size() == 2);
  CHECK(report.eta_combos[1] == std::vector<double>{0.0, 1.0});
  CHECK(report.eta_combos[2] == std::vector<double>{1.0, 0.0});
}

TEST_CASE("grid validation") {
  std::mt19937_64 rng(53);
  const SurvivalDataset data = testutil::random_dataset(rng, 12, 1, 0.2);
  CHECK_THROWS_AS(select_tuning(data, {}, {}, std::nullopt, 3, 1),
                  ValidationError);
  CHECK_THROWS_AS(select_tuning(data, {}, {-1.0}, std::nullopt, 3, 1),
                  ValidationError);
  CHECK_THROWS_AS(
      select_tuning(data, {}, {0.0}, std::vector<double>{0.1, 0.5}, 3, 1),
      ValidationError);
}

TEST_CASE("default eta grid shape") {
  const std::vector<double> grid = default_eta_grid();
  REQUIRE(grid.size() == 16);
  CHECK(grid.front() == 0.0);
  CHECK(grid[1] == doctest::Approx(0.01));
  CHECK(grid.back() == doctest::Approx(100.0));
  for (std::size_t i = 2; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);
}
