#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "coxkl/metrics.hpp"
#include "test_util.hpp"

using namespace coxkl;

namespace {

Vector vec(const std::vector<double>& values) {
  Vector v(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) v[i] = values[i];
  return v;
}

}  // namespace

TEST_CASE("c-index closed cases") {
  // Perfect discrimination: higher score fails earlier.
  CHECK(c_index(vec({1, 2, 3}), {1, 1, 1}, vec({5, 4, 3})) == 1.0);
  // All scores tied: every usable pair earns half credit.
  CHECK(c_index(vec({1, 2, 3}), {1, 1, 1}, vec({2, 2, 2})) == 0.5);
  // Mixed hand example: concordant {(1,2),(1,3)}, discordant {(2,3)}.
  CHECK(c_index(vec({1, 2, 3}), {1, 1, 1}, vec({3, 1, 2})) ==
        doctest::Approx(2.0 / 3.0));
}

TEST_CASE("c-index errors when no pair is usable") {
  CHECK_THROWS_AS(c_index(vec({1, 1}), {1, 1}, vec({1, 2})),
                  UndefinedMetricError);
  CHECK_THROWS_AS(c_index(vec({1, 2}), {0, 1}, vec({1, 2})),
                  UndefinedMetricError);
}

TEST_CASE("c-index equals the quadratic enumeration exactly") {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> sizes(2, 120);
  for (int rep = 0; rep < 60; ++rep) {
    const int n = sizes(rng);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Vector times(n), scores(n);
    std::vector<int> statuses(n);
    bool any_event = false;
    for (int i = 0; i < n; ++i) {
      // Coarse grids force ties in both times and scores.
      times[i] = std::ceil(unif(rng) * 8.0) / 2.0;
      scores[i] = std::round(unif(rng) * 6.0);
      statuses[i] = unif(rng) < 0.7;
      any_event |= statuses[i] == 1;
    }
    if (!any_event) statuses[0] = 1;
    double fast = 0.0, slow = 0.0;
    bool fast_undefined = false, slow_undefined = false;
    try {
      fast = c_index(times, statuses, scores);
    } catch (const UndefinedMetricError&) {
      fast_undefined = true;
    }
    try {
      slow = testutil::naive_cindex(times, statuses, scores);
    } catch (const UndefinedMetricError&) {
      slow_undefined = true;
    }
    REQUIRE(fast_undefined == slow_undefined);
    if (!fast_undefined) CHECK(fast == slow);  // bit-exact
  }
}

TEST_CASE("c-index symmetry and monotone-transform invariance") {
  std::mt19937_64 rng(19);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 40;
    Vector times = testutil::random_vector(rng, n).array().abs() + 0.1;
    Vector scores = testutil::random_vector(rng, n);
    std::vector<int> statuses(n);
    for (int i = 0; i < n; ++i) statuses[i] = i % 4 != 0;
    const double c = c_index(times, statuses, scores);
    CHECK(c + c_index(times, statuses, Vector(-scores)) ==
          doctest::Approx(1.0).epsilon(1e-12));
    const Vector warped = scores.array().exp().matrix() * 3.0;
    CHECK(c_index(times, statuses, warped) == c);
  }
}

TEST_CASE("kaplan-meier closed cases") {
  const StepFunction all_events = kaplan_meier(vec({1, 2, 3}), {1, 1, 1});
  REQUIRE(all_events.size() == 3);
  CHECK(all_events(1.0) == doctest::Approx(2.0 / 3.0));
  CHECK(all_events(2.5) == doctest::Approx(1.0 / 3.0));
  CHECK(all_events(3.0) == doctest::Approx(0.0));
  CHECK(all_events(0.2) == 1.0);

  const StepFunction censored_mid = kaplan_meier(vec({1, 2, 3}), {1, 0, 1});
  CHECK(censored_mid(1.0) == doctest::Approx(2.0 / 3.0));
  CHECK(censored_mid(3.0) == doctest::Approx(0.0));

  const StepFunction all_censored = kaplan_meier(vec({1, 2, 3}), {0, 0, 0});
  CHECK(all_censored.size() == 0);
  CHECK(all_censored(5.0) == 1.0);
}

TEST_CASE("kaplan-meier equals the hand product-limit on random data") {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int rep = 0; rep < 30; ++rep) {
    const int n = 3 + static_cast<int>(rng() % 60);
    Vector times(n);
    std::vector<int> statuses(n);
    for (int i = 0; i < n; ++i) {
      times[i] = std::ceil(unif(rng) * 10.0) / 2.0;
      statuses[i] = unif(rng) < 0.6;
    }
    const StepFunction km = kaplan_meier(times, statuses);
    for (double t : {0.5, 1.0, 2.5, 4.0, 5.0})
      CHECK(km(t) ==
            doctest::Approx(testutil::naive_km_at(times, statuses, t))
                .epsilon(1e-12));
  }
}

TEST_CASE("kaplan-meier with no censoring is one minus the ecdf") {
  std::mt19937_64 rng(39);
  const int n = 50;
  Vector times = testutil::random_vector(rng, n).array().abs() + 0.01;
  std::vector<int> statuses(n, 1);
  const StepFunction km = kaplan_meier(times, statuses);
  for (double t : {0.2, 0.5, 1.0, 2.0}) {
    int below = 0;
    for (int i = 0; i < n; ++i) below += times[i] <= t;
    CHECK(km(t) == doctest::Approx(1.0 - static_cast<double>(below) / n)
                       .epsilon(1e-12));
  }
}

TEST_CASE("risk stratification by percentile") {
  Vector scores(10), times(10);
  std::vector<int> statuses(10, 1);
  for (int i = 0; i < 10; ++i) {
    scores[i] = i;
    times[i] = 10.0 - i * 0.5;
  }
  const RiskStrata strata = risk_stratify(scores, {20, 80}, times, statuses);
  REQUIRE(strata.groups.size() == 3);
  CHECK(strata.groups[0].members.size() == 2);
  CHECK(strata.groups[1].members.size() == 6);
  CHECK(strata.groups[2].members.size() == 2);
  CHECK(strata.groups[0].label == "0-20%");
  CHECK(strata.groups[1].label == "20-80%");
  CHECK(strata.groups[2].label == "80-100%");
  // Distinct uniform scores land exactly at rank thresholds.
  CHECK(strata.groups[0].members == std::vector<int>{0, 1});
  CHECK(strata.groups[2].members == std::vector<int>{8, 9});
  CHECK(strata.warnings.empty());
}

TEST_CASE("mass ties collapse groups with a warning") {
  Vector scores = Vector::Constant(8, 1.0);
  Vector times(8);
  std::vector<int> statuses(8, 1);
  for (int i = 0; i < 8; ++i) times[i] = i + 1.0;
  const RiskStrata strata = risk_stratify(scores, {25, 75}, times, statuses);
  CHECK(strata.groups.size() == 1);
  CHECK(strata.groups[0].members.size() == 8);
  CHECK(strata.warnings.size() == 2);
}

TEST_CASE("stratification validates cutpoints") {
  Vector s = vec({1, 2, 3});
  Vector t = vec({1, 2, 3});
  std::vector<int> d{1, 1, 1};
  CHECK_THROWS_AS(risk_stratify(s, {}, t, d), ValidationError);
  CHECK_THROWS_AS(risk_stratify(s, {0.0, 50.0}, t, d), ValidationError);
  CHECK_THROWS_AS(risk_stratify(s, {80.0, 20.0}, t, d), ValidationError);
  CHECK_THROWS_AS(risk_stratify(s, {20.0, 100.0}, t, d), ValidationError);
}

TEST_CASE("km csv format") {
  Vector scores = vec({1, 2, 3, 4});
  Vector times = vec({4, 3, 2, 1});
  std::vector<int> statuses{1, 1, 1, 1};
  const RiskStrata strata = risk_stratify(scores, {50}, times, statuses);
  std::ostringstream out;
  write_km_csv(out, strata);
  CHECK(out.str() ==
        "group,t,survival\n"
        "0-50%,3,0.5\n"
        "0-50%,4,0\n"
        "50-100%,1,0.5\n"
        "50-100%,2,0\n");
}
