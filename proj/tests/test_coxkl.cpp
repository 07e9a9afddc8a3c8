#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "coxkl/coxkl.hpp"
#include "test_util.hpp"

using namespace coxkl;
using testutil::make_data;

namespace {

ExternalScores scores_of(const std::vector<double>& values) {
  Vector v(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) v[i] = values[i];
  return ExternalScores::from_scores("ext", std::move(v));
}

ExternalScores random_scores(std::mt19937_64& rng, int n) {
  return ExternalScores::from_scores("ext", testutil::random_vector(rng, n));
}

}  // namespace

TEST_CASE("pseudo-covariates: constant scores give the risk-set mean") {
  const SurvivalDataset data =
      make_data({1, 2, 3}, {1, 1, 1}, {{0.0}, {1.0}, {2.0}});
  const PseudoCovariates pc =
      external_weighted_covariates(data, scores_of({3.0, 3.0, 3.0}));
  CHECK(pc.z_tilde(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pc.z_tilde(1, 0) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(pc.z_tilde(2, 0) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("pseudo-covariates: weighted hand example") {
  // 3 at-risk subjects, z = (0,1,2), weights proportional to (1,2,3).
  const SurvivalDataset data =
      make_data({1, 2, 3}, {1, 1, 1}, {{0.0}, {1.0}, {2.0}});
  const PseudoCovariates pc = external_weighted_covariates(
      data, scores_of({0.0, std::log(2.0), std::log(3.0)}));
  CHECK(pc.z_tilde(0, 0) == doctest::Approx(8.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("pseudo-covariates: singleton risk set returns that subject") {
  std::mt19937_64 rng(3);
  const SurvivalDataset data = testutil::random_dataset(rng, 12, 2, 0.0);
  const ExternalScores ext = random_scores(rng, 12);
  const PseudoCovariates pc = external_weighted_covariates(data, ext);
  const int last = data.num_event_times() - 1;
  REQUIRE(data.risk_count(last) == 1);
  const int subject = data.risk_rows_at(last)[0];
  CHECK((pc.z_tilde.row(last) - data.covariates().row(subject)).norm() < 1e-12);
}

TEST_CASE("pseudo-covariates stay in the at-risk envelope") {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 20; ++rep) {
    const SurvivalDataset data = testutil::random_dataset(rng, 25, 3, 0.3, true);
    const ExternalScores ext = random_scores(rng, 25);
    const PseudoCovariates pc = external_weighted_covariates(data, ext);
    for (int k = 0; k < data.num_event_times(); ++k) {
      for (int j = 0; j < data.p(); ++j) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (int i : data.risk_rows_at(k)) {
          lo = std::min(lo, data.covariates()(i, j));
          hi = std::max(hi, data.covariates()(i, j));
        }
        CHECK(pc.z_tilde(k, j) >= lo - 1e-10);
        CHECK(pc.z_tilde(k, j) <= hi + 1e-10);
      }
    }
  }
}

TEST_CASE("kl divergence closed forms") {
  // Linear scores evaluated at their own coefficients: identical densities.
  std::mt19937_64 rng(23);
  const SurvivalDataset data = testutil::random_dataset(rng, 20, 2, 0.2);
  const Vector beta_tilde = testutil::random_vector(rng, 2, 0.6);
  const ExternalScores linear =
      ExternalScores::linear("lin", data, beta_tilde);
  CHECK(kl_divergence(data, linear, beta_tilde) ==
        doctest::Approx(0.0).epsilon(1e-12));

  // Every risk set a singleton: point masses, zero divergence at any beta.
  const SurvivalDataset spread =
      make_data({1, 2, 3}, {1, 1, 1}, {{0.4}, {-0.2}, {0.9}});
  // Drop earlier subjects from later risk sets is impossible here, so use a
  // singleton dataset instead.
  const SurvivalDataset solo = make_data({2}, {1}, {{0.5}});
  Vector any(1);
  any << 1.7;
  CHECK(kl_divergence(solo, scores_of({0.3}), any) == doctest::Approx(0.0));
  (void)spread;

  // K=1, two at risk, flat external, beta = log 3.
  const SurvivalDataset pair = make_data({1, 2}, {1, 0}, {{1.0}, {0.0}});
  Vector log3(1);
  log3 << std::log(3.0);
  const double expected = 0.5 * std::log(0.5 / 0.75) + 0.5 * std::log(0.5 / 0.25);
  CHECK(kl_divergence(pair, scores_of({0.0, 0.0}), log3) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("kl divergence is nonnegative and matches the direct oracle") {
  std::mt19937_64 rng(33);
  for (int rep = 0; rep < 30; ++rep) {
    const SurvivalDataset data = testutil::random_dataset(rng, 20, 2, 0.3, true);
    const ExternalScores ext = random_scores(rng, 20);
    const Vector beta = testutil::random_vector(rng, 2, 0.8);
    const double kl = kl_divergence(data, ext, beta);
    CHECK(kl >= 0.0);
    CHECK(kl == doctest::Approx(testutil::naive_kl(data, ext, beta))
                    .epsilon(1e-9)
                    .scale(1.0 + kl));
  }
}

TEST_CASE("objective reduces to the log-partial likelihood at eta 0") {
  std::mt19937_64 rng(43);
  const SurvivalDataset data = testutil::random_dataset(rng, 25, 3, 0.3);
  const ExternalScores ext = random_scores(rng, 25);
  const Vector beta = testutil::random_vector(rng, 3, 0.7);
  CHECK(coxkl_objective(data, {ext}, {0.0}, beta) ==
        log_partial_likelihood(data, beta));
}

TEST_CASE("constant-score objective blends toward the risk-set mean") {
  // Single external with constant scores at eta = 1: the numerator becomes
  // (Z_k + mean at risk)/2; hand computation on the 2-subject dataset.
  const SurvivalDataset pair = make_data({1, 2}, {1, 1}, {{1.0}, {0.0}});
  Vector beta(1);
  beta << 0.8;
  const double log_denom1 = std::log(std::exp(0.8) + 1.0);
  const double expected = (1.0 + 0.5) / 2.0 * 0.8 - log_denom1  // t = 1
                          + (0.0 + 0.0) / 2.0 * 0.8 - 0.0;      // t = 2
  CHECK(coxkl_objective(pair, {scores_of({2.0, 2.0})}, {1.0}, beta) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("proposition-1 identity: closed form vs direct penalty") {
  std::mt19937_64 rng(53);
  for (int rep = 0; rep < 40; ++rep) {
    const bool tied = rep % 2 == 0;
    const SurvivalDataset data =
        testutil::random_dataset(rng, 15 + static_cast<int>(rng() % 15), 2,
                                 0.3, tied);
    const ExternalScores ext = random_scores(rng, data.n());
    const double eta = std::exp(testutil::random_vector(rng, 1, 1.2)[0]);
    const Vector beta1 = testutil::random_vector(rng, 2, 0.8);
    const Vector beta2 = testutil::random_vector(rng, 2, 0.8);

    const double lhs = (1.0 + eta) * (coxkl_objective(data, {ext}, {eta}, beta1) -
                                      coxkl_objective(data, {ext}, {eta}, beta2));
    const double pen1 = testutil::naive_lpl(data, beta1) -
                        eta * testutil::naive_kl(data, ext, beta1);
    const double pen2 = testutil::naive_lpl(data, beta2) -
                        eta * testutil::naive_kl(data, ext, beta2);
    CHECK(lhs == doctest::Approx(pen1 - pen2)
                     .epsilon(1e-8)
                     .scale(1.0 + std::abs(lhs)));
  }
}

TEST_CASE("proposition-1 identity with two external score sets") {
  std::mt19937_64 rng(63);
  for (int rep = 0; rep < 15; ++rep) {
    const SurvivalDataset data = testutil::random_dataset(rng, 20, 2, 0.3);
    const ExternalScores e1 = random_scores(rng, 20);
    const ExternalScores e2 = random_scores(rng, 20);
    const std::vector<double> etas{0.7, 2.3};
    const Vector beta1 = testutil::random_vector(rng, 2, 0.8);
    const Vector beta2 = testutil::random_vector(rng, 2, 0.8);

    const double scale = 1.0 + etas[0] + etas[1];
    const double lhs =
        scale * (coxkl_objective(data, {e1, e2}, etas, beta1) -
                 coxkl_objective(data, {e1, e2}, etas, beta2));
    auto penalized = [&](const Vector& b) {
      return testutil::naive_lpl(data, b) -
             etas[0] * testutil::naive_kl(data, e1, b) -
             etas[1] * testutil::naive_kl(data, e2, b);
    };
    CHECK(lhs == doctest::Approx(penalized(beta1) - penalized(beta2))
                     .epsilon(1e-8)
                     .scale(1.0 + std::abs(lhs)));
  }
}

TEST_CASE("score and information match the objective derivatives") {
  std::mt19937_64 rng(73);
  for (int rep = 0; rep < 15; ++rep) {
    const SurvivalDataset data = testutil::random_dataset(rng, 20, 3, 0.3);
    const ExternalScores ext = random_scores(rng, 20);
    const std::vector<double> etas{1.4};
    const Vector beta = testutil::random_vector(rng, 3, 0.6);

    const auto [score, info] =
        coxkl_score_and_information(data, {ext}, etas, beta);
    const Vector fd = testutil::fd_gradient(
        [&](const Vector& b) {
          return coxkl_objective(data, {ext}, etas, b);
        },
        beta);
    for (int j = 0; j < 3; ++j)
      CHECK(score[j] ==
            doctest::Approx(fd[j]).epsilon(1e-6).scale(1.0 + std::abs(fd[j])));

    // Information is eta-free: it equals the internal-model information.
    const auto [score0, info0] = score_and_information(data, beta);
    CHECK((info - info0).lpNorm<Eigen::Infinity>() < 1e-12);
    (void)score0;
  }
}

TEST_CASE("eta validation") {
  std::mt19937_64 rng(83);
  const SurvivalDataset data = testutil::random_dataset(rng, 10, 1, 0.0);
  const ExternalScores ext = random_scores(rng, 10);
  const Vector beta = Vector::Zero(1);
  CHECK_THROWS_AS(coxkl_objective(data, {ext}, {-0.5}, beta), ValidationError);
  CHECK_THROWS_AS(coxkl_objective(data, {ext}, {1.0, 2.0}, beta),
                  ValidationError);
  CHECK_THROWS_AS(
      ExternalScores::from_scores("bad", Vector::Constant(3, std::nan(""))),
      ValidationError);
}

TEST_CASE("fit at eta 0 equals the internal fit exactly") {
  std::mt19937_64 rng(93);
  for (int rep = 0; rep < 10; ++rep) {
    const SurvivalDataset data = testutil::random_dataset(rng, 30, 3, 0.3);
    const ExternalScores ext = random_scores(rng, 30);
    const CoxKLFit internal = fit_cox(data);
    const CoxKLFit integrated = fit_coxkl(data, {ext}, {0.0});
    CHECK((internal.beta - integrated.beta).lpNorm<Eigen::Infinity>() <= 1e-10);
  }
}

TEST_CASE("huge eta pulls a linear external back to its coefficients") {
  std::mt19937_64 rng(103);
  for (int rep = 0; rep < 10; ++rep) {
    const SurvivalDataset data = testutil::random_dataset(rng, 30, 2, 0.3);
    const Vector beta_tilde = testutil::random_vector(rng, 2, 0.5);
    const ExternalScores ext = ExternalScores::linear("lin", data, beta_tilde);
    const CoxKLFit fit = fit_coxkl(data, {ext}, {1e6});
    REQUIRE(fit.converged);
    CHECK((fit.beta - beta_tilde).lpNorm<Eigen::Infinity>() < 1e-3);
  }
}

TEST_CASE("shrinkage path moves continuously from internal fit to external") {
  std::mt19937_64 rng(113);
  const SurvivalDataset data = testutil::random_dataset(rng, 40, 2, 0.25);
  const Vector beta_tilde = testutil::random_vector(rng, 2, 0.5);
  const ExternalScores ext = ExternalScores::linear("lin", data, beta_tilde);
  const std::vector<PseudoCovariates> pseudo{
      external_weighted_covariates(data, ext)};

  const CoxKLFit internal = fit_cox(data);
  REQUIRE(internal.converged);

  Vector prev = internal.beta;
  for (double eta : {0.1, 0.5, 1.0, 3.0, 10.0, 100.0, 1e4, 1e6}) {
    const CoxKLFit fit = fit_coxkl(data, pseudo, {eta});
    REQUIRE(fit.converged);
    // Moves toward beta_tilde without jumps.
    CHECK((fit.beta - prev).norm() < 0.8 * (internal.beta - beta_tilde).norm() +
                                         1e-6);
    prev = fit.beta;
  }
  CHECK((prev - beta_tilde).lpNorm<Eigen::Infinity>() < 1e-3);
}

TEST_CASE("translation of external scores changes nothing") {
  std::mt19937_64 rng(123);
  const SurvivalDataset data = testutil::random_dataset(rng, 30, 2, 0.3);
  const Vector raw = testutil::random_vector(rng, 30);
  const ExternalScores base = ExternalScores::from_scores("a", raw);
  const ExternalScores shifted =
      ExternalScores::from_scores("b", raw.array() + 42.0);

  const PseudoCovariates pa = external_weighted_covariates(data, base);
  const PseudoCovariates pb = external_weighted_covariates(data, shifted);
  CHECK((pa.z_tilde - pb.z_tilde).lpNorm<Eigen::Infinity>() < 1e-10);

  const CoxKLFit fa = fit_coxkl(data, {base}, {2.0});
  const CoxKLFit fb = fit_coxkl(data, {shifted}, {2.0});
  CHECK((fa.beta - fb.beta).lpNorm<Eigen::Infinity>() < 1e-8);
}

TEST_CASE("scores subset stays aligned with dataset subset") {
  std::mt19937_64 rng(133);
  const SurvivalDataset data = testutil::random_dataset(rng, 20, 2, 0.2);
  const Vector beta_tilde = testutil::random_vector(rng, 2, 0.5);
  const ExternalScores ext = ExternalScores::linear("lin", data, beta_tilde);
  const std::vector<int> keep{0, 3, 4, 7, 11, 12, 15, 19};
  const SurvivalDataset sub = data.subset(keep);
  const ExternalScores sub_ext = ext.subset(keep);
  sub_ext.check_alignment(sub);
  CHECK((sub_ext.scores() - sub.covariates() * beta_tilde)
            .lpNorm<Eigen::Infinity>() < 1e-12);

  CHECK_THROWS_AS(ext.check_alignment(sub), ValidationError);
}
