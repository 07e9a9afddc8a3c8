#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "coxkl/boosted_trees.hpp"
#include "coxkl/cox.hpp"
#include "coxkl/dataset.hpp"
#include "coxkl/external_scores.hpp"
#include "coxkl/types.hpp"

namespace coxkl {

enum class ExternalFamily { cox, boosted, null_model };

struct ExternalModelSpec {
  std::string label;
  ExternalFamily family = ExternalFamily::cox;
  double p_l_external = 1.0;
  std::vector<int> covariate_subset;  // observed columns, 0-based
  int n_external = 0;                 // 0 -> scenario default
};

/// One Monte Carlo scenario. Setting 1 has 6 observed covariates and a
/// fully observed truth; setting 2 has 5 observed covariates plus an
/// unobserved z1*z5 interaction and two hidden effects that enter outcome
/// generation only.
struct SimScenario {
  int setting = 1;
  int n_internal = 50;
  double censoring_target = 0.3;  // in [0, 0.95]
  double p_l_internal = 1.0;
  Vector beta_main;
  double interaction = 0.0;  // z1*z5 (setting 2)
  Vector hidden_coef;        // (setting 2)
  std::vector<ExternalModelSpec> externals;
  int n_external = 10000;
  int n_test = 1000;
  std::vector<double> cv_eta_grid;  // cell-specific CV grid; empty -> default

  static SimScenario setting1(int n, double censoring);
  static SimScenario setting2(int n, double censoring);
  int observed_p() const { return static_cast<int>(beta_main.size()); }
};

struct CovariateDraw {
  Matrix observed;
  Matrix hidden;  // n x 0 for setting 1
};

/// Setting 1: z1,z2 AR1(0.5) normals; z3,z4 Bernoulli(0.5); latent
/// z^l ~ Bernoulli(p_l); z5 ~ N(2 z^l, 1), z6 ~ N(-2 z^l, 1).
/// Setting 2: z1..z5 as above plus hidden columns Bernoulli(0.5), N(0,1).
CovariateDraw generate_covariates(int n, double p_l, int setting,
                                  std::mt19937_64& rng);

Vector true_log_risk(const SimScenario& scenario, const CovariateDraw& draw);

inline constexpr double kNoCensoring =
    std::numeric_limits<double>::infinity();

/// Event times from the shape-2 Weibull hazard 2t exp(log_risk) via exact
/// exponential inversion; censoring uniform on (0, censor_upper).
std::pair<Vector, std::vector<int>> generate_outcomes(const Vector& log_risk,
                                                      double censor_upper,
                                                      std::mt19937_64& rng);

/// Censoring upper bound hitting the target rate within tolerance, by
/// bisection on a 200k-draw Monte Carlo estimate. target 0 -> kNoCensoring.
double calibrate_censoring(const SimScenario& scenario, double target_rate,
                           std::uint64_t seed, double tolerance = 0.005);

/// A fitted external model, applicable to any observed-covariate matrix.
struct ExternalModel {
  std::string label;
  ExternalFamily family = ExternalFamily::cox;
  std::vector<int> subset;
  Vector beta_padded;  // cox family: coefficients zero-padded to observed p
  std::optional<BoostedTrees> trees;

  Vector score(const Matrix& observed) const;
  ExternalScores make_scores(const SurvivalDataset& data) const;
};

/// Simulates an external cohort (same outcome law, own latent prevalence)
/// and fits the spec's family on the spec's covariate subset.
ExternalModel build_external_model(const SimScenario& scenario,
                                   const ExternalModelSpec& spec,
                                   double censor_upper, std::mt19937_64& rng);

/// Internal Cox fit on [Z | external scores]; the evaluation risk score is
/// the fitted linear predictor of the augmented model.
CoxKLFit stacked_baseline(const SurvivalDataset& data,
                          const std::vector<ExternalScores>& exts);

struct MethodSummary {
  std::string method;
  double bias = std::numeric_limits<double>::quiet_NaN();
  double se = std::numeric_limits<double>::quiet_NaN();
  double mse = std::numeric_limits<double>::quiet_NaN();
  double c_mean = std::numeric_limits<double>::quiet_NaN();
  double c_median = std::numeric_limits<double>::quiet_NaN();
  double c_q25 = std::numeric_limits<double>::quiet_NaN();
  double c_q75 = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> selected_eta_mean;    // coxkl only, one per external
  std::vector<double> selected_eta_median;
};

struct SweepPoint {
  double eta;
  double mse;
  double c_mean;
};

struct ExperimentReport {
  std::string cell;
  int setting = 1;
  int replicates = 0;
  int completed = 0;
  int failed = 0;
  std::uint64_t seed = 0;
  int jobs = 1;
  double censor_upper = 0.0;
  std::string aggregation;
  std::vector<MethodSummary> methods;
  std::vector<SweepPoint> sweep;  // setting 1 only

  const MethodSummary& method(const std::string& name) const;
};

struct SimConfig {
  std::string cell;
  int replicates = 500;
  std::uint64_t seed = 7;
  int jobs = 1;
  int cv_folds = 5;
  std::vector<double> cv_eta_grid;     // empty -> cell default
  std::vector<double> sweep_eta_grid;  // empty -> default grid (setting 1)
  int n_external_override = 0;         // > 0 replaces the cell's default
};

std::vector<std::string> known_cells();
SimScenario scenario_for_cell(const std::string& cell);  // throws, listing cells
ExperimentReport run_cell(const SimConfig& config);

ExperimentReport run_setting1(const SimScenario& scenario,
                              const SimConfig& config);
ExperimentReport run_setting2(const SimScenario& scenario,
                              const SimConfig& config);

}  // namespace coxkl
