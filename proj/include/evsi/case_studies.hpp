#pragma once

#include "evsi/oracles.hpp"
#include "evsi/pa_data.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace evsi {

// Stylized scenarios with Gaussian focal parameters theta ~ N(0, 1/5):
//   1: -100 + 5000 t
//   2: -1000 + 5000 t^2
//   3: -500 + 5000 t^4
//   4: -1500 + 5000 t1^2 + 5000 t2^4
struct StylizedScenario {
  int id = 1;

  static constexpr double prior_mean = 0.0;
  static constexpr double obs_variance = 1.0;
  static constexpr double prior_n0 = 5.0;

  explicit StylizedScenario(int scenario_id);
  Index focal_count() const noexcept { return id == 4 ? 2 : 1; }
};

double stylized_inb(const StylizedScenario& scenario, std::span<const double> theta);

/// D = 2 dataset with decisions ("new", "reference"): nb.new = INB(theta),
/// nb.reference = 0, so incremental_nb(pa, 1) recovers the INB.
PaDataset generate_case1_pa(const StylizedScenario& scenario, Index m, std::uint64_t seed);

/// Gaussian likelihood on every focal parameter with mu0 = 0, sigma2 = 1, n0 = 5.
DataCollectionSpec case1_spec(const StylizedScenario& scenario);

NestedMcProblem case1_problem(const StylizedScenario& scenario);

struct MarkovModelConfig {
  std::array<std::string, 3> state_labels{"on_treatment", "disabled", "dead"};
  std::array<std::string, 3> intervention_labels{"A", "B", "C"};
  std::array<double, 3> state_utility{0.85, 0.75, 0.0};    // QALY per cycle
  std::array<double, 3> state_cost{1000.0, 3000.0, 0.0};   // per cycle
  std::array<double, 3> treatment_cost{10500.0, 0.0, 0.0};  // per cycle on treatment
  std::array<bool, 3> has_visits{true, true, false};
  double cost_per_visit = 8000.0;
  double p_death_on_treatment = 0.02;
  double p_death_disabled = 0.10;
  double p_failure_standard = 0.55;  // failure probability of intervention C
  int horizon = 20;
  double discount_rate = 0.03;
  double wtp = 50000.0;

  /// Throws ValidationError on any broken invariant.
  void validate() const;
};

/// (mu_A, mu_B, P_A, P_B): mean hospital visits per cycle and per-cycle
/// treatment failure probabilities.
struct MarkovParameters {
  double mu_a = 1.0;
  double mu_b = 2.0;
  double p_a = 0.2;
  double p_b = 0.3;
};

/// Competing risks from the on-treatment state: death with the state's death
/// probability, otherwise failure to permanent disability with probability
/// `failure`. Disability exits only to death; death is absorbing.
Eigen::Matrix3d transition_matrix(const MarkovModelConfig& config, double failure);

struct CohortResult {
  std::array<double, 3> net_benefit{};
  std::array<double, 3> qalys{};  // discounted
  std::array<double, 3> costs{};  // discounted
  /// occupancy[d] is (horizon + 1) x 3, row 0 the initial point mass.
  std::array<Eigen::MatrixX3d, 3> occupancy;
};

/// Deterministic cohort propagation from the on-treatment state, payoffs
/// counted at the end of cycles 1..horizon with factor (1 + r)^-t.
CohortResult markov_cohort_trace(const MarkovModelConfig& config, const MarkovParameters& theta);

/// Net benefits only, without the trace. Checks theta but not the config;
/// callers validate the config once.
std::array<double, 3> markov_cohort_run(const MarkovModelConfig& config,
                                        const MarkovParameters& theta);

/// Priors: mu_A ~ Gamma(10, 10), mu_B ~ Gamma(20, 10), P_A ~ Beta(2, 8),
/// P_B ~ Beta(3, 7) (shape/rate), drawn independently per row.
struct Case2Priors {
  GammaPrior mu_a{10.0, 10.0};
  GammaPrior mu_b{20.0, 10.0};
  BetaPrior p_a{2.0, 8.0};
  BetaPrior p_b{3.0, 7.0};
};

MarkovParameters sample_case2_parameters(Rng& rng, const Case2Priors& priors = {});

/// Columns mu_a, mu_b, p_a, p_b; decisions named after the interventions.
PaDataset generate_case2_pa(const MarkovModelConfig& config, Index m, std::uint64_t seed);

/// Data-collection exercises 1..4 inform mu_a (Poisson), mu_b (Poisson),
/// p_a (Bernoulli) and p_b (Bernoulli) respectively.
DataCollectionSpec case2_spec(int exercise, const Case2Priors& priors = {});

NestedMcProblem case2_problem(const MarkovModelConfig& config, const Case2Priors& priors = {});

}  // namespace evsi
