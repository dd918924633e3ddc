#include "evsi/case_studies.hpp"

#include "evsi/error.hpp"
#include "evsi/gaussian_update.hpp"

#include <cmath>
#include <string>

namespace evsi {
namespace {

constexpr std::string_view kModule = "case-studies";

bool is_probability(double p) { return std::isfinite(p) && p >= 0.0 && p <= 1.0; }

}  // namespace

StylizedScenario::StylizedScenario(int scenario_id) : id(scenario_id) {
  if (id < 1 || id > 4)
    throw DomainError(kModule, "StylizedScenario", "scenario id must be 1..4, got " + std::to_string(id));
}

double stylized_inb(const StylizedScenario& scenario, std::span<const double> theta) {
  if (static_cast<Index>(theta.size()) != scenario.focal_count())
    throw ShapeError(kModule, "stylized_inb",
                     "scenario " + std::to_string(scenario.id) + " takes " +
                         std::to_string(scenario.focal_count()) + " parameters");
  const double t = theta[0];
  switch (scenario.id) {
    case 1: return -100.0 + 5000.0 * t;
    case 2: return -1000.0 + 5000.0 * t * t;
    case 3: return -500.0 + 5000.0 * t * t * t * t;
    default: {
      const double u = theta[1];
      return -1500.0 + 5000.0 * t * t + 5000.0 * u * u * u * u;
    }
  }
}

PaDataset generate_case1_pa(const StylizedScenario& scenario, Index m, std::uint64_t seed) {
  if (m < 2) throw InsufficientDataError(kModule, "generate_case1_pa", "M must be >= 2");
  const Index p = scenario.focal_count();
  const double sd = std::sqrt(StylizedScenario::obs_variance / StylizedScenario::prior_n0);
  Eigen::MatrixXd theta(m, p);
  Eigen::MatrixXd nb = Eigen::MatrixXd::Zero(m, 2);
  std::array<double, 2> row{};
  for (Index i = 0; i < m; ++i) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(i));
    for (Index j = 0; j < p; ++j) {
      row[static_cast<std::size_t>(j)] = sample_normal(rng, StylizedScenario::prior_mean, sd);
      theta(i, j) = row[static_cast<std::size_t>(j)];
    }
    nb(i, 0) = stylized_inb(scenario, std::span<const double>(row.data(), static_cast<std::size_t>(p)));
  }
  std::vector<std::string> names =
      p == 1 ? std::vector<std::string>{"theta"} : std::vector<std::string>{"theta1", "theta2"};
  return PaDataset(std::move(theta), std::move(nb), std::move(names), {"new", "reference"});
}

DataCollectionSpec case1_spec(const StylizedScenario& scenario) {
  DataCollectionSpec spec;
  spec.likelihood = {LikelihoodFamily::gaussian, 1};
  for (Index j = 0; j < scenario.focal_count(); ++j) {
    spec.focal_indices.push_back(j);
    spec.mu0.push_back(StylizedScenario::prior_mean);
    spec.sigma2.push_back(StylizedScenario::obs_variance);
    spec.n0.push_back(StylizedScenario::prior_n0);
  }
  return spec;
}

NestedMcProblem case1_problem(const StylizedScenario& scenario) {
  NestedMcProblem problem;
  problem.params = scenario.focal_count();
  problem.decisions = 2;
  const double sd = std::sqrt(StylizedScenario::obs_variance / StylizedScenario::prior_n0);
  problem.sample_prior = [sd](Rng& rng, Eigen::Ref<Eigen::VectorXd> theta) {
    for (Index j = 0; j < theta.size(); ++j)
      theta(j) = sample_normal(rng, StylizedScenario::prior_mean, sd);
  };
  problem.benefits = [scenario](const Eigen::VectorXd& theta, Eigen::Ref<Eigen::VectorXd> nb) {
    nb(0) = stylized_inb(scenario, std::span<const double>(theta.data(), static_cast<std::size_t>(theta.size())));
    nb(1) = 0.0;
  };
  return problem;
}

void MarkovModelConfig::validate() const {
  constexpr std::string_view op = "validate";
  for (double p : {p_death_on_treatment, p_death_disabled, p_failure_standard})
    if (!is_probability(p)) throw ValidationError(kModule, op, "probabilities must lie in [0,1]");
  if (horizon < 1) throw ValidationError(kModule, op, "horizon must be >= 1");
  if (!(wtp > 0.0) || !std::isfinite(wtp)) throw ValidationError(kModule, op, "wtp must be > 0");
  if (!(discount_rate > -1.0) || !std::isfinite(discount_rate))
    throw ValidationError(kModule, op, "discount rate must be > -1");
  if (!std::isfinite(cost_per_visit)) throw ValidationError(kModule, op, "cost per visit must be finite");
  for (std::size_t s = 0; s < 3; ++s) {
    if (!std::isfinite(state_utility[s]) || !std::isfinite(state_cost[s]) ||
        !std::isfinite(treatment_cost[s]))
      throw ValidationError(kModule, op, "utilities and costs must be finite");
    if (state_labels[s].empty() || intervention_labels[s].empty())
      throw ValidationError(kModule, op, "labels must be nonempty");
  }
}

Eigen::Matrix3d transition_matrix(const MarkovModelConfig& config, double failure) {
  if (!is_probability(failure))
    throw DomainError(kModule, "transition_matrix", "failure probability must lie in [0,1]");
  const double pd = config.p_death_on_treatment;
  const double pdd = config.p_death_disabled;
  Eigen::Matrix3d t;
  t << (1.0 - failure) * (1.0 - pd), failure * (1.0 - pd), pd,
      0.0, 1.0 - pdd, pdd,
      0.0, 0.0, 1.0;
  return t;
}

namespace {

void check_parameters(const MarkovParameters& theta) {
  constexpr std::string_view op = "markov_cohort_run";
  if (!is_probability(theta.p_a) || !is_probability(theta.p_b))
    throw DomainError(kModule, op, "failure probabilities must lie in [0,1]");
  if (!(theta.mu_a >= 0.0) || !(theta.mu_b >= 0.0) || !std::isfinite(theta.mu_a) ||
      !std::isfinite(theta.mu_b))
    throw DomainError(kModule, op, "mean visit counts must be finite and >= 0");
}

// Propagates intervention d; `trace` may be null.
void propagate(const MarkovModelConfig& config, const MarkovParameters& theta, std::size_t d,
               double& qalys, double& costs, Eigen::MatrixX3d* trace) {
  const std::array<double, 3> failure{theta.p_a, theta.p_b, config.p_failure_standard};
  const std::array<double, 3> visits{theta.mu_a, theta.mu_b, 0.0};
  const Eigen::Matrix3d t = transition_matrix(config, failure[d]);
  const double on_treatment_cost = config.state_cost[0] + config.treatment_cost[d] +
                                   (config.has_visits[d] ? visits[d] * config.cost_per_visit : 0.0);
  const Eigen::RowVector3d utility(config.state_utility[0], config.state_utility[1],
                                   config.state_utility[2]);
  const Eigen::RowVector3d cost(on_treatment_cost, config.state_cost[1], config.state_cost[2]);
  Eigen::RowVector3d occ(1.0, 0.0, 0.0);
  if (trace) {
    trace->resize(config.horizon + 1, 3);
    trace->row(0) = occ;
  }
  double q = 0.0;
  double c = 0.0;
  double factor = 1.0;
  for (int cycle = 1; cycle <= config.horizon; ++cycle) {
    occ = occ * t;
    if (trace) trace->row(cycle) = occ;
    factor /= 1.0 + config.discount_rate;
    q += factor * occ.dot(utility);
    c += factor * occ.dot(cost);
  }
  qalys = q;
  costs = c;
}

}  // namespace

CohortResult markov_cohort_trace(const MarkovModelConfig& config, const MarkovParameters& theta) {
  check_parameters(theta);
  config.validate();
  CohortResult out;
  for (std::size_t d = 0; d < 3; ++d) {
    propagate(config, theta, d, out.qalys[d], out.costs[d], &out.occupancy[d]);
    out.net_benefit[d] = config.wtp * out.qalys[d] - out.costs[d];
  }
  return out;
}

std::array<double, 3> markov_cohort_run(const MarkovModelConfig& config,
                                        const MarkovParameters& theta) {
  check_parameters(theta);
  std::array<double, 3> nb{};
  for (std::size_t d = 0; d < 3; ++d) {
    double q = 0.0;
    double c = 0.0;
    propagate(config, theta, d, q, c, nullptr);
    nb[d] = config.wtp * q - c;
  }
  return nb;
}

MarkovParameters sample_case2_parameters(Rng& rng, const Case2Priors& priors) {
  MarkovParameters p;
  p.mu_a = sample_gamma(rng, priors.mu_a.shape, priors.mu_a.rate);
  p.mu_b = sample_gamma(rng, priors.mu_b.shape, priors.mu_b.rate);
  p.p_a = sample_beta(rng, priors.p_a.alpha, priors.p_a.beta);
  p.p_b = sample_beta(rng, priors.p_b.alpha, priors.p_b.beta);
  return p;
}

PaDataset generate_case2_pa(const MarkovModelConfig& config, Index m, std::uint64_t seed) {
  if (m < 2) throw InsufficientDataError(kModule, "generate_case2_pa", "M must be >= 2");
  config.validate();
  Eigen::MatrixXd theta(m, 4);
  Eigen::MatrixXd nb(m, 3);
  for (Index i = 0; i < m; ++i) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(i));
    const MarkovParameters p = sample_case2_parameters(rng);
    theta.row(i) << p.mu_a, p.mu_b, p.p_a, p.p_b;
    const auto values = markov_cohort_run(config, p);
    nb.row(i) << values[0], values[1], values[2];
  }
  return PaDataset(std::move(theta), std::move(nb), {"mu_a", "mu_b", "p_a", "p_b"},
                   {config.intervention_labels[0], config.intervention_labels[1],
                    config.intervention_labels[2]});
}

DataCollectionSpec case2_spec(int exercise, const Case2Priors& priors) {
  if (exercise < 1 || exercise > 4)
    throw DomainError(kModule, "case2_spec", "exercise must be 1..4");
  DataCollectionSpec spec;
  spec.focal_indices = {exercise - 1};
  ConjugatePrior prior;
  switch (exercise) {
    case 1: spec.likelihood = {LikelihoodFamily::poisson, 1}; prior = priors.mu_a; break;
    case 2: spec.likelihood = {LikelihoodFamily::poisson, 1}; prior = priors.mu_b; break;
    case 3: spec.likelihood = {LikelihoodFamily::bernoulli, 1}; prior = priors.p_a; break;
    default: spec.likelihood = {LikelihoodFamily::bernoulli, 1}; prior = priors.p_b; break;
  }
  const PriorEss ess = conjugate_prior_ess(spec.likelihood, prior);
  spec.mu0 = {ess.mu0};
  spec.sigma2 = {ess.sigma2};
  spec.n0 = {ess.n0};
  return spec;
}

NestedMcProblem case2_problem(const MarkovModelConfig& config, const Case2Priors& priors) {
  config.validate();
  NestedMcProblem problem;
  problem.params = 4;
  problem.decisions = 3;
  problem.sample_prior = [priors](Rng& rng, Eigen::Ref<Eigen::VectorXd> theta) {
    const MarkovParameters p = sample_case2_parameters(rng, priors);
    theta << p.mu_a, p.mu_b, p.p_a, p.p_b;
  };
  problem.benefits = [config](const Eigen::VectorXd& theta, Eigen::Ref<Eigen::VectorXd> nb) {
    const auto values = markov_cohort_run(config, {theta(0), theta(1), theta(2), theta(3)});
    nb << values[0], values[1], values[2];
  };
  return problem;
}

}  // namespace evsi
