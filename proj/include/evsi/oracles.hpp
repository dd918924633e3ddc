#pragma once

#include "evsi/estimators.hpp"
#include "evsi/gaussian_update.hpp"
#include "evsi/pa_data.hpp"
#include "evsi/random.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>

namespace evsi {

struct PosteriorMoments {
  double mean = 0.0;
  double variance = 0.0;
  LikelihoodFamily family = LikelihoodFamily::gaussian;
};

/// Sufficient statistic of a simulated study of size n. `statistic` is the
/// sample mean (gaussian), the success count (bernoulli, binomial), the count
/// sum (poisson) or the sum of observations (exponential).
struct DataSummary {
  long n = 0;
  double statistic = 0.0;
};

/// Posterior hyperparameters after observing `data`.
ConjugatePrior conjugate_update(const Likelihood& likelihood, const ConjugatePrior& prior,
                                const DataSummary& data);

PosteriorMoments moments_of(const ConjugatePrior& distribution, LikelihoodFamily family);

PosteriorMoments conjugate_posterior_moments(const Likelihood& likelihood,
                                             const ConjugatePrior& prior, const DataSummary& data);

double sample_from(const ConjugatePrior& distribution, Rng& rng);

/// Draws the sufficient statistic of n observations at parameter phi.
double simulate_statistic(const Likelihood& likelihood, double phi, long n, double obs_variance,
                          Rng& rng);

/// E[INB | data] for the four stylized scenarios, from Gaussian raw moments
/// E[t^2] = m^2 + s^2 and E[t^4] = m^4 + 6 m^2 s^2 + 3 s^4.
double analytic_conditional_inb(int scenario, std::span<const PosteriorMoments> moments);

/// EVSI of INB = a + b * theta with a Gaussian prior and likelihood: the
/// preposterior mean of INB is N(a + b mu0, b^2 v sigma2 / n0), so EVSI is
/// the unit normal loss s * pdf(m/s) + m * cdf(m/s) - max(m, 0).
/// Pass n = +infinity for the EVPPI limit.
double closed_form_linear_gaussian_evsi(double a, double b, double mu0, double sigma2, double n0,
                                        double n);

/// Conjugate posterior analytics on shared PA samples: simulate the study
/// mean at each row's theta, update to the exact posterior, evaluate the
/// scenario's conditional INB in closed form.
EvsiEstimate analytic_evsi(const PaDataset& pa, int scenario, const DataCollectionSpec& spec,
                           long n, std::uint64_t seed);

/// A decision model the nested estimator can re-run on posterior draws.
struct NestedMcProblem {
  Index params = 0;
  Index decisions = 0;
  /// Fills theta with one joint draw from the prior.
  std::function<void(Rng&, Eigen::Ref<Eigen::VectorXd> theta)> sample_prior;
  /// Net benefit of every decision at theta.
  std::function<void(const Eigen::VectorXd& theta, Eigen::Ref<Eigen::VectorXd> nb)> benefits;
};

/// Two-level Monte Carlo: `outer` prior draws each generate a study of size n,
/// the conjugate posterior of every focal parameter is formed exactly, and
/// `inner` posterior draws (non-focal parameters from their prior) estimate
/// the conditional benefits. Outer iteration k uses its own derived random
/// stream, so the result is independent of `threads`.
EvsiEstimate nested_mc_evsi(const NestedMcProblem& problem, const DataCollectionSpec& spec, long n,
                            long outer, long inner, std::uint64_t seed, unsigned threads = 0);

}  // namespace evsi
