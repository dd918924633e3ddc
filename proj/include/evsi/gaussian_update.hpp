#pragma once

#include "evsi/pa_data.hpp"

#include <Eigen/Dense>

#include <span>
#include <variant>

namespace evsi {

/// Share of prior variance that the preposterior mean retains after a study
/// of size n: v = n / (n0 + n).
struct VarianceFraction {
  double v = 0.0;
  long n = 0;
  double n0 = 1.0;
};

VarianceFraction variance_fraction(long n, double n0);

/// sqrt(v) * phi_i + (1 - sqrt(v)) * mu0 for every sample.
Eigen::VectorXd rescale_prior_samples(std::span<const double> phi, double mu0,
                                      const VarianceFraction& v);

/// Rescaled samples for every focal column of the PA dataset (M x J), each
/// focal parameter with its own n0 and mu0.
Eigen::MatrixXd preposterior_means(const PaDataset& pa, const DataCollectionSpec& spec, long n);

struct GaussianPrior {
  double mean = 0.0;
  double variance = 1.0;      // prior variance of phi
  double obs_variance = 1.0;  // per-observation variance sigma^2
};
struct BetaPrior {
  double alpha = 1.0;
  double beta = 1.0;
};
/// Shape/rate parameterisation.
struct GammaPrior {
  double shape = 1.0;
  double rate = 1.0;
};

using ConjugatePrior = std::variant<GaussianPrior, BetaPrior, GammaPrior>;

struct PriorEss {
  double n0 = 0.0;
  double mu0 = 0.0;
  double sigma2 = 0.0;
};

/// Prior effective sample size of a conjugate prior, with the matching prior
/// mean and per-observation variance:
///   Beta(a,b) + Bernoulli           n0 = a+b,      mu0 = a/(a+b), sigma2 = mu0(1-mu0)
///   Beta(a,b) + Binomial(m)         n0 = (a+b)/m,  mu0 = a/(a+b), sigma2 = mu0(1-mu0)/m
///   Gamma(a,b) + Poisson            n0 = b,        mu0 = a/b,     sigma2 = mu0
///   Gamma(a,b) + Exponential(rate)  n0 = a,        mu0 = a/b,     sigma2 = mu0^2
///   Normal(mu0, w) + Normal(., s2)  n0 = s2/w
/// Throws UnsupportedFamilyError for any other pairing.
PriorEss conjugate_prior_ess(const Likelihood& likelihood, const ConjugatePrior& prior);

/// Inverse of conjugate_prior_ess: the conjugate prior implied by one focal
/// parameter's (mu0, sigma2, n0) under the given likelihood.
ConjugatePrior conjugate_prior_from_spec(const Likelihood& likelihood, double mu0, double sigma2,
                                         double n0);

}  // namespace evsi
