#pragma once

#include "evsi/pa_data.hpp"
#include "evsi/random.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <span>

namespace evsi {

/// Per-sample conditional variances of one focal parameter: the raw inverse
/// expected Fisher information at each preposterior mean, and the same values
/// rescaled by C so that their mean equals `target`.
struct ConditionalVariances {
  Eigen::VectorXd raw;
  Eigen::VectorXd adjusted;
  double scale = 1.0;  // C
  double target = 0.0;
};

/// Which value the mean conditional variance is pinned to.
enum class VarianceTarget {
  total_variance,  // sigma2 / (n0 + n): law of total variance
  paper_literal,   // v * sigma2 / n0, as printed in the method's derivation
};

/// Clamps phi into the interior of the family's parameter space:
/// [1e-6, 1 - 1e-6] for probabilities, >= 1e-9 for rates and means.
double clamp_to_domain(const Likelihood& likelihood, double phi);

/// I_n(phi) for n i.i.d. observations. Gaussian uses `obs_variance`.
double expected_fisher(const Likelihood& likelihood, double phi, long n, double obs_variance = 1.0);

using LogDensity = std::function<double(double observation, double phi)>;
using ObservationSampler = std::function<double(Rng& rng, double phi)>;

LogDensity log_density_for(const Likelihood& likelihood, double obs_variance = 1.0);
ObservationSampler sampler_for(const Likelihood& likelihood, double obs_variance = 1.0);

/// -n times the Monte Carlo mean, over `draws` observations drawn at phi, of
/// the central second difference of the log density in phi with step
/// max(1e-4, 1e-4 |phi|). Throws NumericInstabilityError when the result is
/// not clearly positive.
double numeric_expected_fisher(const LogDensity& log_density, const ObservationSampler& sampler,
                               double phi, long n, long draws, std::uint64_t seed);

double target_conditional_variance(long n, double n0, double sigma2,
                                   VarianceTarget target = VarianceTarget::total_variance);

ConditionalVariances adjust_conditional_variances(std::span<const double> inv_info, double target);

struct VarianceOptions {
  bool adjust = true;
  VarianceTarget target = VarianceTarget::total_variance;
};

/// Inverse expected information at each preposterior mean, optionally adjusted.
/// For n = 0 every variance equals the prior target (no information yet).
ConditionalVariances fisher_conditional_variances(const Likelihood& likelihood,
                                                  std::span<const double> mu_x, long n, double n0,
                                                  double sigma2, const VarianceOptions& options = {});

}  // namespace evsi
