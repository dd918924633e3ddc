#include "evsi/fisher.hpp"

#include "evsi/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace evsi {
namespace {
constexpr std::string_view kModule = "fisher-info";
constexpr double kProbFloor = 1e-6;
constexpr double kRateFloor = 1e-9;
}  // namespace

double clamp_to_domain(const Likelihood& likelihood, double phi) {
  switch (likelihood.family) {
    case LikelihoodFamily::bernoulli:
    case LikelihoodFamily::binomial:
      return std::clamp(phi, kProbFloor, 1.0 - kProbFloor);
    case LikelihoodFamily::poisson:
    case LikelihoodFamily::exponential:
      return std::max(phi, kRateFloor);
    default:
      return phi;
  }
}

double expected_fisher(const Likelihood& likelihood, double phi, long n, double obs_variance) {
  constexpr std::string_view op = "expected_fisher";
  if (n < 1) throw DomainError(kModule, op, "n must be >= 1");
  if (!std::isfinite(phi)) throw DomainError(kModule, op, "phi is not finite");
  const double p = clamp_to_domain(likelihood, phi);
  const double nd = static_cast<double>(n);
  switch (likelihood.family) {
    case LikelihoodFamily::gaussian:
      if (!(obs_variance > 0.0)) throw DomainError(kModule, op, "variance must be positive");
      return nd / obs_variance;
    case LikelihoodFamily::bernoulli:
      return nd / (p * (1.0 - p));
    case LikelihoodFamily::binomial:
      return nd * likelihood.trials / (p * (1.0 - p));
    case LikelihoodFamily::poisson:
      return nd / p;
    case LikelihoodFamily::exponential:
      return nd / (p * p);
    case LikelihoodFamily::custom:
      break;
  }
  throw UnsupportedFamilyError(kModule, op, "no closed form for custom likelihoods");
}

LogDensity log_density_for(const Likelihood& likelihood, double obs_variance) {
  switch (likelihood.family) {
    case LikelihoodFamily::gaussian:
      return [obs_variance](double x, double phi) {
        return -0.5 * (x - phi) * (x - phi) / obs_variance;
      };
    case LikelihoodFamily::bernoulli:
      return [](double x, double phi) { return x * std::log(phi) + (1.0 - x) * std::log1p(-phi); };
    case LikelihoodFamily::binomial: {
      const double m = likelihood.trials;
      return [m](double x, double phi) { return x * std::log(phi) + (m - x) * std::log1p(-phi); };
    }
    case LikelihoodFamily::poisson:
      return [](double x, double phi) { return x * std::log(phi) - phi - std::lgamma(x + 1.0); };
    case LikelihoodFamily::exponential:
      return [](double x, double phi) { return std::log(phi) - phi * x; };
    case LikelihoodFamily::custom:
      break;
  }
  throw UnsupportedFamilyError(kModule, "log_density_for", "custom likelihood has no built-in density");
}

ObservationSampler sampler_for(const Likelihood& likelihood, double obs_variance) {
  switch (likelihood.family) {
    case LikelihoodFamily::gaussian: {
      const double sd = std::sqrt(obs_variance);
      return [sd](Rng& rng, double phi) { return std::normal_distribution<double>(phi, sd)(rng); };
    }
    case LikelihoodFamily::bernoulli:
      return [](Rng& rng, double phi) { return std::bernoulli_distribution(phi)(rng) ? 1.0 : 0.0; };
    case LikelihoodFamily::binomial: {
      const int m = likelihood.trials;
      return [m](Rng& rng, double phi) {
        return static_cast<double>(std::binomial_distribution<long>(m, phi)(rng));
      };
    }
    case LikelihoodFamily::poisson:
      return [](Rng& rng, double phi) {
        return static_cast<double>(std::poisson_distribution<long>(phi)(rng));
      };
    case LikelihoodFamily::exponential:
      return [](Rng& rng, double phi) { return std::exponential_distribution<double>(phi)(rng); };
    case LikelihoodFamily::custom:
      break;
  }
  throw UnsupportedFamilyError(kModule, "sampler_for", "custom likelihood has no built-in sampler");
}

double numeric_expected_fisher(const LogDensity& log_density, const ObservationSampler& sampler,
                               double phi, long n, long draws, std::uint64_t seed) {
  constexpr std::string_view op = "numeric_expected_fisher";
  if (n < 1 || draws < 1) throw DomainError(kModule, op, "n and draws must be >= 1");
  const double h = std::max(1e-4, 1e-4 * std::abs(phi));
  Rng rng(derive_seed(seed, 0));
  double curvature = 0.0;
  double magnitude = 0.0;
  for (long k = 0; k < draws; ++k) {
    const double x = sampler(rng, phi);
    const double up = log_density(x, phi + h);
    const double mid = log_density(x, phi);
    const double down = log_density(x, phi - h);
    curvature += (up - 2.0 * mid + down) / (h * h);
    magnitude += std::abs(up) + 2.0 * std::abs(mid) + std::abs(down);
  }
  const double mean_curvature = curvature / static_cast<double>(draws);
  // Rounding in the second difference alone can produce |curvature| up to
  // about eps * |log f| / h^2; anything inside that band is not information.
  const double noise = 64.0 * std::numeric_limits<double>::epsilon() *
                       (magnitude / static_cast<double>(draws)) / (h * h);
  const double info = -static_cast<double>(n) * mean_curvature;
  if (!std::isfinite(info) || !(-mean_curvature > noise))
    throw NumericInstabilityError(kModule, op,
                                  "estimated information is not positive (zero curvature?)");
  return info;
}

double target_conditional_variance(long n, double n0, double sigma2, VarianceTarget target) {
  if (n < 0) throw DomainError(kModule, "target_conditional_variance", "n must be >= 0");
  const double nd = static_cast<double>(n);
  if (target == VarianceTarget::paper_literal) return (nd / (n0 + nd)) * sigma2 / n0;
  return sigma2 / (n0 + nd);
}

ConditionalVariances adjust_conditional_variances(std::span<const double> inv_info, double target) {
  constexpr std::string_view op = "adjust_conditional_variances";
  if (inv_info.empty()) throw DomainError(kModule, op, "no variances");
  if (!(target > 0.0) || !std::isfinite(target))
    throw DomainError(kModule, op, "target must be positive");
  ConditionalVariances out;
  out.raw.resize(static_cast<Index>(inv_info.size()));
  double sum = 0.0;
  for (std::size_t i = 0; i < inv_info.size(); ++i) {
    const double v = inv_info[i];
    if (!(v > 0.0) || !std::isfinite(v))
      throw DomainError(kModule, op, "inverse information must be positive at row " + std::to_string(i));
    out.raw(static_cast<Index>(i)) = v;
    sum += v;
  }
  out.target = target;
  out.scale = target / (sum / static_cast<double>(inv_info.size()));
  out.adjusted = out.scale * out.raw;
  return out;
}

ConditionalVariances fisher_conditional_variances(const Likelihood& likelihood,
                                                  std::span<const double> mu_x, long n, double n0,
                                                  double sigma2, const VarianceOptions& options) {
  const double target = target_conditional_variance(n, n0, sigma2, options.target);
  const auto m = static_cast<Index>(mu_x.size());
  if (n == 0) {
    ConditionalVariances out;
    out.raw = Eigen::VectorXd::Constant(m, target);
    out.adjusted = out.raw;
    out.target = target;
    return out;
  }
  Eigen::VectorXd inv(m);
  for (Index i = 0; i < m; ++i)
    inv(i) = 1.0 / expected_fisher(likelihood, mu_x[static_cast<std::size_t>(i)], n, sigma2);
  if (!options.adjust) {
    ConditionalVariances out;
    out.raw = inv;
    out.adjusted = std::move(inv);
    out.target = target;
    return out;
  }
  return adjust_conditional_variances(std::span<const double>(inv.data(), inv.size()), target);
}

}  // namespace evsi
