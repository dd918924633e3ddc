#include "evsi/gaussian_update.hpp"

#include "evsi/error.hpp"

#include <cmath>

namespace evsi {
namespace {
constexpr std::string_view kModule = "gaussian-update";

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;
}  // namespace

VarianceFraction variance_fraction(long n, double n0) {
  if (!(n0 > 0.0) || !std::isfinite(n0))
    throw DomainError(kModule, "variance_fraction", "n0 must be positive");
  if (n < 0) throw DomainError(kModule, "variance_fraction", "n must be >= 0");
  const double nd = static_cast<double>(n);
  return {nd / (n0 + nd), n, n0};
}

Eigen::VectorXd rescale_prior_samples(std::span<const double> phi, double mu0,
                                      const VarianceFraction& v) {
  const double root = std::sqrt(v.v);
  Eigen::VectorXd out(static_cast<Index>(phi.size()));
  for (std::size_t i = 0; i < phi.size(); ++i)
    out(static_cast<Index>(i)) = root * phi[i] + (1.0 - root) * mu0;
  return out;
}

Eigen::MatrixXd preposterior_means(const PaDataset& pa, const DataCollectionSpec& spec, long n) {
  Eigen::MatrixXd out(pa.rows(), static_cast<Index>(spec.focal_count()));
  for (std::size_t k = 0; k < spec.focal_count(); ++k) {
    const auto v = variance_fraction(n, spec.n0[k]);
    const Eigen::VectorXd col = pa.theta().col(spec.focal_indices[k]);
    out.col(static_cast<Index>(k)) =
        rescale_prior_samples(std::span<const double>(col.data(), col.size()), spec.mu0[k], v);
  }
  return out;
}

PriorEss conjugate_prior_ess(const Likelihood& likelihood, const ConjugatePrior& prior) {
  constexpr std::string_view op = "conjugate_prior_ess";
  const auto unsupported = [&]() -> PriorEss {
    throw UnsupportedFamilyError(kModule, op,
                                 "no conjugate ESS for " + to_string(likelihood.family) +
                                     " with this prior; supply n0 directly");
  };
  return std::visit(
      Overloaded{
          [&](const GaussianPrior& g) -> PriorEss {
            if (likelihood.family != LikelihoodFamily::gaussian) return unsupported();
            if (!(g.variance > 0.0) || !(g.obs_variance > 0.0))
              throw DomainError(kModule, op, "variances must be positive");
            return {g.obs_variance / g.variance, g.mean, g.obs_variance};
          },
          [&](const BetaPrior& b) -> PriorEss {
            if (!(b.alpha > 0.0) || !(b.beta > 0.0))
              throw DomainError(kModule, op, "beta parameters must be positive");
            const double total = b.alpha + b.beta;
            const double mu0 = b.alpha / total;
            if (likelihood.family == LikelihoodFamily::bernoulli)
              return {total, mu0, mu0 * (1.0 - mu0)};
            if (likelihood.family == LikelihoodFamily::binomial) {
              const double m = likelihood.trials;
              return {total / m, mu0, mu0 * (1.0 - mu0) / m};
            }
            return unsupported();
          },
          [&](const GammaPrior& g) -> PriorEss {
            if (!(g.shape > 0.0) || !(g.rate > 0.0))
              throw DomainError(kModule, op, "gamma parameters must be positive");
            const double mu0 = g.shape / g.rate;
            if (likelihood.family == LikelihoodFamily::poisson) return {g.rate, mu0, mu0};
            if (likelihood.family == LikelihoodFamily::exponential)
              return {g.shape, mu0, mu0 * mu0};
            return unsupported();
          },
      },
      prior);
}

ConjugatePrior conjugate_prior_from_spec(const Likelihood& likelihood, double mu0, double sigma2,
                                         double n0) {
  switch (likelihood.family) {
    case LikelihoodFamily::gaussian:
      return GaussianPrior{mu0, sigma2 / n0, sigma2};
    case LikelihoodFamily::bernoulli:
      return BetaPrior{n0 * mu0, n0 * (1.0 - mu0)};
    case LikelihoodFamily::binomial: {
      const double total = n0 * likelihood.trials;
      return BetaPrior{total * mu0, total * (1.0 - mu0)};
    }
    case LikelihoodFamily::poisson:
      return GammaPrior{n0 * mu0, n0};
    case LikelihoodFamily::exponential:
      return GammaPrior{n0, n0 / mu0};
    case LikelihoodFamily::custom:
      break;
  }
  throw UnsupportedFamilyError(kModule, "conjugate_prior_from_spec",
                               "family " + to_string(likelihood.family) + " has no conjugate prior");
}

}  // namespace evsi
