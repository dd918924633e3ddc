#include "evsi/oracles.hpp"

#include "evsi/error.hpp"
#include "evsi/stats.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <thread>
#include <vector>

namespace evsi {
namespace {

constexpr std::string_view kModule = "oracles";

[[noreturn]] void mismatch(std::string_view op, LikelihoodFamily family) {
  throw UnsupportedFamilyError(kModule, op,
                               "no conjugate update for " + to_string(family) + " with this prior");
}

}  // namespace

ConjugatePrior conjugate_update(const Likelihood& likelihood, const ConjugatePrior& prior,
                                const DataSummary& data) {
  constexpr std::string_view op = "conjugate_posterior_moments";
  if (data.n < 0) throw DomainError(kModule, op, "n must be >= 0");
  const double n = static_cast<double>(data.n);
  const double s = data.statistic;
  switch (likelihood.family) {
    case LikelihoodFamily::gaussian: {
      const auto* g = std::get_if<GaussianPrior>(&prior);
      if (!g) mismatch(op, likelihood.family);
      const double n0 = g->obs_variance / g->variance;
      const double v = n / (n0 + n);
      return GaussianPrior{(1.0 - v) * g->mean + v * s, g->obs_variance / (n0 + n),
                           g->obs_variance};
    }
    case LikelihoodFamily::bernoulli:
    case LikelihoodFamily::binomial: {
      const auto* b = std::get_if<BetaPrior>(&prior);
      if (!b) mismatch(op, likelihood.family);
      const double trials =
          n * (likelihood.family == LikelihoodFamily::binomial ? likelihood.trials : 1);
      if (s < 0.0 || s > trials) throw DomainError(kModule, op, "success count out of range");
      return BetaPrior{b->alpha + s, b->beta + trials - s};
    }
    case LikelihoodFamily::poisson: {
      const auto* g = std::get_if<GammaPrior>(&prior);
      if (!g) mismatch(op, likelihood.family);
      if (s < 0.0) throw DomainError(kModule, op, "count sum must be >= 0");
      return GammaPrior{g->shape + s, g->rate + n};
    }
    case LikelihoodFamily::exponential: {
      const auto* g = std::get_if<GammaPrior>(&prior);
      if (!g) mismatch(op, likelihood.family);
      if (s < 0.0) throw DomainError(kModule, op, "observation sum must be >= 0");
      return GammaPrior{g->shape + n, g->rate + s};
    }
    case LikelihoodFamily::custom:
      break;
  }
  mismatch(op, likelihood.family);
}

PosteriorMoments moments_of(const ConjugatePrior& distribution, LikelihoodFamily family) {
  if (const auto* g = std::get_if<GaussianPrior>(&distribution))
    return {g->mean, g->variance, family};
  if (const auto* b = std::get_if<BetaPrior>(&distribution)) {
    const double t = b->alpha + b->beta;
    return {b->alpha / t, b->alpha * b->beta / (t * t * (t + 1.0)), family};
  }
  const auto& g = std::get<GammaPrior>(distribution);
  return {g.shape / g.rate, g.shape / (g.rate * g.rate), family};
}

PosteriorMoments conjugate_posterior_moments(const Likelihood& likelihood,
                                             const ConjugatePrior& prior, const DataSummary& data) {
  return moments_of(conjugate_update(likelihood, prior, data), likelihood.family);
}

double sample_from(const ConjugatePrior& distribution, Rng& rng) {
  if (const auto* g = std::get_if<GaussianPrior>(&distribution))
    return sample_normal(rng, g->mean, std::sqrt(g->variance));
  if (const auto* b = std::get_if<BetaPrior>(&distribution))
    return sample_beta(rng, b->alpha, b->beta);
  const auto& g = std::get<GammaPrior>(distribution);
  return sample_gamma(rng, g.shape, g.rate);
}

double simulate_statistic(const Likelihood& likelihood, double phi, long n, double obs_variance,
                          Rng& rng) {
  if (n == 0) return 0.0;
  const double nd = static_cast<double>(n);
  switch (likelihood.family) {
    case LikelihoodFamily::gaussian:
      return sample_normal(rng, phi, std::sqrt(obs_variance / nd));
    case LikelihoodFamily::bernoulli:
      return static_cast<double>(std::binomial_distribution<long>(n, phi)(rng));
    case LikelihoodFamily::binomial:
      return static_cast<double>(
          std::binomial_distribution<long>(n * likelihood.trials, phi)(rng));
    case LikelihoodFamily::poisson:
      return static_cast<double>(std::poisson_distribution<long>(nd * phi)(rng));
    case LikelihoodFamily::exponential:
      return sample_gamma(rng, nd, phi);
    case LikelihoodFamily::custom:
      break;
  }
  throw UnsupportedFamilyError(kModule, "simulate_statistic", "cannot simulate a custom likelihood");
}

double analytic_conditional_inb(int scenario, std::span<const PosteriorMoments> moments) {
  constexpr std::string_view op = "analytic_conditional_inb";
  const std::size_t need = scenario == 4 ? 2 : 1;
  if (scenario < 1 || scenario > 4) throw DomainError(kModule, op, "scenario must be 1..4");
  if (moments.size() != need) throw ShapeError(kModule, op, "wrong number of focal moments");
  const auto second = [](const PosteriorMoments& p) { return p.mean * p.mean + p.variance; };
  const auto fourth = [](const PosteriorMoments& p) {
    const double m2 = p.mean * p.mean;
    return m2 * m2 + 6.0 * m2 * p.variance + 3.0 * p.variance * p.variance;
  };
  switch (scenario) {
    case 1: return -100.0 + 5000.0 * moments[0].mean;
    case 2: return -1000.0 + 5000.0 * second(moments[0]);
    case 3: return -500.0 + 5000.0 * fourth(moments[0]);
    default: return -1500.0 + 5000.0 * second(moments[0]) + 5000.0 * fourth(moments[1]);
  }
}

double closed_form_linear_gaussian_evsi(double a, double b, double mu0, double sigma2, double n0,
                                        double n) {
  if (b == 0.0 || n <= 0.0) return 0.0;
  const double v = std::isinf(n) ? 1.0 : n / (n0 + n);
  const double m = a + b * mu0;
  const double s = std::abs(b) * std::sqrt(v * sigma2 / n0);
  if (!(s > 0.0)) return 0.0;
  return s * normal_pdf(m / s) + m * normal_cdf(m / s) - std::max(m, 0.0);
}

EvsiEstimate analytic_evsi(const PaDataset& pa, int scenario, const DataCollectionSpec& spec,
                           long n, std::uint64_t seed) {
  constexpr std::string_view op = "analytic_evsi";
  if (spec.likelihood.family != LikelihoodFamily::gaussian)
    throw UnsupportedFamilyError(kModule, op, "analytic method needs Gaussian conjugacy");
  spec.validate(pa.params());
  const std::size_t j_count = spec.focal_count();
  std::vector<ConjugatePrior> priors;
  for (std::size_t k = 0; k < j_count; ++k)
    priors.push_back(conjugate_prior_from_spec(spec.likelihood, spec.mu0[k], spec.sigma2[k],
                                               spec.n0[k]));

  std::vector<double> cond(static_cast<std::size_t>(pa.rows()));
  std::vector<PosteriorMoments> moments(j_count);
  if (n == 0) {
    for (std::size_t k = 0; k < j_count; ++k)
      moments[k] = moments_of(priors[k], LikelihoodFamily::gaussian);
    std::fill(cond.begin(), cond.end(), analytic_conditional_inb(scenario, moments));
    return evsi_from_conditional_inb(cond);
  }
  const Eigen::MatrixXd means = simulate_summary_means(pa, spec, n, seed);
  for (Index i = 0; i < pa.rows(); ++i) {
    for (std::size_t k = 0; k < j_count; ++k)
      moments[k] = conjugate_posterior_moments(spec.likelihood, priors[k],
                                               {n, means(i, static_cast<Index>(k))});
    cond[static_cast<std::size_t>(i)] = analytic_conditional_inb(scenario, moments);
  }
  return evsi_from_conditional_inb(cond);
}

EvsiEstimate nested_mc_evsi(const NestedMcProblem& problem, const DataCollectionSpec& spec, long n,
                            long outer, long inner, std::uint64_t seed, unsigned threads) {
  constexpr std::string_view op = "nested_mc_evsi";
  if (outer < 2 || inner < 1) throw DomainError(kModule, op, "need outer >= 2 and inner >= 1");
  if (n < 0) throw DomainError(kModule, op, "n must be >= 0");
  if (!problem.sample_prior || !problem.benefits || problem.decisions < 2)
    throw ValidationError(kModule, op, "problem needs a prior sampler, a benefit function and >= 2 decisions");
  if (spec.likelihood.family == LikelihoodFamily::custom)
    throw UnsupportedFamilyError(kModule, op, "nested MC needs a conjugate likelihood");
  spec.validate(problem.params);

  const std::size_t j_count = spec.focal_count();
  std::vector<ConjugatePrior> priors;
  for (std::size_t k = 0; k < j_count; ++k)
    priors.push_back(conjugate_prior_from_spec(spec.likelihood, spec.mu0[k], spec.sigma2[k],
                                               spec.n0[k]));

  Eigen::MatrixXd conditional(outer, problem.decisions);
  auto work = [&](long begin, long end) {
    Eigen::VectorXd theta(problem.params), draw(problem.params);
    Eigen::VectorXd nb(problem.decisions), acc(problem.decisions);
    std::vector<ConjugatePrior> posterior(j_count);
    for (long o = begin; o < end; ++o) {
      Rng rng = make_rng(seed, static_cast<std::uint64_t>(o));
      problem.sample_prior(rng, theta);
      for (std::size_t k = 0; k < j_count; ++k) {
        const double phi = theta(spec.focal_indices[k]);
        const double stat = simulate_statistic(spec.likelihood, clamp_to_domain(spec.likelihood, phi),
                                               n, spec.sigma2[k], rng);
        posterior[k] = conjugate_update(spec.likelihood, priors[k], {n, stat});
      }
      acc.setZero();
      for (long r = 0; r < inner; ++r) {
        problem.sample_prior(rng, draw);
        for (std::size_t k = 0; k < j_count; ++k)
          draw(spec.focal_indices[k]) = sample_from(posterior[k], rng);
        problem.benefits(draw, nb);
        acc += nb;
      }
      conditional.row(o) = (acc / static_cast<double>(inner)).transpose();
    }
  };

  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<long>(workers, outer));
  if (workers <= 1) {
    work(0, outer);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> failures(workers);
    const long chunk = (outer + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const long begin = static_cast<long>(w) * chunk;
      const long end = std::min(outer, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back([&, w, begin, end] {
        try {
          work(begin, end);
        } catch (...) {
          failures[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& f : failures)
      if (f) std::rethrow_exception(f);
  }
  return evsi_from_conditional(conditional);
}

}  // namespace evsi
