#include "evsi/error.hpp"
#include "evsi/gaussian_update.hpp"
#include "evsi/random.hpp"
#include "evsi/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace evsi;

TEST(VarianceFraction, Arithmetic) {
  EXPECT_DOUBLE_EQ(variance_fraction(10, 5.0).v, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(variance_fraction(0, 3.7).v, 0.0);
  EXPECT_NEAR(variance_fraction(100, 10.0).v, 10.0 / 11.0, 1e-15);
  EXPECT_THROW(variance_fraction(10, 0.0), DomainError);
  EXPECT_THROW(variance_fraction(-1, 5.0), DomainError);
}

TEST(RescalePriorSamples, Limits) {
  const std::vector<double> phi{-1.0, 0.5, 2.0, 3.25};
  const auto zero = rescale_prior_samples(phi, 0.7, variance_fraction(0, 5.0));
  for (Index i = 0; i < zero.size(); ++i) EXPECT_DOUBLE_EQ(zero(i), 0.7);
  const auto full = rescale_prior_samples(phi, 0.7, VarianceFraction{1.0, 1, 1.0});
  for (Index i = 0; i < full.size(); ++i) EXPECT_DOUBLE_EQ(full(i), phi[static_cast<std::size_t>(i)]);
  const std::vector<double> one{1.0};
  EXPECT_DOUBLE_EQ(rescale_prior_samples(one, 0.0, VarianceFraction{0.25, 1, 3.0})(0), 0.5);
}

// The rescaled samples must carry variance v * Var(phi), the variance of the
// exact preposterior mean under Gaussian conjugacy.
TEST(RescalePriorSamples, VarianceMatchesPreposterior) {
  const int m = 200000;
  std::vector<double> phi(m);
  Rng rng = make_rng(21, 0);
  for (auto& p : phi) p = sample_normal(rng, 1.0, std::sqrt(0.2));
  const auto vf = variance_fraction(20, 5.0);
  const Eigen::VectorXd mu = rescale_prior_samples(phi, 1.0, vf);
  const std::vector<double> mu_v(mu.data(), mu.data() + mu.size());
  EXPECT_NEAR(mean_of(mu_v), 1.0, 4 * std::sqrt(vf.v * 0.2 / m));
  EXPECT_NEAR(sample_variance(mu_v), vf.v * sample_variance(phi), 1e-12);

  // Direct simulation of posterior means from a N(phi, 1/n) study mean.
  std::vector<double> direct(m);
  for (int i = 0; i < m; ++i) {
    const double xbar = sample_normal(rng, phi[static_cast<std::size_t>(i)], std::sqrt(1.0 / 20));
    direct[static_cast<std::size_t>(i)] = (1 - vf.v) * 1.0 + vf.v * xbar;
  }
  const double target = vf.v * 0.2;
  EXPECT_NEAR(sample_variance(direct), target, 4 * target * std::sqrt(2.0 / m));
}

TEST(PreposteriorMeans, PerFocalParameters) {
  Eigen::MatrixXd theta(3, 3);
  theta << 1, 10, 100, 2, 20, 200, 3, 30, 300;
  Eigen::MatrixXd nb = Eigen::MatrixXd::Zero(3, 2);
  const PaDataset pa(theta, nb, {"a", "b", "c"}, {"x", "y"});
  DataCollectionSpec spec{{2, 0}, {LikelihoodFamily::gaussian, 1}, {200.0, 0.0}, {1.0, 1.0}, {10.0, 30.0}};
  const Eigen::MatrixXd mu = preposterior_means(pa, spec, 30);
  ASSERT_EQ(mu.rows(), 3);
  ASSERT_EQ(mu.cols(), 2);
  const double s0 = std::sqrt(30.0 / 40.0);
  const double s1 = std::sqrt(0.5);
  EXPECT_DOUBLE_EQ(mu(0, 0), s0 * 100 + (1 - s0) * 200);
  EXPECT_DOUBLE_EQ(mu(2, 1), s1 * 3);
}

TEST(ConjugatePriorEss, TableValues) {
  const auto beta = conjugate_prior_ess({LikelihoodFamily::bernoulli, 1}, BetaPrior{2, 8});
  EXPECT_DOUBLE_EQ(beta.n0, 10.0);
  EXPECT_DOUBLE_EQ(beta.mu0, 0.2);
  EXPECT_DOUBLE_EQ(beta.sigma2, 0.16);
  const auto gamma = conjugate_prior_ess({LikelihoodFamily::poisson, 1}, GammaPrior{10, 10});
  EXPECT_DOUBLE_EQ(gamma.n0, 10.0);
  EXPECT_DOUBLE_EQ(gamma.mu0, 1.0);
  const auto gamma_b = conjugate_prior_ess({LikelihoodFamily::poisson, 1}, GammaPrior{20, 10});
  EXPECT_DOUBLE_EQ(gamma_b.n0, 10.0);
  EXPECT_DOUBLE_EQ(gamma_b.mu0, 2.0);
  const auto beta_b = conjugate_prior_ess({LikelihoodFamily::bernoulli, 1}, BetaPrior{3, 7});
  EXPECT_DOUBLE_EQ(beta_b.n0, 10.0);
  const auto normal = conjugate_prior_ess({LikelihoodFamily::gaussian, 1}, GaussianPrior{0, 0.2, 1});
  EXPECT_DOUBLE_EQ(normal.n0, 5.0);
  const auto binom = conjugate_prior_ess({LikelihoodFamily::binomial, 4}, BetaPrior{2, 6});
  EXPECT_DOUBLE_EQ(binom.n0, 2.0);
  EXPECT_DOUBLE_EQ(binom.sigma2, 0.25 * 0.75 / 4);
  const auto expo = conjugate_prior_ess({LikelihoodFamily::exponential, 1}, GammaPrior{8, 4});
  EXPECT_DOUBLE_EQ(expo.n0, 8.0);
  EXPECT_DOUBLE_EQ(expo.sigma2, 4.0);
}

TEST(ConjugatePriorEss, MismatchedPairsRejected) {
  EXPECT_THROW(conjugate_prior_ess({LikelihoodFamily::bernoulli, 1}, GammaPrior{1, 1}),
               UnsupportedFamilyError);
  EXPECT_THROW(conjugate_prior_ess({LikelihoodFamily::poisson, 1}, BetaPrior{1, 1}),
               UnsupportedFamilyError);
  EXPECT_THROW(conjugate_prior_ess({LikelihoodFamily::custom, 1}, GaussianPrior{}),
               UnsupportedFamilyError);
}

// Prior variance equals sigma2 / n0 for the gamma and normal priors, and
// sigma2 / (n0 + 1) for the beta prior.
TEST(ConjugatePriorEss, PriorVarianceFromEss) {
  const auto check = [](const Likelihood& lik, const ConjugatePrior& prior, double variance) {
    const auto ess = conjugate_prior_ess(lik, prior);
    EXPECT_NEAR(ess.sigma2 / ess.n0, variance, 1e-15);
  };
  const auto beta = conjugate_prior_ess({LikelihoodFamily::bernoulli, 1}, BetaPrior{2, 8});
  EXPECT_NEAR(beta.sigma2 / (beta.n0 + 1.0), 2.0 * 8.0 / (100.0 * 11.0), 1e-15);
  check({LikelihoodFamily::poisson, 1}, GammaPrior{10, 10}, 0.1);
  check({LikelihoodFamily::exponential, 1}, GammaPrior{8, 4}, 0.5);
  check({LikelihoodFamily::gaussian, 1}, GaussianPrior{1, 0.3, 2}, 0.3);
}

TEST(ConjugatePriorFromSpec, InvertsEss) {
  const std::vector<std::pair<Likelihood, ConjugatePrior>> cases{
      {{LikelihoodFamily::bernoulli, 1}, BetaPrior{2, 8}},
      {{LikelihoodFamily::binomial, 5}, BetaPrior{3, 4}},
      {{LikelihoodFamily::poisson, 1}, GammaPrior{20, 10}},
      {{LikelihoodFamily::exponential, 1}, GammaPrior{6, 3}},
      {{LikelihoodFamily::gaussian, 1}, GaussianPrior{0.5, 0.2, 1.5}}};
  for (const auto& [lik, prior] : cases) {
    const auto ess = conjugate_prior_ess(lik, prior);
    const auto back = conjugate_prior_from_spec(lik, ess.mu0, ess.sigma2, ess.n0);
    const auto again = conjugate_prior_ess(lik, back);
    EXPECT_NEAR(again.n0, ess.n0, 1e-12);
    EXPECT_NEAR(again.mu0, ess.mu0, 1e-12);
    EXPECT_NEAR(again.sigma2, ess.sigma2, 1e-12);
  }
}
