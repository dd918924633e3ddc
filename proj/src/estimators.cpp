#include "evsi/estimators.hpp"

#include "evsi/error.hpp"
#include "evsi/gaussian_update.hpp"
#include "evsi/random.hpp"
#include "evsi/stats.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace evsi {
namespace {

constexpr std::string_view kModule = "evsi-core";

std::span<const double> col_span(const Eigen::MatrixXd& m, Index j) {
  return {m.col(j).data(), static_cast<std::size_t>(m.rows())};
}

Eigen::MatrixXd fitted_values(std::span<const SplineModel> models, const Eigen::MatrixXd& x) {
  const auto d_count = static_cast<Index>(models.size());
  Eigen::MatrixXd out(x.rows(), d_count);
  Eigen::VectorXd point(x.cols()), values(d_count);
  Eigen::MatrixXd second(x.cols(), d_count);
  for (Index i = 0; i < x.rows(); ++i) {
    point = x.row(i).transpose();
    eval_models(models, std::span<const double>(point.data(), point.size()), values, second);
    out.row(i) = values.transpose();
  }
  return out;
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::tga: return "tga";
    case Method::ga: return "ga";
    case Method::npreg: return "npreg";
    case Method::nested_mc: return "nested-mc";
    case Method::analytic: return "analytic";
    case Method::evppi: return "evppi";
  }
  return "tga";
}

Method method_from_string(const std::string& name) {
  for (auto m : {Method::tga, Method::ga, Method::npreg, Method::nested_mc, Method::analytic,
                 Method::evppi})
    if (to_string(m) == name) return m;
  throw SchemaError(kModule, "method", "unknown method '" + name + "'");
}

ConditionalBenefitSamples conditional_nb_ga(std::span<const SplineModel> models,
                                            const Eigen::MatrixXd& mu_x) {
  if (models.empty()) throw ShapeError(kModule, "conditional_nb_ga", "no models");
  for (const auto& m : models)
    if (m.predictors() != mu_x.cols())
      throw ShapeError(kModule, "conditional_nb_ga", "models and mu_x disagree on focal count");
  return {fitted_values(models, mu_x), "ga"};
}

ConditionalBenefitSamples conditional_nb_tga(std::span<const SplineModel> models,
                                             const Eigen::MatrixXd& mu_x,
                                             std::span<const ConditionalVariances> variances) {
  constexpr std::string_view op = "conditional_nb_tga";
  if (models.empty()) throw ShapeError(kModule, op, "no models");
  const Index j_count = mu_x.cols();
  for (const auto& m : models)
    if (m.predictors() != j_count)
      throw ShapeError(kModule, op, "models and mu_x disagree on focal count");
  if (static_cast<Index>(variances.size()) != j_count)
    throw ShapeError(kModule, op, "need one variance vector per focal parameter");
  for (const auto& v : variances)
    if (v.adjusted.size() != mu_x.rows())
      throw ShapeError(kModule, op, "variance vector not row-aligned with mu_x");

  const auto d_count = static_cast<Index>(models.size());
  ConditionalBenefitSamples out{Eigen::MatrixXd(mu_x.rows(), d_count), "tga"};
  Eigen::VectorXd point(j_count), values(d_count), var(j_count);
  Eigen::MatrixXd second(j_count, d_count);
  for (Index i = 0; i < mu_x.rows(); ++i) {
    point = mu_x.row(i).transpose();
    eval_models(models, std::span<const double>(point.data(), point.size()), values, second);
    for (Index j = 0; j < j_count; ++j) var(j) = variances[static_cast<std::size_t>(j)].adjusted(i);
    out.values.row(i) = (values + 0.5 * second.transpose() * var).transpose();
  }
  return out;
}

EvsiEstimate evsi_from_conditional(const Eigen::MatrixXd& values) {
  if (values.rows() < 2 || values.cols() < 2)
    throw ShapeError(kModule, "evsi_from_conditional", "need at least 2 rows and 2 decisions");
  const Eigen::RowVectorXd means = values.colwise().mean();
  Index best = 0;
  for (Index d = 1; d < means.size(); ++d)
    if (means(d) > means(best)) best = d;

  const Index m = values.rows();
  std::vector<double> row_max(static_cast<std::size_t>(m));
  double regret = 0.0;
  for (Index i = 0; i < m; ++i) {
    const double top = values.row(i).maxCoeff();
    row_max[static_cast<std::size_t>(i)] = top;
    regret += top - values(i, best);
  }
  return {regret / static_cast<double>(m), standard_error(row_max)};
}

EvsiEstimate evsi_from_conditional_inb(std::span<const double> cond_inb) {
  if (cond_inb.size() < 2)
    throw ShapeError(kModule, "evsi_from_conditional_inb", "need at least 2 rows");
  const bool adopt = mean_of(cond_inb) >= 0.0;
  std::vector<double> row_max(cond_inb.size());
  double regret = 0.0;
  for (std::size_t i = 0; i < cond_inb.size(); ++i) {
    const double c = cond_inb[i];
    row_max[i] = std::max(c, 0.0);
    regret += adopt ? std::max(-c, 0.0) : std::max(c, 0.0);
  }
  return {regret / static_cast<double>(cond_inb.size()), standard_error(row_max)};
}

void validate_grid(std::span<const long> grid) {
  if (grid.empty()) throw ValidationError(kModule, "grid", "grid is empty");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (grid[k] < 0) throw ValidationError(kModule, "grid", "sample sizes must be >= 0");
    if (k > 0 && grid[k] <= grid[k - 1])
      throw ValidationError(kModule, "grid", "sample sizes must be strictly increasing");
  }
}

GaussianApproximation::GaussianApproximation(const PaDataset& pa, DataCollectionSpec spec,
                                             TgaOptions options)
    : spec_(std::move(spec)), options_(options) {
  spec_.validate(pa.params());
  focal_ = focal_columns(pa, spec_.focal_indices);
  models_ = fit_additive_splines(focal_, pa.nb(), options_.basis);
}

Eigen::MatrixXd GaussianApproximation::preposterior(long n) const {
  Eigen::MatrixXd out(focal_.rows(), focal_.cols());
  for (Index j = 0; j < focal_.cols(); ++j) {
    const auto k = static_cast<std::size_t>(j);
    out.col(j) = rescale_prior_samples(col_span(focal_, j), spec_.mu0[k],
                                       variance_fraction(n, spec_.n0[k]));
  }
  return out;
}

std::vector<ConditionalVariances> GaussianApproximation::variances(const Eigen::MatrixXd& mu_x,
                                                                   long n) const {
  std::vector<ConditionalVariances> out;
  out.reserve(static_cast<std::size_t>(mu_x.cols()));
  for (Index j = 0; j < mu_x.cols(); ++j) {
    const auto k = static_cast<std::size_t>(j);
    out.push_back(fisher_conditional_variances(spec_.likelihood, col_span(mu_x, j), n,
                                               spec_.n0[k], spec_.sigma2[k], options_.variance));
  }
  return out;
}

ConditionalBenefitSamples GaussianApproximation::conditional_ga(long n) const {
  return conditional_nb_ga(models_, preposterior(n));
}

ConditionalBenefitSamples GaussianApproximation::conditional_tga(long n) const {
  const Eigen::MatrixXd mu_x = preposterior(n);
  const auto vars = variances(mu_x, n);
  return conditional_nb_tga(models_, mu_x, vars);
}

EvsiEstimate GaussianApproximation::ga(long n) const {
  return evsi_from_conditional(conditional_ga(n).values);
}

EvsiEstimate GaussianApproximation::tga(long n) const {
  return evsi_from_conditional(conditional_tga(n).values);
}

EvsiCurve GaussianApproximation::curve(Method method, std::span<const long> grid) const {
  if (method != Method::tga && method != Method::ga)
    throw ValidationError(kModule, "curve", "GaussianApproximation only computes tga and ga");
  validate_grid(grid);
  EvsiCurve out{to_string(method), {}, spec_.digest()};
  out.points.reserve(grid.size());
  for (long n : grid) {
    const auto est = method == Method::tga ? tga(n) : ga(n);
    out.points.push_back({n, est.evsi, est.mc_se});
  }
  return out;
}

EvsiCurve evsi_curve_tga(const PaDataset& pa, const DataCollectionSpec& spec,
                         std::span<const long> grid, const TgaOptions& options) {
  validate_grid(grid);
  return GaussianApproximation(pa, spec, options).curve(Method::tga, grid);
}

EvsiCurve evsi_curve_ga(const PaDataset& pa, const DataCollectionSpec& spec,
                        std::span<const long> grid, const TgaOptions& options) {
  validate_grid(grid);
  return GaussianApproximation(pa, spec, options).curve(Method::ga, grid);
}

Eigen::MatrixXd simulate_summary_means(const PaDataset& pa, const DataCollectionSpec& spec, long n,
                                       std::uint64_t seed) {
  constexpr std::string_view op = "evsi_nonparametric";
  spec.validate(pa.params());
  if (n < 1) throw DomainError(kModule, op, "summary means need n >= 1");
  const auto family = spec.likelihood.family;
  if (family == LikelihoodFamily::custom)
    throw UnsupportedFamilyError(kModule, op, "cannot simulate data for a custom likelihood");

  const auto j_count = static_cast<Index>(spec.focal_count());
  const double nd = static_cast<double>(n);
  Eigen::MatrixXd out(pa.rows(), j_count);
  for (Index i = 0; i < pa.rows(); ++i) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(i));
    for (Index j = 0; j < j_count; ++j) {
      const auto k = static_cast<std::size_t>(j);
      const double phi = clamp_to_domain(spec.likelihood, pa.theta()(i, spec.focal_indices[k]));
      double mean = 0.0;
      switch (family) {
        case LikelihoodFamily::gaussian:
          mean = sample_normal(rng, phi, std::sqrt(spec.sigma2[k] / nd));
          break;
        case LikelihoodFamily::bernoulli:
          mean = static_cast<double>(std::binomial_distribution<long>(n, phi)(rng)) / nd;
          break;
        case LikelihoodFamily::binomial: {
          const long trials = n * spec.likelihood.trials;
          mean = static_cast<double>(std::binomial_distribution<long>(trials, phi)(rng)) /
                 static_cast<double>(trials);
          break;
        }
        case LikelihoodFamily::poisson:
          mean = static_cast<double>(std::poisson_distribution<long>(nd * phi)(rng)) / nd;
          break;
        case LikelihoodFamily::exponential:
          mean = sample_gamma(rng, nd, phi) / nd;
          break;
        case LikelihoodFamily::custom:
          break;
      }
      out(i, j) = mean;
    }
  }
  return out;
}

EvsiEstimate evsi_nonparametric(const PaDataset& pa, const DataCollectionSpec& spec, long n,
                                std::uint64_t seed, const BasisConfig& basis) {
  if (n < 0) throw DomainError(kModule, "evsi_nonparametric", "n must be >= 0");
  if (n == 0) return {0.0, 0.0};
  const Eigen::MatrixXd summary = simulate_summary_means(pa, spec, n, seed);
  const auto models = fit_additive_splines(summary, pa.nb(), basis);
  return evsi_from_conditional(fitted_values(models, summary));
}

EvsiEstimate evppi(const PaDataset& pa, std::span<const Index> focal_indices,
                   const BasisConfig& basis) {
  const Eigen::MatrixXd focal = focal_columns(pa, focal_indices);
  const auto models = fit_additive_splines(focal, pa.nb(), basis);
  return evsi_from_conditional(fitted_values(models, focal));
}

}  // namespace evsi
