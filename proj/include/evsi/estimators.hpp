#pragma once

#include "evsi/fisher.hpp"
#include "evsi/pa_data.hpp"
#include "evsi/spline.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace evsi {

enum class Method { tga, ga, npreg, nested_mc, analytic, evppi };

std::string to_string(Method method);
Method method_from_string(const std::string& name);

/// Row i holds the estimated E[NB_d | X_n^i] for every decision d.
struct ConditionalBenefitSamples {
  Eigen::MatrixXd values;
  std::string method;
};

struct EvsiEstimate {
  double evsi = 0.0;
  double mc_se = 0.0;  // standard error of the per-row max term
};

struct EvsiPoint {
  long n = 0;
  double evsi = 0.0;
  double mc_se = 0.0;
};

struct EvsiCurve {
  std::string method;
  std::vector<EvsiPoint> points;  // n strictly increasing
  std::string spec_digest;
};

/// Conventional GA ("linear meta-model"): the fitted splines evaluated at the
/// preposterior means, no curvature term.
ConditionalBenefitSamples conditional_nb_ga(std::span<const SplineModel> models,
                                            const Eigen::MatrixXd& mu_x);

/// GA plus the second-order Taylor correction
///   g_d(mu) + 1/2 * sum_j var_j * d2 g_d / d phi_j^2 (mu).
/// Cross partials vanish because the spline is additive.
ConditionalBenefitSamples conditional_nb_tga(std::span<const SplineModel> models,
                                             const Eigen::MatrixXd& mu_x,
                                             std::span<const ConditionalVariances> variances);

/// mean_i max_d values(i,d) - max_d mean_i values(i,d). Accumulated as the
/// mean of per-row regrets against the prior-optimal decision, so the result
/// is never negative. Ties go to the lowest decision index.
EvsiEstimate evsi_from_conditional(const Eigen::MatrixXd& values);

/// Two-decision shortcut on conditional incremental net benefit.
EvsiEstimate evsi_from_conditional_inb(std::span<const double> cond_inb);

struct TgaOptions {
  BasisConfig basis;
  VarianceOptions variance;
};

/// Fits g_d once on the focal columns and then evaluates GA or TGA at any
/// study size from the same PA samples.
class GaussianApproximation {
 public:
  GaussianApproximation(const PaDataset& pa, DataCollectionSpec spec, TgaOptions options = {});

  const std::vector<SplineModel>& models() const noexcept { return models_; }
  const DataCollectionSpec& spec() const noexcept { return spec_; }

  Eigen::MatrixXd preposterior(long n) const;
  std::vector<ConditionalVariances> variances(const Eigen::MatrixXd& mu_x, long n) const;

  ConditionalBenefitSamples conditional_ga(long n) const;
  ConditionalBenefitSamples conditional_tga(long n) const;

  EvsiEstimate ga(long n) const;
  EvsiEstimate tga(long n) const;

  EvsiCurve curve(Method method, std::span<const long> grid) const;

 private:
  Eigen::MatrixXd focal_;
  DataCollectionSpec spec_;
  TgaOptions options_;
  std::vector<SplineModel> models_;
};

EvsiCurve evsi_curve_tga(const PaDataset& pa, const DataCollectionSpec& spec,
                         std::span<const long> grid, const TgaOptions& options = {});
EvsiCurve evsi_curve_ga(const PaDataset& pa, const DataCollectionSpec& spec,
                        std::span<const long> grid, const TgaOptions& options = {});

/// Simulated sample-mean summary for every PA row, one column per focal
/// parameter. Row i uses its own derived random stream.
Eigen::MatrixXd simulate_summary_means(const PaDataset& pa, const DataCollectionSpec& spec, long n,
                                       std::uint64_t seed);

/// Nonparametric regression estimator: regress each decision's benefit on the
/// simulated per-focal sample means and plug the fitted values into the
/// EVSI combiner.
EvsiEstimate evsi_nonparametric(const PaDataset& pa, const DataCollectionSpec& spec, long n,
                                std::uint64_t seed, const BasisConfig& basis = {});

EvsiEstimate evppi(const PaDataset& pa, std::span<const Index> focal_indices,
                   const BasisConfig& basis = {});

/// Throws ValidationError unless the grid is nonempty, nonnegative and
/// strictly increasing.
void validate_grid(std::span<const long> grid);

}  // namespace evsi
