#pragma once

#include <Eigen/Dense>

#include <memory>
#include <span>
#include <vector>

namespace evsi {

using Index = Eigen::Index;

enum class KnotRule { quantile, uniform };

struct BasisConfig {
  int degree = 3;
  int interior_knots = 10;
  KnotRule knot_rule = KnotRule::quantile;
  double ridge = 1e-8;  // penalty on all non-intercept coefficients

  void validate() const;
};

/// Clamped B-spline basis on [knots.front(), knots.back()].
class BSplineBasis {
 public:
  BSplineBasis(std::vector<double> knots, int degree);

  int degree() const noexcept { return degree_; }
  Index size() const noexcept { return static_cast<Index>(knots_.size()) - degree_ - 1; }
  double lower() const noexcept { return knots_.front(); }
  double upper() const noexcept { return knots_.back(); }
  const std::vector<double>& knots() const noexcept { return knots_; }

  /// Derivatives of orders 0..max_order of the degree+1 basis functions that
  /// are nonzero at x (x clamped to the knot range). Row k of `ders` holds the
  /// k-th derivatives; column r belongs to basis function (returned index + r).
  Index local_derivatives(double x, int max_order, Eigen::Ref<Eigen::MatrixXd> ders) const;

  /// Dense vector of all basis values (order 0) or derivatives at x.
  Eigen::VectorXd evaluate(double x, int order = 0) const;

 private:
  Index find_span(double x) const;

  std::vector<double> knots_;
  int degree_;
};

/// Knot vector for one predictor: boundary knots at min/max of x repeated
/// degree+1 times, interior knots at equally spaced quantiles (or equally
/// spaced points) strictly inside the range. Tied quantiles collapse to one
/// knot, so heavily discrete predictors get fewer interior knots.
std::vector<double> build_basis(std::span<const double> x, const BasisConfig& config);

/// Per-predictor bases of an additive model. Column layout of the design:
/// intercept, then for each predictor its basis functions 1..size-1 (the first
/// function of every predictor is absorbed by the intercept).
class AdditiveBasis {
 public:
  explicit AdditiveBasis(std::vector<BSplineBasis> bases);

  Index predictors() const noexcept { return static_cast<Index>(bases_.size()); }
  Index coefficient_count() const noexcept { return offsets_.back(); }
  const BSplineBasis& basis(Index j) const { return bases_[static_cast<std::size_t>(j)]; }
  /// First design column belonging to predictor j.
  Index offset(Index j) const { return offsets_[static_cast<std::size_t>(j)]; }

  Eigen::MatrixXd design(const Eigen::MatrixXd& x) const;

 private:
  std::vector<BSplineBasis> bases_;
  std::vector<Index> offsets_;  // size predictors()+1
};

/// Fitted additive B-spline regression. Immutable; evaluation is thread safe.
class SplineModel {
 public:
  SplineModel(std::shared_ptr<const AdditiveBasis> basis, Eigen::VectorXd coefficients);

  Index predictors() const noexcept { return basis_->predictors(); }
  const Eigen::VectorXd& coefficients() const noexcept { return coef_; }
  const std::shared_ptr<const AdditiveBasis>& basis() const noexcept { return basis_; }
  double lower(Index j) const { return basis_->basis(j).lower(); }
  double upper(Index j) const { return basis_->basis(j).upper(); }

  /// Fitted mean; linear extension (boundary value + boundary slope times
  /// overshoot) outside the training range of a predictor.
  double eval_mean(std::span<const double> point) const;
  /// Diagonal second partials; zero outside the training range.
  Eigen::VectorXd eval_second_partials(std::span<const double> point) const;

  /// Value and second derivative of predictor j's additive component.
  void component(Index j, double x, double& value, double& second) const;

  double intercept() const noexcept { return coef_(0); }

 private:
  std::shared_ptr<const AdditiveBasis> basis_;
  Eigen::VectorXd coef_;
};

/// Evaluates several models at one point: values(d) = model d's mean and
/// second_partials(j, d) = its j-th diagonal second partial. Models fitted
/// together share a basis, which is then evaluated once.
void eval_models(std::span<const SplineModel> models, std::span<const double> point,
                 Eigen::Ref<Eigen::VectorXd> values, Eigen::Ref<Eigen::MatrixXd> second_partials);

/// Least squares with ridge penalty on the non-intercept coefficients.
/// Throws DegeneratePredictorError, UnderdeterminedFitError, SingularFitError.
SplineModel fit_additive_spline(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                const BasisConfig& config = {});

/// One fit per column of y, sharing a single basis and factorisation.
std::vector<SplineModel> fit_additive_splines(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                              const BasisConfig& config = {});

}  // namespace evsi
