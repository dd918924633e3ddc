#include "evsi/error.hpp"
#include "evsi/random.hpp"
#include "evsi/spline.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <vector>

using namespace evsi;

namespace {

// Cox-de Boor recursion, independent of the library's evaluation path.
double cox_de_boor(const std::vector<double>& t, int i, int p, double x) {
  if (p == 0) {
    const bool last = t[static_cast<std::size_t>(i + 1)] == t.back() && x == t.back();
    return (t[i] <= x && x < t[i + 1]) || (last && t[i] < t[i + 1]) ? 1.0 : 0.0;
  }
  double out = 0.0;
  const double d1 = t[i + p] - t[i];
  const double d2 = t[i + p + 1] - t[i + 1];
  if (d1 > 0) out += (x - t[i]) / d1 * cox_de_boor(t, i, p - 1, x);
  if (d2 > 0) out += (t[i + p + 1] - x) / d2 * cox_de_boor(t, i + 1, p - 1, x);
  return out;
}

Eigen::MatrixXd uniform_column(Index m, double lo, double hi, std::uint64_t seed) {
  Rng rng = make_rng(seed, 0);
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd x(m, 1);
  for (Index i = 0; i < m; ++i) x(i, 0) = u(rng);
  return x;
}

double at(const SplineModel& model, double x) { return model.eval_mean(std::span<const double>(&x, 1)); }
double second_at(const SplineModel& model, double x) {
  return model.eval_second_partials(std::span<const double>(&x, 1))(0);
}

}  // namespace

TEST(BuildBasis, UniformQuantileKnots) {
  std::vector<double> x(3001);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i) / 3000.0;
  BasisConfig cfg;
  cfg.interior_knots = 2;
  const auto knots = build_basis(x, cfg);
  ASSERT_EQ(knots.size(), 4u + 2u + 4u);
  EXPECT_NEAR(knots[4], 1.0 / 3.0, 1e-3);
  EXPECT_NEAR(knots[5], 2.0 / 3.0, 1e-3);
  for (int k = 0; k < 4; ++k) {
    EXPECT_DOUBLE_EQ(knots[k], 0.0);
    EXPECT_DOUBLE_EQ(knots[knots.size() - 1 - k], 1.0);
  }
}

TEST(BuildBasis, ConstantPredictorIsDegenerate) {
  std::vector<double> x(100, 2.5);
  EXPECT_THROW(build_basis(x, {}), DegeneratePredictorError);
}

TEST(BuildBasis, ZeroInteriorKnotsGivesCubicBasis) {
  std::vector<double> x{0.0, 0.2, 0.5, 0.7, 0.9, 1.0};
  BasisConfig cfg;
  cfg.interior_knots = 0;
  const BSplineBasis b(build_basis(x, cfg), 3);
  EXPECT_EQ(b.size(), 4);
}

TEST(BuildBasis, TooFewRowsIsUnderdetermined) {
  std::vector<double> x{0.0, 0.5, 1.0};
  EXPECT_THROW(build_basis(x, {}), UnderdeterminedFitError);
}

TEST(BuildBasis, TiedQuantilesCollapse) {
  std::vector<double> x;
  for (int i = 0; i < 200; ++i) x.push_back(i % 2);  // two-point support
  const auto knots = build_basis(x, {});
  EXPECT_EQ(knots.size(), 8u);  // no interior knot strictly inside (0, 1)
}

TEST(BasisConfig, RejectsBadValues) {
  BasisConfig c;
  c.degree = 1;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.interior_knots = -1;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.ridge = -1e-3;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(BSplineBasis, MatchesCoxDeBoorAndPartitionOfUnity) {
  const std::vector<double> t{0, 0, 0, 0, 0.2, 0.45, 0.7, 1, 1, 1, 1};
  const BSplineBasis b(t, 3);
  for (int k = 0; k <= 50; ++k) {
    const double x = k / 50.0;
    const Eigen::VectorXd v = b.evaluate(x, 0);
    EXPECT_NEAR(v.sum(), 1.0, 1e-14);
    for (Index i = 0; i < b.size(); ++i)
      EXPECT_NEAR(v(i), cox_de_boor(t, static_cast<int>(i), 3, x), 1e-13) << "x=" << x << " i=" << i;
  }
}

TEST(BSplineBasis, DerivativesMatchFiniteDifferences) {
  const std::vector<double> t{-1, -1, -1, -1, -0.3, 0.1, 0.6, 1, 1, 1, 1};
  const BSplineBasis b(t, 3);
  const double h = 1e-5;
  for (double x : {-0.8, -0.31, 0.0, 0.35, 0.9}) {
    const Eigen::VectorXd d1 = b.evaluate(x, 1);
    const Eigen::VectorXd d2 = b.evaluate(x, 2);
    const Eigen::VectorXd fd1 = (b.evaluate(x + h, 0) - b.evaluate(x - h, 0)) / (2 * h);
    const Eigen::VectorXd fd2 = (b.evaluate(x + h, 1) - b.evaluate(x - h, 1)) / (2 * h);
    EXPECT_LT((d1 - fd1).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LT((d2 - fd2).cwiseAbs().maxCoeff(), 1e-4);
  }
}

TEST(FitAdditiveSpline, LinearDataReproduced) {
  const Eigen::MatrixXd x = uniform_column(500, 0.0, 1.0, 1);
  const Eigen::VectorXd y = 2.0 * x.col(0);
  const SplineModel model = fit_additive_spline(x, y);
  EXPECT_NEAR(at(model, 0.5), 1.0, 1e-8);
  EXPECT_NEAR(at(model, 0.25), 0.5, 1e-8);
  EXPECT_NEAR(second_at(model, 0.3), 0.0, 1e-6);
}

TEST(FitAdditiveSpline, CubicReproduced) {
  const Eigen::MatrixXd x = uniform_column(800, -1.0, 1.0, 2);
  const Eigen::VectorXd y = x.col(0).array().cube();
  BasisConfig cfg;
  cfg.ridge = 0.0;
  const SplineModel model = fit_additive_spline(x, y, cfg);
  for (Index i = 0; i < x.rows(); ++i) EXPECT_NEAR(at(model, x(i, 0)), y(i), 1e-8);
}

// The ridge bias on the curvature shrinks like ridge / M.
TEST(FitAdditiveSpline, QuadraticSecondDerivative) {
  const Eigen::MatrixXd x = uniform_column(5000, -1.0, 1.0, 3);
  const Eigen::VectorXd y = x.col(0).array().square();
  const SplineModel model = fit_additive_spline(x, y);
  for (double p : {-0.9, -0.5, 0.0, 0.33, 0.8}) EXPECT_NEAR(second_at(model, p), 2.0, 1e-6);
}

TEST(FitAdditiveSpline, ConstantResponse) {
  const Eigen::MatrixXd x = uniform_column(200, 0.0, 1.0, 4);
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(200, 7.5);
  const SplineModel model = fit_additive_spline(x, y);
  for (double p : {-3.0, 0.1, 0.5, 0.99, 4.0}) EXPECT_NEAR(at(model, p), 7.5, 1e-9);
}

TEST(FitAdditiveSpline, LinearExtensionOutsideRange) {
  const Eigen::MatrixXd x = uniform_column(1000, 0.0, 1.0, 5);
  const Eigen::VectorXd y = x.col(0).array().square();
  const SplineModel model = fit_additive_spline(x, y);
  const double hi = model.upper(0);
  const double lo = model.lower(0);
  const double h = 1e-6;
  const double slope_hi = (at(model, hi) - at(model, hi - h)) / h;
  const double slope_lo = (at(model, lo + h) - at(model, lo)) / h;
  EXPECT_NEAR(at(model, hi + 0.5), at(model, hi) + 0.5 * slope_hi, 1e-5);
  EXPECT_NEAR(at(model, lo - 0.25), at(model, lo) - 0.25 * slope_lo, 1e-5);
  EXPECT_EQ(second_at(model, hi + 0.1), 0.0);
  EXPECT_EQ(second_at(model, lo - 0.1), 0.0);
}

TEST(FitAdditiveSpline, AdditiveTwoPredictors) {
  Rng rng = make_rng(6, 0);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::MatrixXd x(2000, 2);
  Eigen::VectorXd y(2000);
  for (Index i = 0; i < 2000; ++i) {
    x(i, 0) = u(rng);
    x(i, 1) = u(rng);
    y(i) = x(i, 0) * x(i, 0) + std::pow(x(i, 1), 3);
  }
  const SplineModel model = fit_additive_spline(x, y);
  EXPECT_EQ(model.basis()->coefficient_count(), 1 + 2 * (14 - 1));
  const std::vector<double> p{0.3, -0.4};
  EXPECT_NEAR(model.eval_mean(p), 0.09 - 0.064, 1e-6);
  const Eigen::VectorXd d2 = model.eval_second_partials(p);
  EXPECT_NEAR(d2(0), 2.0, 1e-5);
  EXPECT_NEAR(d2(1), 6 * -0.4, 1e-5);
}

TEST(FitAdditiveSpline, ErrorContracts) {
  Eigen::MatrixXd x(5, 1);
  x << 0, 0.25, 0.5, 0.75, 1;
  Eigen::VectorXd y = x.col(0);
  EXPECT_THROW(fit_additive_spline(x, y), UnderdeterminedFitError);
  Eigen::MatrixXd c = Eigen::MatrixXd::Constant(100, 1, 1.0);
  EXPECT_THROW(fit_additive_spline(c, Eigen::VectorXd::Zero(100)), DegeneratePredictorError);
  Eigen::MatrixXd x2 = uniform_column(100, 0, 1, 7);
  EXPECT_THROW(fit_additive_spline(x2, Eigen::VectorXd::Zero(99)), ShapeError);
}

TEST(FitAdditiveSplines, SharedBasisMatchesSeparateFits) {
  const Eigen::MatrixXd x = uniform_column(600, -1.0, 2.0, 8);
  Eigen::MatrixXd y(600, 2);
  y.col(0) = x.col(0).array().sin();
  y.col(1) = x.col(0).array().exp();
  const auto joint = fit_additive_splines(x, y);
  ASSERT_EQ(joint.size(), 2u);
  for (Index d = 0; d < 2; ++d) {
    const SplineModel alone = fit_additive_spline(x, y.col(d));
    EXPECT_LT((joint[static_cast<std::size_t>(d)].coefficients() - alone.coefficients()).cwiseAbs().maxCoeff(), 1e-9);
  }
  Eigen::VectorXd values(2);
  Eigen::MatrixXd second(1, 2);
  const double p = 0.7;
  eval_models(joint, std::span<const double>(&p, 1), values, second);
  EXPECT_NEAR(values(0), at(joint[0], p), 1e-12);
  EXPECT_NEAR(second(0, 1), second_at(joint[1], p), 1e-12);
}

// Central differences of eval_mean as the oracle for eval_second_partials.
// Each piece is a cubic, so the stencil is exact up to rounding when it does
// not straddle a knot.
TEST(FitAdditiveSpline, SecondPartialsMatchFiniteDifferencesOfMean) {
  const Eigen::MatrixXd x = uniform_column(2000, -2.0, 2.0, 9);
  const std::vector<std::function<double(double)>> fns{
      [](double t) { return t * t; }, [](double t) { return t * t * t; },
      [](double t) { return std::sin(2 * t) + 0.3 * t; }};
  for (const auto& f : fns) {
    Eigen::VectorXd y(x.rows());
    for (Index i = 0; i < x.rows(); ++i) y(i) = f(x(i, 0));
    const SplineModel model = fit_additive_spline(x, y);
    const double h = 1e-4 * (model.upper(0) - model.lower(0));
    const auto& knots = model.basis()->basis(0).knots();
    int checked = 0;
    for (int k = 1; k <= 60; ++k) {
      const double p = model.lower(0) + (model.upper(0) - model.lower(0)) * (k + 0.37) / 61.5;
      bool near_knot = false;
      for (double t : knots) near_knot = near_knot || std::abs(p - t) < 2 * h;
      if (near_knot) continue;
      const double fd = (at(model, p + h) - 2 * at(model, p) + at(model, p - h)) / (h * h);
      const double an = second_at(model, p);
      EXPECT_LT(std::abs(an - fd) / std::max(std::abs(an), 1e-3), 1e-5) << "p=" << p;
      ++checked;
    }
    EXPECT_GE(checked, 40);
  }
}
