#include "evsi/spline.hpp"

#include "evsi/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace evsi {
namespace {

constexpr std::string_view kModule = "spline-engine";
constexpr int kMaxDegree = 10;

double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double h = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

void BasisConfig::validate() const {
  if (degree < 2 || degree > kMaxDegree)
    throw ValidationError(kModule, "BasisConfig", "degree must lie in [2, 10]");
  if (interior_knots < 0)
    throw ValidationError(kModule, "BasisConfig", "interior_knots must be >= 0");
  if (!(ridge >= 0.0) || !std::isfinite(ridge))
    throw ValidationError(kModule, "BasisConfig", "ridge must be finite and >= 0");
}

BSplineBasis::BSplineBasis(std::vector<double> knots, int degree)
    : knots_(std::move(knots)), degree_(degree) {
  if (degree_ < 0 || degree_ > kMaxDegree)
    throw ValidationError(kModule, "BSplineBasis", "unsupported degree");
  if (static_cast<Index>(knots_.size()) < 2 * (degree_ + 1))
    throw ValidationError(kModule, "BSplineBasis", "knot vector too short");
  if (!std::is_sorted(knots_.begin(), knots_.end()))
    throw ValidationError(kModule, "BSplineBasis", "knots must be nondecreasing");
  if (!(knots_.back() > knots_.front()))
    throw DegeneratePredictorError(kModule, "BSplineBasis", "empty knot range");
}

Index BSplineBasis::find_span(double x) const {
  const Index n = size() - 1;
  if (x >= knots_[static_cast<std::size_t>(n + 1)]) return n;
  if (x <= knots_[static_cast<std::size_t>(degree_)]) return degree_;
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  const auto span = static_cast<Index>(it - knots_.begin()) - 1;
  return std::clamp<Index>(span, degree_, n);
}

// Cox-de Boor with the derivative recurrence (Piegl & Tiller, A2.3).
Index BSplineBasis::local_derivatives(double x, int max_order,
                                      Eigen::Ref<Eigen::MatrixXd> ders) const {
  const int p = degree_;
  x = std::clamp(x, lower(), upper());
  const Index span = find_span(x);
  const auto& u = knots_;
  const auto s = static_cast<std::size_t>(span);

  std::array<std::array<double, kMaxDegree + 1>, kMaxDegree + 1> ndu{};
  std::array<double, kMaxDegree + 1> left{}, right{};
  std::array<std::array<double, kMaxDegree + 1>, 2> a{};

  ndu[0][0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = x - u[s + 1 - static_cast<std::size_t>(j)];
    right[j] = u[s + static_cast<std::size_t>(j)] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu[j][r] = right[r + 1] + left[j - r];
      const double temp = ndu[r][j - 1] / ndu[j][r];
      ndu[r][j] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu[j][j] = saved;
  }

  ders.setZero();
  for (int j = 0; j <= p; ++j) ders(0, j) = ndu[j][p];

  const int n_der = std::min(max_order, p);
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a[0][0] = 1.0;
    for (int k = 1; k <= n_der; ++k) {
      double d = 0.0;
      const int rk = r - k;
      const int pk = p - k;
      if (r >= k) {
        a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
        d = a[s2][0] * ndu[rk][pk];
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
        d += a[s2][j] * ndu[rk + j][pk];
      }
      if (r <= pk) {
        a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
        d += a[s2][k] * ndu[r][pk];
      }
      ders(k, r) = d;
      std::swap(s1, s2);
    }
  }
  double factor = p;
  for (int k = 1; k <= n_der; ++k) {
    ders.row(k) *= factor;
    factor *= (p - k);
  }
  return span - p;
}

Eigen::VectorXd BSplineBasis::evaluate(double x, int order) const {
  Eigen::MatrixXd ders(order + 1, degree_ + 1);
  const Index first = local_derivatives(x, order, ders);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(size());
  out.segment(first, degree_ + 1) = ders.row(order).transpose();
  return out;
}

std::vector<double> build_basis(std::span<const double> x, const BasisConfig& config) {
  constexpr std::string_view op = "build_basis";
  config.validate();
  const auto m = static_cast<Index>(x.size());
  if (m <= config.degree + config.interior_knots + 1)
    throw UnderdeterminedFitError(kModule, op,
                                  "need more than degree + interior_knots + 1 rows, got " +
                                      std::to_string(m));
  for (double v : x)
    if (!std::isfinite(v)) throw DomainError(kModule, op, "non-finite predictor value");
  const auto [min_it, max_it] = std::minmax_element(x.begin(), x.end());
  const double lo = *min_it, hi = *max_it;
  if (!(hi > lo)) throw DegeneratePredictorError(kModule, op, "predictor is constant");

  std::vector<double> interior;
  interior.reserve(static_cast<std::size_t>(config.interior_knots));
  const double steps = static_cast<double>(config.interior_knots + 1);
  if (config.knot_rule == KnotRule::quantile) {
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    for (int k = 1; k <= config.interior_knots; ++k)
      interior.push_back(quantile_sorted(sorted, k / steps));
  } else {
    for (int k = 1; k <= config.interior_knots; ++k)
      interior.push_back(lo + (hi - lo) * (k / steps));
  }
  std::erase_if(interior, [&](double t) { return !(t > lo && t < hi); });
  interior.erase(std::unique(interior.begin(), interior.end()), interior.end());

  std::vector<double> knots(static_cast<std::size_t>(config.degree + 1), lo);
  knots.insert(knots.end(), interior.begin(), interior.end());
  knots.insert(knots.end(), static_cast<std::size_t>(config.degree + 1), hi);
  return knots;
}

AdditiveBasis::AdditiveBasis(std::vector<BSplineBasis> bases) : bases_(std::move(bases)) {
  offsets_.reserve(bases_.size() + 1);
  Index next = 1;
  for (const auto& b : bases_) {
    offsets_.push_back(next);
    next += b.size() - 1;
  }
  offsets_.push_back(next);
}

Eigen::MatrixXd AdditiveBasis::design(const Eigen::MatrixXd& x) const {
  if (x.cols() != predictors())
    throw ShapeError(kModule, "design", "predictor count mismatch");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(x.rows(), coefficient_count());
  out.col(0).setOnes();
  for (Index j = 0; j < predictors(); ++j) {
    const auto& b = basis(j);
    Eigen::MatrixXd ders(1, b.degree() + 1);
    for (Index i = 0; i < x.rows(); ++i) {
      const Index first = b.local_derivatives(x(i, j), 0, ders);
      for (Index r = 0; r <= b.degree(); ++r) {
        const Index fn = first + r;
        if (fn == 0) continue;
        out(i, offset(j) + fn - 1) = ders(0, r);
      }
    }
  }
  return out;
}

SplineModel::SplineModel(std::shared_ptr<const AdditiveBasis> basis, Eigen::VectorXd coefficients)
    : basis_(std::move(basis)), coef_(std::move(coefficients)) {
  if (!basis_ || coef_.size() != basis_->coefficient_count())
    throw ShapeError(kModule, "SplineModel", "coefficient count does not match basis");
}

void SplineModel::component(Index j, double x, double& value, double& second) const {
  const auto& b = basis_->basis(j);
  const int p = b.degree();
  const bool below = x < b.lower();
  const bool above = x > b.upper();
  const double anchor = below ? b.lower() : (above ? b.upper() : x);

  Eigen::Matrix<double, 3, kMaxDegree + 1> storage;
  auto local = storage.leftCols(p + 1);
  const Index first = b.local_derivatives(anchor, 2, local);

  double v = 0.0, d1 = 0.0, d2 = 0.0;
  const Index off = basis_->offset(j);
  for (Index r = 0; r <= p; ++r) {
    const Index fn = first + r;
    if (fn == 0) continue;
    const double c = coef_(off + fn - 1);
    v += c * local(0, r);
    d1 += c * local(1, r);
    d2 += c * local(2, r);
  }
  if (below || above) {
    value = v + d1 * (x - anchor);
    second = 0.0;
  } else {
    value = v;
    second = d2;
  }
}

double SplineModel::eval_mean(std::span<const double> point) const {
  if (static_cast<Index>(point.size()) != predictors())
    throw ShapeError(kModule, "eval_mean", "point dimension mismatch");
  double total = coef_(0);
  for (Index j = 0; j < predictors(); ++j) {
    double v = 0.0, s = 0.0;
    component(j, point[static_cast<std::size_t>(j)], v, s);
    total += v;
  }
  return total;
}

Eigen::VectorXd SplineModel::eval_second_partials(std::span<const double> point) const {
  if (static_cast<Index>(point.size()) != predictors())
    throw ShapeError(kModule, "eval_second_partials", "point dimension mismatch");
  Eigen::VectorXd out(predictors());
  for (Index j = 0; j < predictors(); ++j) {
    double v = 0.0, s = 0.0;
    component(j, point[static_cast<std::size_t>(j)], v, s);
    out(j) = s;
  }
  return out;
}

void eval_models(std::span<const SplineModel> models, std::span<const double> point,
                 Eigen::Ref<Eigen::VectorXd> values, Eigen::Ref<Eigen::MatrixXd> second_partials) {
  constexpr std::string_view op = "eval_models";
  if (models.empty()) throw ShapeError(kModule, op, "no models");
  const auto d_count = static_cast<Index>(models.size());
  const Index p_count = models.front().predictors();
  if (static_cast<Index>(point.size()) != p_count || values.size() != d_count ||
      second_partials.rows() != p_count || second_partials.cols() != d_count)
    throw ShapeError(kModule, op, "dimension mismatch");

  const auto& shared = models.front().basis();
  const bool same_basis = std::all_of(models.begin(), models.end(),
                                      [&](const SplineModel& m) { return m.basis() == shared; });
  if (!same_basis) {
    for (Index d = 0; d < d_count; ++d) {
      const auto& model = models[static_cast<std::size_t>(d)];
      values(d) = model.eval_mean(point);
      second_partials.col(d) = model.eval_second_partials(point);
    }
    return;
  }

  for (Index d = 0; d < d_count; ++d) values(d) = models[static_cast<std::size_t>(d)].intercept();
  Eigen::Matrix<double, 3, kMaxDegree + 1> storage;
  for (Index j = 0; j < p_count; ++j) {
    const auto& b = shared->basis(j);
    const int p = b.degree();
    const double x = point[static_cast<std::size_t>(j)];
    const bool outside = x < b.lower() || x > b.upper();
    const double anchor = std::clamp(x, b.lower(), b.upper());
    auto local = storage.leftCols(p + 1);
    const Index first = b.local_derivatives(anchor, 2, local);
    const Index off = shared->offset(j);
    for (Index d = 0; d < d_count; ++d) {
      const auto& coef = models[static_cast<std::size_t>(d)].coefficients();
      double v = 0.0, d1 = 0.0, d2 = 0.0;
      for (Index r = 0; r <= p; ++r) {
        const Index fn = first + r;
        if (fn == 0) continue;
        const double c = coef(off + fn - 1);
        v += c * local(0, r);
        d1 += c * local(1, r);
        d2 += c * local(2, r);
      }
      if (outside) {
        values(d) += v + d1 * (x - anchor);
        second_partials(j, d) = 0.0;
      } else {
        values(d) += v;
        second_partials(j, d) = d2;
      }
    }
  }
}

std::vector<SplineModel> fit_additive_splines(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                              const BasisConfig& config) {
  constexpr std::string_view op = "fit_additive_spline";
  config.validate();
  if (x.rows() != y.rows()) throw ShapeError(kModule, op, "x and y row counts differ");
  if (x.cols() < 1 || y.cols() < 1) throw ShapeError(kModule, op, "empty predictor or response");
  if (!y.allFinite()) throw DomainError(kModule, op, "non-finite response");

  std::vector<BSplineBasis> bases;
  bases.reserve(static_cast<std::size_t>(x.cols()));
  for (Index j = 0; j < x.cols(); ++j) {
    const Eigen::VectorXd col = x.col(j);
    bases.emplace_back(build_basis(std::span<const double>(col.data(), col.size()), config),
                       config.degree);
  }
  auto basis = std::make_shared<const AdditiveBasis>(std::move(bases));

  const Index m = x.rows();
  const Index k = basis->coefficient_count();
  if (m < k) throw UnderdeterminedFitError(kModule, op, "fewer rows than coefficients");

  // Ridge enters as sqrt(ridge) * I rows below the design (intercept excluded),
  // so one QR solves the penalised problem without forming normal equations.
  const Index extra = config.ridge > 0.0 ? k - 1 : 0;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m + extra, k);
  a.topRows(m) = basis->design(x);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(m + extra, y.cols());
  rhs.topRows(m) = y;
  if (extra > 0) {
    const double root = std::sqrt(config.ridge);
    for (Index c = 1; c < k; ++c) a(m + c - 1, c) = root;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < k)
    throw SingularFitError(kModule, op,
                           "design has rank " + std::to_string(qr.rank()) + " < " +
                               std::to_string(k) + " coefficients");
  const Eigen::MatrixXd coef = qr.solve(rhs);
  if (!coef.allFinite()) throw SingularFitError(kModule, op, "non-finite coefficients");

  std::vector<SplineModel> models;
  models.reserve(static_cast<std::size_t>(y.cols()));
  for (Index c = 0; c < y.cols(); ++c) models.emplace_back(basis, coef.col(c));
  return models;
}

SplineModel fit_additive_spline(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                const BasisConfig& config) {
  return std::move(fit_additive_splines(x, y, config).front());
}

}  // namespace evsi
