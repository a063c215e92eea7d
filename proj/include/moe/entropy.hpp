#pragma once

// Entropy S(X X^dagger) along X(t) = sqrt(1 - t^2) X + t Y and its first three
// t-derivatives, in closed divided-difference form and in modular form.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <boost/math/tools/minima.hpp>

#include "moe/linalg.hpp"
#include "moe/phi.hpp"

namespace moe {

inline constexpr double kPerturbationTol = 1e-10;
inline constexpr double kPositiveDefiniteTol = 1e-12;

/// Unit base point X, unit direction Y with Tr X Y^dagger = 0, and an optional
/// scale so that derivatives along scale * Y follow by homogeneity.
struct Perturbation {
  ComplexMatrix x;
  ComplexMatrix y;
  double scale = 1.0;

  static Perturbation make(ComplexMatrix x, ComplexMatrix y, double scale = 1.0, double tol = kPerturbationTol) {
    require_same_shape(x, y, "Perturbation");
    require_finite(x, "Perturbation");
    require_finite(y, "Perturbation");
    const double nx = std::abs(x.squaredNorm() - 1.0);
    const double ny = std::abs(y.squaredNorm() - 1.0);
    if (nx > tol) throw NormalizationError("Perturbation: Tr X X^dagger != 1 (defect " + std::to_string(nx) + ")");
    if (ny > tol) throw NormalizationError("Perturbation: Tr Y Y^dagger != 1 (defect " + std::to_string(ny) + ")");
    const double overlap = std::abs(hs_inner(x, y));
    if (overlap > tol) throw ValidationError("Perturbation: Y is not orthogonal to X", overlap);
    return {std::move(x), std::move(y), scale};
  }

  /// Normalizes y after removing its X component.
  static Perturbation from_direction(const ComplexMatrix& x, const ComplexMatrix& y, double scale = 1.0) {
    ComplexMatrix xn = x / x.norm();
    ComplexMatrix yt = y - hs_inner(xn, y) * xn;
    const double n = yt.norm();
    if (n <= 1e-12 * std::max(1.0, y.norm())) throw DegenerateInputError("Perturbation: direction is parallel to the base point");
    return make(std::move(xn), yt / n, scale);
  }

  ComplexMatrix direction() const { return scale * y; }
};

struct WZDecomposition {
  ComplexMatrix w;
  ComplexMatrix z;
};

/// Y = W + iZ with W = (Y + Y^dagger)/2 and Z = i(Y^dagger - Y)/2.
inline WZDecomposition wz_decompose(const ComplexMatrix& y) {
  require_square(y, "wz_decompose");
  const Complex i(0.0, 1.0);
  return {(y + y.adjoint()) * 0.5, i * (y.adjoint() - y) * 0.5};
}

/// X(t) X(t)^dagger expanded in t, for the norm preserving path along y.
inline ComplexMatrix path_state(const ComplexMatrix& x, const ComplexMatrix& y, double t) {
  require_same_shape(x, y, "path_state");
  const double s2 = t * t * y.squaredNorm();
  if (s2 >= 1.0) throw DomainError("path_state: |t| * |Y| must be below 1");
  const ComplexMatrix xy = y * x.adjoint();
  return (1.0 - s2) * (x * x.adjoint()) + t * std::sqrt(1.0 - s2) * (xy + xy.adjoint()) + t * t * (y * y.adjoint());
}

inline ComplexMatrix path_state(const Perturbation& p, double t) { return path_state(p.x, p.direction(), t); }

inline ComplexMatrix path_point(const ComplexMatrix& x, const ComplexMatrix& y, double t) {
  const double s2 = t * t * y.squaredNorm();
  if (s2 >= 1.0) throw DomainError("path_point: |t| * |Y| must be below 1");
  return std::sqrt(1.0 - s2) * x + t * y;
}

struct PathDerivatives {
  ComplexMatrix first;
  ComplexMatrix second;
  ComplexMatrix third;
};

/// rho', rho'', rho''' at t for unit x, y (Gamma_1 = Y X^dagger + X Y^dagger,
/// Gamma_2 = Y Y^dagger - X X^dagger).
inline PathDerivatives path_derivatives(const ComplexMatrix& x, const ComplexMatrix& y, double t) {
  if (std::abs(t) >= 1.0) throw DomainError("path_derivatives: |t| must be below 1");
  const ComplexMatrix xy = y * x.adjoint();
  const ComplexMatrix g1 = xy + xy.adjoint();
  const ComplexMatrix g2 = y * y.adjoint() - x * x.adjoint();
  const double c = 1.0 - t * t;
  const double sc = std::sqrt(c);
  return {2.0 * t * g2 + (1.0 - 2.0 * t * t) / sc * g1, 2.0 * g2 + t * (2.0 * t * t - 3.0) / (c * sc) * g1,
          -3.0 / (c * c * sc) * g1};
}

/// (log a - log b) / (a - b) with the analytic value 1/a on the diagonal.
inline double dlog_kernel(double a, double b) {
  if (a == b) return 1.0 / a;
  const double d = (a - b) / b;
  if (std::abs(d) < 1e-8) return (1.0 - 0.5 * d + d * d / 3.0) / b;
  if (std::abs(d) < 0.5) return std::log1p(d) / (a - b);
  return (std::log(a) - std::log(b)) / (a - b);
}

inline void require_positive_definite(const HermitianEigen& e, double tol, const char* where) {
  const double top = e.max_value();
  if (e.dimension() == 0 || !(top > 0.0) || e.min_value() <= tol * top) {
    throw DomainError(std::string(where) + ": matrix is singular (min eigenvalue " + std::to_string(e.min_value()) +
                      ", max " + std::to_string(top) + ")");
  }
}

/// int_0^inf (rho + u)^{-1} gamma (rho + u)^{-1} du, i.e. the derivative of
/// log at rho in direction gamma.
inline ComplexMatrix dlog_kernel_apply(const HermitianEigen& rho, const ComplexMatrix& gamma,
                                       double pd_tol = kPositiveDefiniteTol) {
  require_positive_definite(rho, pd_tol, "dlog_kernel_apply");
  if (gamma.rows() != rho.dimension() || gamma.cols() != rho.dimension()) {
    throw DimensionError("dlog_kernel_apply: direction has wrong shape");
  }
  ComplexMatrix g = rho.vectors.adjoint() * gamma * rho.vectors;
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) *= dlog_kernel(rho.values(i), rho.values(j));
  }
  return rho.vectors * g * rho.vectors.adjoint();
}

inline ComplexMatrix dlog_kernel_apply(const ComplexMatrix& rho, const ComplexMatrix& gamma,
                                       double pd_tol = kPositiveDefiniteTol) {
  return dlog_kernel_apply(eigh(rho), gamma, pd_tol);
}

enum class SupportPolicy { strict, support };

/// D_1 along y (any scale): -Tr (Y X^dagger + X Y^dagger) log X X^dagger.
/// `support` evaluates log on the support of a singular X X^dagger. A tall X
/// is handled through its adjoint.
inline double first_derivative(const ComplexMatrix& x, const ComplexMatrix& y,
                               SupportPolicy policy = SupportPolicy::strict) {
  require_same_shape(x, y, "first_derivative");
  if (policy == SupportPolicy::strict && x.rows() > x.cols()) {
    return first_derivative(ComplexMatrix(x.adjoint()), ComplexMatrix(y.adjoint()), policy);
  }
  const HermitianEigen e = eigh(x * x.adjoint());
  if (policy == SupportPolicy::strict) require_positive_definite(e, kPositiveDefiniteTol, "first_derivative");
  const ComplexMatrix l = support_log(e);
  return -2.0 * hs_inner(l * x, y).real();
}

inline double first_derivative(const Perturbation& p, SupportPolicy policy = SupportPolicy::strict) {
  return first_derivative(p.x, p.direction(), policy);
}

/// Euclidean gradient of S(X X^dagger): D_1[X, Y] = Re <G, Y>.
inline ComplexMatrix entropy_gradient(const ComplexMatrix& x) {
  return -2.0 * support_log(x * x.adjoint()) * x;
}

inline double entropy_of(const ComplexMatrix& x) { return von_neumann_entropy(x * x.adjoint()); }

/// Symmetric bilinear form whose diagonal is D_2[X, Y] (integral route,
/// R - Q). X X^dagger must be nonsingular; when only X^dagger X is, the form is
/// evaluated on the adjoint problem, which has the same entropy along every path.
class SecondDerivativeForm {
 public:
  explicit SecondDerivativeForm(const ComplexMatrix& x, double pd_tol = kPositiveDefiniteTol) {
    require_finite(x, "SecondDerivativeForm");
    pd_tol_ = pd_tol;
    HermitianEigen left = eigh(x * x.adjoint());
    const bool left_ok = left.dimension() > 0 && left.max_value() > 0.0 && left.min_value() > pd_tol * left.max_value();
    if (left_ok) {
      adjoint_ = false;
      x_ = x;
      rho_ = std::move(left);
    } else {
      HermitianEigen right = eigh(x.adjoint() * x);
      require_positive_definite(right, pd_tol, "SecondDerivativeForm");
      adjoint_ = true;
      x_ = x.adjoint();
      rho_ = std::move(right);
    }
    log_rho_ = support_log(rho_);
    entropy_ = shannon_entropy(rho_.values);
  }

  bool uses_adjoint() const { return adjoint_; }
  double entropy() const { return entropy_; }
  const HermitianEigen& gram() const { return rho_; }

  double operator()(const ComplexMatrix& ya, const ComplexMatrix& yb) const {
    if (adjoint_) return eval(ya.adjoint(), yb.adjoint());
    return eval(ya, yb);
  }

  double quadratic(const ComplexMatrix& y) const { return (*this)(y, y); }

 private:
  double eval(const ComplexMatrix& ya, const ComplexMatrix& yb) const {
    require_same_shape(x_, ya, "SecondDerivativeForm");
    require_same_shape(x_, yb, "SecondDerivativeForm");
    const ComplexMatrix ta = ya * x_.adjoint();
    const ComplexMatrix tb = yb * x_.adjoint();
    const ComplexMatrix ga = ta + ta.adjoint();
    const ComplexMatrix gb = tb + tb.adjoint();
    const double r = -2.0 * (ya * yb.adjoint() * log_rho_).trace().real() - 2.0 * hs_inner(ya, yb).real() * entropy_;
    const double q = hs_inner(ga, dlog_kernel_apply(rho_, gb, pd_tol_)).real();
    return r - q;
  }

  bool adjoint_ = false;
  ComplexMatrix x_;
  HermitianEigen rho_;
  ComplexMatrix log_rho_;
  double entropy_ = 0.0;
  double pd_tol_ = kPositiveDefiniteTol;
};

inline double second_derivative_integral(const ComplexMatrix& x, const ComplexMatrix& y) {
  return SecondDerivativeForm(x).quadratic(y);
}

inline double second_derivative_integral(const Perturbation& p) { return second_derivative_integral(p.x, p.direction()); }

/// Eigendata of a Hermitian positive definite X.
struct SpectralData {
  RealVector x_eigs;
  ComplexMatrix x_basis;
  RealVector log_x_sq;
  double entropy = 0.0;  // S(X^2)

  static SpectralData from(const ComplexMatrix& x, double pd_tol = kPositiveDefiniteTol) {
    const HermitianEigen e = eigh(x);
    require_positive_definite(e, pd_tol, "SpectralData");
    SpectralData s;
    s.x_eigs = e.values;
    s.x_basis = e.vectors;
    s.log_x_sq = (e.values.array().square()).log().matrix();
    s.entropy = 0.0;
    for (Eigen::Index i = 0; i < e.values.size(); ++i) s.entropy -= e.values(i) * e.values(i) * s.log_x_sq(i);
    return s;
  }

  Eigen::Index dim() const { return x_eigs.size(); }

  ComplexMatrix to_eigenbasis(const ComplexMatrix& a) const {
    if (a.rows() != dim() || a.cols() != dim()) throw DimensionError("SpectralData: operand has wrong shape");
    return x_basis.adjoint() * a * x_basis;
  }
  ComplexMatrix from_eigenbasis(const ComplexMatrix& a) const { return x_basis * a * x_basis.adjoint(); }

  ComplexMatrix x() const { return from_eigenbasis(x_eigs.cast<Complex>().asDiagonal()); }
  ComplexMatrix log_x_squared() const { return from_eigenbasis(log_x_sq.cast<Complex>().asDiagonal()); }

  /// phi(sign * x_i / x_j).
  double phi_ratio(Eigen::Index i, Eigen::Index j, int sign) const {
    if (i == j) return sign > 0 ? 4.0 : 0.0;
    return phi(sign * x_eigs(i) / x_eigs(j));
  }
};

/// phi(+-Delta_X)(A): entry (i, j) in the eigenbasis of X scaled by phi(+-x_i/x_j).
inline ComplexMatrix apply_phi_modular(const SpectralData& s, const ComplexMatrix& a, int sign) {
  ComplexMatrix t = s.to_eigenbasis(a);
  for (Eigen::Index i = 0; i < t.rows(); ++i) {
    for (Eigen::Index j = 0; j < t.cols(); ++j) t(i, j) *= s.phi_ratio(i, j, sign);
  }
  return s.from_eigenbasis(t);
}

namespace detail {

// sum_ij |A_ij|^2 f(i, j) with A in the eigenbasis.
template <class F>
double weighted_square_sum(const ComplexMatrix& a_eig, F&& f) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < a_eig.rows(); ++i) {
    for (Eigen::Index j = 0; j < a_eig.cols(); ++j) total += std::norm(a_eig(i, j)) * f(i, j);
  }
  return total;
}

inline double phi_form(const SpectralData& s, const ComplexMatrix& a_eig, int sign) {
  return weighted_square_sum(a_eig, [&](Eigen::Index i, Eigen::Index j) { return s.phi_ratio(i, j, sign); });
}

inline double log_form(const SpectralData& s, const ComplexMatrix& a_eig) {
  return weighted_square_sum(a_eig, [&](Eigen::Index i, Eigen::Index) { return s.log_x_sq(i); });
}

inline void check_agreement(double a, double b, double tol, const char* what) {
  const double gap = std::abs(a - b);
  if (gap > tol * std::max(1.0, std::max(std::abs(a), std::abs(b)))) {
    throw InconsistencyError(std::string(what) + ": independent evaluations disagree", gap);
  }
}

}  // namespace detail

/// D_2 via the modular form -2S|Y|^2 - 2Tr(W^2+Z^2)log X^2 - Tr W phi(Delta)W - Tr Z phi(-Delta)Z.
inline double second_derivative_modular(const SpectralData& s, const ComplexMatrix& y) {
  const WZDecomposition wz = wz_decompose(y);
  const ComplexMatrix w = s.to_eigenbasis(wz.w);
  const ComplexMatrix z = s.to_eigenbasis(wz.z);
  return -2.0 * s.entropy * y.squaredNorm() - 2.0 * (detail::log_form(s, w) + detail::log_form(s, z)) -
         detail::phi_form(s, w, +1) - detail::phi_form(s, z, -1);
}

/// Tr W phi(Delta)(W) + Tr Z phi(-Delta)(Z), checked against
/// Q[X, Y] - 2i Tr (WZ - ZW) log X^2 evaluated with the log-derivative kernel.
inline double q_tilde(const SpectralData& s, const ComplexMatrix& y, double tol = 1e-9) {
  const WZDecomposition wz = wz_decompose(y);
  const double phi_side =
      detail::phi_form(s, s.to_eigenbasis(wz.w), +1) + detail::phi_form(s, s.to_eigenbasis(wz.z), -1);
  const ComplexMatrix x = s.x();
  const ComplexMatrix l = s.log_x_squared();
  const ComplexMatrix gamma = y * x + x * y.adjoint();
  HermitianEigen rho{s.x_eigs.array().square().matrix(), s.x_basis};
  const double q = hs_inner(gamma, dlog_kernel_apply(rho, gamma)).real();
  const Complex comm = ((wz.w * wz.z - wz.z * wz.w) * l).trace();
  const double q_side = q + (Complex(0.0, -2.0) * comm).real();
  detail::check_agreement(phi_side, q_side, tol, "q_tilde");
  return phi_side;
}

/// Right side of (D_2[X,Y] + D_2[X,iY]) / 2 = -2S|Y|^2 - Tr(YY^dagger + Y^dagger Y) log X^2
/// - 1/2 Tr Y phi(Delta^2)(Y^dagger), checked against the average of both D_2.
inline double d2_mixed_average(const SpectralData& s, const ComplexMatrix& y, double tol = 1e-9) {
  const ComplexMatrix ye = s.to_eigenbasis(y);
  const ComplexMatrix yye = ye * ye.adjoint() + ye.adjoint() * ye;
  double log_term = 0.0;
  for (Eigen::Index i = 0; i < yye.rows(); ++i) log_term += yye(i, i).real() * s.log_x_sq(i);
  const double phi_term = detail::weighted_square_sum(ye, [&](Eigen::Index i, Eigen::Index j) {
    const double r = s.x_eigs(i) / s.x_eigs(j);
    return i == j ? 4.0 : phi(r * r);
  });
  const double rhs = -2.0 * s.entropy * y.squaredNorm() - log_term - 0.5 * phi_term;
  const double avg = 0.5 * (second_derivative_modular(s, y) + second_derivative_modular(s, Complex(0.0, 1.0) * y));
  detail::check_agreement(rhs, avg, tol, "d2_mixed_average");
  return rhs;
}

/// S(rho(t)) with rho(t) required positive definite.
inline double path_entropy_pd(const ComplexMatrix& x, const ComplexMatrix& y, double t,
                              double pd_tol = kPositiveDefiniteTol) {
  const HermitianEigen e = eigh(path_state(x, y, t));
  require_positive_definite(e, pd_tol, "path entropy");
  return shannon_entropy(e.values);
}

/// Five-point central difference of d^3/dt^3 S(rho(t)).
inline double third_derivative_fd(const Perturbation& p, double t = 0.0, double h = 1e-2) {
  const ComplexMatrix y = p.direction();
  auto f = [&](double s) { return path_entropy_pd(p.x, y, s); };
  return (f(t + 2.0 * h) - 2.0 * f(t + h) + 2.0 * f(t - h) - f(t - 2.0 * h)) / (2.0 * h * h * h);
}

inline double trace_norm(const ComplexMatrix& hermitian) {
  return eigh(hermitian).values.cwiseAbs().sum();
}

/// Constants entering the third derivative bound.
struct ThirdDerivativeBound {
  double r = 0.0;
  double tau = 0.0;
  double alpha0 = 0.0;
  double a0 = 0.0, a1 = 0.0, a2 = 0.0;
  double b1 = 0.0, b2 = 0.0, b3 = 0.0;
};

namespace detail {

inline ThirdDerivativeBound assemble_bound(double tau, double alpha0, Eigen::Index d, double g1_norm, double g2_norm) {
  ThirdDerivativeBound out;
  out.tau = tau;
  out.alpha0 = alpha0;
  const double c = 1.0 - tau * tau;
  const double sc = std::sqrt(c);
  const auto dd = static_cast<double>(d);
  out.a0 = dd * std::abs(std::log(alpha0));
  out.a1 = dd / alpha0;
  out.a2 = dd / (alpha0 * alpha0);
  out.b1 = 2.0 * tau * g2_norm + std::max(1.0, (2.0 * tau * tau - 1.0) / sc) * g1_norm;
  out.b2 = 2.0 * g2_norm + 3.0 * tau / (c * sc) * g1_norm;
  out.b3 = 3.0 / (c * c * sc) * g1_norm;
  out.r = out.b3 * out.a0 + 2.0 * out.b1 * out.b2 * out.a1 + out.b1 * out.b2 * out.a1 +
          2.0 * out.b1 * out.b1 * out.b1 * out.a2;
  return out;
}

}  // namespace detail

/// Bound R on |d^3/dt^3 S(rho(t))| over (-tau, tau) for one perturbation.
/// alpha0 is 0.9 times the smallest eigenvalue of rho(t) found on a 64 point
/// grid refined by a local minimization around the worst grid point.
inline ThirdDerivativeBound third_derivative_bound(const Perturbation& p, double tau, int grid = 64,
                                                   double safety = 0.9) {
  if (!(tau > 0.0) || !(tau < 1.0)) throw DomainError("third_derivative_bound: tau must lie in (0, 1)");
  if (p.scale != 1.0) throw DomainError("third_derivative_bound: expects a unit perturbation");
  auto lowest = [&](double t) { return eigh(path_state(p.x, p.y, t)).min_value(); };
  const double floor = kPositiveDefiniteTol;
  double worst = std::numeric_limits<double>::infinity();
  double worst_t = 0.0;
  double first_bad = std::numeric_limits<double>::infinity();
  double last_good = 0.0;
  std::vector<double> ts(static_cast<std::size_t>(grid));
  for (int k = 0; k < grid; ++k) ts[static_cast<std::size_t>(k)] = -tau + 2.0 * tau * k / (grid - 1);
  for (double t : ts) {
    const double v = lowest(t);
    if (v < worst) {
      worst = v;
      worst_t = t;
    }
    if (v <= floor) first_bad = std::min(first_bad, std::abs(t));
  }
  for (double t : ts) {
    if (std::abs(t) < first_bad) last_good = std::max(last_good, std::abs(t));
  }
  if (first_bad < std::numeric_limits<double>::infinity()) {
    throw CertifyRadiusError("third_derivative_bound: rho(t) loses positive definiteness inside the radius",
                             last_good);
  }
  const double step = 2.0 * tau / (grid - 1);
  const double lo = std::max(-tau, worst_t - step);
  const double hi = std::min(tau, worst_t + step);
  const auto refined = boost::math::tools::brent_find_minima(lowest, lo, hi, 40);
  if (refined.second <= floor) {
    const double bad = std::abs(refined.first);
    last_good = 0.0;
    for (double t : ts) {
      if (std::abs(t) < bad) last_good = std::max(last_good, std::abs(t));
    }
    throw CertifyRadiusError("third_derivative_bound: rho(t) loses positive definiteness", last_good);
  }
  worst = std::min(worst, refined.second);
  const ComplexMatrix xy = p.y * p.x.adjoint();
  const double g1 = trace_norm(xy + xy.adjoint());
  const double g2 = trace_norm(p.y * p.y.adjoint() - p.x * p.x.adjoint());
  return detail::assemble_bound(tau, safety * worst, p.x.rows(), g1, g2);
}

/// Largest tau for which (1 - tau^2) lambda - 2 tau sigma stays positive.
inline double uniform_tau_limit(double lambda_min, double sigma_max) {
  if (!(lambda_min > 0.0)) return 0.0;
  return (-sigma_max + std::sqrt(sigma_max * sigma_max + lambda_min * lambda_min)) / lambda_min;
}

/// R valid for every unit direction Y orthogonal to X: trace norms of
/// Gamma_1, Gamma_2 are at most 2 and the smallest eigenvalue of rho(t) is at
/// least (1 - tau^2) lambda_min(X X^dagger) - 2 tau sigma_max(X).
inline ThirdDerivativeBound uniform_third_derivative_bound(double lambda_min, double sigma_max, Eigen::Index d,
                                                           double tau) {
  if (!(tau > 0.0) || !(tau < 1.0)) throw DomainError("uniform_third_derivative_bound: tau must lie in (0, 1)");
  const double alpha0 = (1.0 - tau * tau) * lambda_min - 2.0 * tau * sigma_max;
  if (!(alpha0 > 0.0)) {
    throw CertifyRadiusError("uniform_third_derivative_bound: positivity cannot be guaranteed at this radius",
                             uniform_tau_limit(lambda_min, sigma_max));
  }
  return detail::assemble_bound(tau, alpha0, d, 2.0, 2.0);
}

}  // namespace moe
