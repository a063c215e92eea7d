#pragma once

// Reduction of a possibly singular rectangular point X to the square positive
// definite problem on its support, and the block asymptotics of the
// second derivative near singular points.

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "moe/channel.hpp"
#include "moe/entropy.hpp"

namespace moe {

/// Support projections of X together with the singular frames that realize
/// them: X = U_r diag(sigma) V_r^dagger.
struct SupportProjectors {
  ComplexMatrix p_b;
  ComplexMatrix p_e;
  Eigen::Index rank = 0;
  ComplexMatrix u_r, u_perp;  // d_B x r, d_B x (d_B - r)
  ComplexMatrix v_r, v_perp;  // d_E x r, d_E x (d_E - r)
  RealVector sigma;           // r leading singular values
};

inline SupportProjectors support_projectors(const ComplexMatrix& x, double rank_tol = kDefaultRankTol) {
  if (x.size() == 0 || x.norm() == 0.0) throw DegenerateInputError("support_projectors: X is zero");
  const SvdFactors svd = full_svd(x, rank_tol);
  const Eigen::Index r = svd.rank;
  SupportProjectors sp;
  sp.rank = r;
  sp.u_r = svd.u.leftCols(r);
  sp.u_perp = svd.u.rightCols(x.rows() - r);
  sp.v_r = svd.v.leftCols(r);
  sp.v_perp = svd.v.rightCols(x.cols() - r);
  sp.sigma = svd.sigma.head(r);
  sp.p_b = sp.u_r * sp.u_r.adjoint();
  sp.p_e = sp.v_r * sp.v_r.adjoint();
  return sp;
}

/// Blocks of Y in the singular frames of X: y11 = U_r^dagger Y V_r and so on.
struct BlockSplit {
  ComplexMatrix y11, y12, y21, y22;
};

inline BlockSplit block_split(const ComplexMatrix& y, const SupportProjectors& sp) {
  if (y.rows() != sp.p_b.rows() || y.cols() != sp.p_e.rows()) throw DimensionError("block_split: shape mismatch");
  return {sp.u_r.adjoint() * y * sp.v_r, sp.u_r.adjoint() * y * sp.v_perp, sp.u_perp.adjoint() * y * sp.v_r,
          sp.u_perp.adjoint() * y * sp.v_perp};
}

inline ComplexMatrix reassemble(const BlockSplit& bs, const SupportProjectors& sp) {
  return sp.u_r * bs.y11 * sp.v_r.adjoint() + sp.u_r * bs.y12 * sp.v_perp.adjoint() +
         sp.u_perp * bs.y21 * sp.v_r.adjoint() + sp.u_perp * bs.y22 * sp.v_perp.adjoint();
}

/// Square positive definite problem equivalent to minimizing S on K near X.
/// Coordinates on the support: frame_b is I when X X^dagger is nonsingular and
/// U_r otherwise. map(Y) = frame_b^dagger Y V^dagger frame_b.
struct ReducedProblem {
  ComplexMatrix x_pd;
  MatrixSubspace k_b;
  ComplexMatrix v;        // polar partial isometry, V V^dagger = P_B, V^dagger V = P_E
  ComplexMatrix frame_b;  // d_B x r, orthonormal columns spanning ran P_B
  SupportProjectors support;

  Eigen::Index rank() const { return support.rank; }

  ComplexMatrix map(const ComplexMatrix& y) const { return frame_b.adjoint() * y * v.adjoint() * frame_b; }
  ComplexMatrix lift(const ComplexMatrix& yr) const { return frame_b * yr * frame_b.adjoint() * v; }
};

inline ReducedProblem reduce_to_positive_definite(const ComplexMatrix& x, const MatrixSubspace& k,
                                                  double rank_tol = kDefaultRankTol, double member_tol = 1e-8) {
  if (x.rows() != k.rows() || x.cols() != k.cols()) throw DimensionError("reduce_to_positive_definite: shape mismatch");
  const double norm_defect = std::abs(x.squaredNorm() - 1.0);
  if (norm_defect > 1e-8) throw NormalizationError("reduce_to_positive_definite: Tr X X^dagger != 1");
  const double residual = k.residual(x);
  if (residual > member_tol) throw MembershipError("reduce_to_positive_definite: X is not in the subspace", residual);

  ReducedProblem rp;
  rp.support = support_projectors(x, rank_tol);
  const Eigen::Index r = rp.support.rank;
  rp.v = rp.support.u_r * rp.support.v_r.adjoint();
  rp.frame_b = r == x.rows() ? ComplexMatrix::Identity(x.rows(), x.rows()) : rp.support.u_r;
  const ComplexMatrix sqrt_part =
      rp.support.u_r * rp.support.sigma.cast<Complex>().asDiagonal() * rp.support.u_r.adjoint();
  rp.x_pd = rp.frame_b.adjoint() * sqrt_part * rp.frame_b;
  std::vector<ComplexMatrix> mapped;
  mapped.reserve(k.basis().size());
  for (const auto& b : k.basis()) mapped.push_back(rp.map(b));
  rp.k_b = MatrixSubspace::spanned_by(r, r, mapped);
  return rp;
}

/// Second derivative pieces for Y split into blocks around x11 > 0.
struct BlockD2Contributions {
  double d2_core = 0.0;             // D_2 formula on the y11 block (homogeneous in y11)
  double y12_term = 0.0;            // -2 Tr y12 y12^dagger log x11^2
  double y21_term = 0.0;            // -2 Tr y21^dagger y21 log x11^dagger x11
  double normalization_term = 0.0;  // -2 S(x11 x11^dagger)(|y12|^2 + |y21|^2)
  bool y22_divergent = false;

  /// Finite total; empty when the y22 block makes D_2 diverge.
  std::optional<double> total() const {
    if (y22_divergent) return std::nullopt;
    return d2_core + y12_term + y21_term + normalization_term;
  }
};

inline BlockD2Contributions block_d2_contributions(const ComplexMatrix& x11, const BlockSplit& bs,
                                                   double y22_tol = 1e-12) {
  require_square(x11, "block_d2_contributions");
  BlockD2Contributions out;
  const HermitianEigen left = eigh(x11 * x11.adjoint());
  require_positive_definite(left, kPositiveDefiniteTol, "block_d2_contributions");
  const ComplexMatrix log_left = support_log(left);
  const ComplexMatrix log_right = support_log(x11.adjoint() * x11);
  out.d2_core = bs.y11.size() ? second_derivative_integral(x11, bs.y11) : 0.0;
  if (bs.y12.size()) out.y12_term = -2.0 * (bs.y12 * bs.y12.adjoint() * log_left).trace().real();
  if (bs.y21.size()) out.y21_term = -2.0 * (bs.y21.adjoint() * bs.y21 * log_right).trace().real();
  const double s = shannon_entropy(left.values);
  out.normalization_term = -2.0 * s * (bs.y12.squaredNorm() + bs.y21.squaredNorm());
  out.y22_divergent = bs.y22.size() > 0 && bs.y22.norm() > y22_tol;
  return out;
}

/// Default complement isometry [I 0] of shape (d_B - r) x (d_E - r).
inline ComplexMatrix default_complement(Eigen::Index rows, Eigen::Index cols) {
  if (rows > cols) throw DimensionError("default_complement: needs d_E >= d_B");
  return ComplexMatrix::Identity(rows, cols);
}

/// [[X_eps, 0], [0, eps F]] with X_eps = (1 - eps^2 Tr F F^dagger)^{1/2} x11,
/// in the singular frame of the original point.
inline ComplexMatrix epsilon_embed(const ComplexMatrix& x11, const ComplexMatrix& f, double eps) {
  require_square(x11, "epsilon_embed");
  const double perp = (f * f.adjoint()).trace().real();
  const double shrink = 1.0 - eps * eps * perp;
  if (!(shrink > 0.0)) throw NormalizationError("epsilon_embed: eps^2 Tr P_B-perp must stay below 1");
  const Eigen::Index r = x11.rows();
  ComplexMatrix out = ComplexMatrix::Zero(r + f.rows(), r + f.cols());
  out.topLeftCorner(r, r) = std::sqrt(shrink) * x11;
  out.bottomRightCorner(f.rows(), f.cols()) = eps * f;
  return out;
}

/// Max discrepancy between the quadrature of
///   int_0^inf 1/(eps^2 + u) (x^2 + u)^{-1} du
/// and (x^2 - eps^2)^{-1} (log x^2 - log eps^2), with x taken as X_eps.
inline double singular_kernel_check(const ComplexMatrix& x, double eps) {
  const HermitianEigen e = eigh(x * x.adjoint());
  require_positive_definite(e, kPositiveDefiniteTol, "singular_kernel_check");
  const double e2 = eps * eps;
  RealVector quad(e.dimension()), closed(e.dimension());
  for (Eigen::Index i = 0; i < e.dimension(); ++i) {
    const double lam = e.values(i);
    // u = e^s spreads the two scales eps^2 and lam evenly
    auto integrand = [&](double s) {
      const double u = std::exp(s);
      return u / ((e2 + u) * (lam + u));
    };
    const double lo = std::log(std::min(e2, lam)) - 40.0;
    const double hi = std::log(std::max(e2, lam)) + 40.0;
    quad(i) = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, lo, hi, 15, 1e-14);
    closed(i) = dlog_kernel(lam, e2);
  }
  const ComplexMatrix qm = e.vectors * quad.cast<Complex>().asDiagonal() * e.vectors.adjoint();
  const ComplexMatrix cm = e.vectors * closed.cast<Complex>().asDiagonal() * e.vectors.adjoint();
  return (qm - cm).cwiseAbs().maxCoeff();
}

/// Spectrum of block-diag(xi^2 x11^2, eps^2 y22 y22^dagger), xi^2 = 1 - eps^2 |y22|^2.
inline std::vector<double> perturbed_block_spectrum(const ComplexMatrix& x11, const ComplexMatrix& y22, double eps) {
  const double xi2 = 1.0 - eps * eps * y22.squaredNorm();
  std::vector<double> out = to_std_vector(eigh(x11 * x11.adjoint()).values * xi2);
  if (y22.size()) {
    const RealVector tail = eigh(y22 * y22.adjoint()).values * (eps * eps);
    out.insert(out.end(), tail.data(), tail.data() + tail.size());
  }
  return out;
}

/// Whether the spectrum of block-diag(x11^2, 0) majorizes the perturbed one.
inline bool block_majorization_holds(const ComplexMatrix& x11, const ComplexMatrix& y22, double eps,
                                     double tol = 1e-12) {
  const std::vector<double> pert = perturbed_block_spectrum(x11, y22, eps);
  std::vector<double> base = to_std_vector(eigh(x11 * x11.adjoint()).values);
  base.resize(pert.size(), 0.0);
  return majorizes(base, pert, tol);
}

/// Largest eps (up to 1/|y22|) for which the majorization holds, by bisection.
inline double majorization_threshold(const ComplexMatrix& x11, const ComplexMatrix& y22, int iterations = 60) {
  const double n = y22.norm();
  if (n == 0.0) return std::numeric_limits<double>::infinity();
  double hi = 1.0 / n;
  if (block_majorization_holds(x11, y22, hi)) return hi;
  double lo = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (block_majorization_holds(x11, y22, mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace moe
