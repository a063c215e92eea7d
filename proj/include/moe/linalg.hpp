#pragma once

// Dense complex linear algebra used throughout: Hilbert-Schmidt geometry,
// Hermitian eigendecomposition, functions of positive semidefinite matrices,
// polar factors and majorization of spectra.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include "moe/errors.hpp"

namespace moe {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr double kDefaultSupportTol = 1e-12;
inline constexpr double kDefaultRankTol = 1e-10;

inline std::string shape_string(const ComplexMatrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

inline void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* where) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(where) + ": shape mismatch " + shape_string(a) + " vs " +
                         shape_string(b));
  }
}

inline void require_square(const ComplexMatrix& a, const char* where) {
  if (a.rows() != a.cols()) {
    throw DimensionError(std::string(where) + ": expected a square matrix, got " + shape_string(a));
  }
}

inline void require_finite(const ComplexMatrix& a, const char* where) {
  if (!a.allFinite()) throw ValidationError(std::string(where) + ": matrix has non-finite entries");
}

/// Tr A^dagger B.
inline Complex hs_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_shape(a, b, "hs_inner");
  return (a.conjugate().array() * b.array()).sum();
}

inline double hs_norm_squared(const ComplexMatrix& a) { return a.squaredNorm(); }

inline ComplexMatrix dagger(const ComplexMatrix& a) { return a.adjoint(); }

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

inline ComplexMatrix hermitian_part(const ComplexMatrix& a) { return (a + a.adjoint()) * 0.5; }

inline double hermiticity_defect(const ComplexMatrix& a) { return (a - a.adjoint()).norm(); }

inline bool is_hermitian(const ComplexMatrix& a, double tol) {
  return a.rows() == a.cols() && hermiticity_defect(a) <= tol * std::max(1.0, a.norm());
}

/// Spectral data of a Hermitian matrix: ascending eigenvalues and the unitary
/// whose columns are the matching eigenvectors.
struct HermitianEigen {
  RealVector values;
  ComplexMatrix vectors;

  Eigen::Index dimension() const { return values.size(); }

  ComplexMatrix reconstruct() const {
    return vectors * values.cast<Complex>().asDiagonal() * vectors.adjoint();
  }

  double min_value() const { return values.size() ? values(0) : 0.0; }
  double max_value() const { return values.size() ? values(values.size() - 1) : 0.0; }
};

inline HermitianEigen eigh(const ComplexMatrix& a, double hermiticity_tol = 1e-10) {
  require_square(a, "eigh");
  require_finite(a, "eigh");
  const double scale = a.norm();
  if (hermiticity_defect(a) > hermiticity_tol * std::max(scale, 1e-300) && scale > 0.0) {
    throw ValidationError("eigh: matrix is not Hermitian within tolerance", hermiticity_defect(a) / scale);
  }
  if (a.rows() == 0) return {};
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian_part(a));
  if (solver.info() != Eigen::Success) throw NumericalError("eigh: eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// Absolute eigenvalue cutoff below which an eigenvalue counts as zero.
inline double support_cutoff(const HermitianEigen& e, double support_tol) {
  return support_tol * std::max(e.max_value(), 0.0);
}

/// f applied on the support of a PSD matrix; eigenvalues at or below the
/// (relative) support tolerance map to 0.
template <class F>
ComplexMatrix matrix_function_psd(const HermitianEigen& e, F&& f, double support_tol = kDefaultSupportTol) {
  const double cutoff = support_cutoff(e, support_tol);
  const double psd_floor = -std::max(1e-10 * std::max(e.max_value(), 0.0), 1e-14);
  RealVector mapped(e.dimension());
  for (Eigen::Index i = 0; i < e.dimension(); ++i) {
    const double lambda = e.values(i);
    if (lambda < psd_floor) {
      throw ValidationError("matrix_function_psd: matrix is not positive semidefinite", -lambda);
    }
    if (lambda <= cutoff) {
      mapped(i) = 0.0;
      continue;
    }
    const double value = f(lambda);
    if (!std::isfinite(value)) {
      throw DomainError("matrix_function_psd: function undefined at eigenvalue " + std::to_string(lambda));
    }
    mapped(i) = value;
  }
  return e.vectors * mapped.cast<Complex>().asDiagonal() * e.vectors.adjoint();
}

template <class F>
ComplexMatrix matrix_function_psd(const ComplexMatrix& a, F&& f, double support_tol = kDefaultSupportTol) {
  return matrix_function_psd(eigh(a), std::forward<F>(f), support_tol);
}

inline ComplexMatrix support_log(const HermitianEigen& e, double support_tol = kDefaultSupportTol) {
  return matrix_function_psd(e, [](double x) { return std::log(x); }, support_tol);
}

inline ComplexMatrix support_log(const ComplexMatrix& a, double support_tol = kDefaultSupportTol) {
  return support_log(eigh(a), support_tol);
}

inline ComplexMatrix psd_sqrt(const ComplexMatrix& a, double support_tol = kDefaultSupportTol) {
  return matrix_function_psd(a, [](double x) { return std::sqrt(x); }, support_tol);
}

/// -sum p log p over the entries above the relative cutoff; negative rounding
/// noise is ignored.
inline double shannon_entropy(const RealVector& spectrum, double support_tol = kDefaultSupportTol) {
  const double top = spectrum.size() ? spectrum.maxCoeff() : 0.0;
  const double cutoff = support_tol * std::max(top, 0.0);
  double s = 0.0;
  for (Eigen::Index i = 0; i < spectrum.size(); ++i) {
    const double p = spectrum(i);
    if (p > cutoff) s -= p * std::log(p);
  }
  return s;
}

inline double von_neumann_entropy(const ComplexMatrix& rho, double support_tol = kDefaultSupportTol) {
  return shannon_entropy(eigh(rho).values, support_tol);
}

/// X = sqrt(X X^dagger) V with V a partial isometry, V V^dagger = P_B and
/// V^dagger V = P_E.
struct PolarFactors {
  ComplexMatrix positive_part;
  ComplexMatrix isometry_part;
  Eigen::Index rank = 0;
};

struct SvdFactors {
  ComplexMatrix u;  // full unitary, d_rows x d_rows
  RealVector sigma;  // descending
  ComplexMatrix v;  // full unitary, d_cols x d_cols
  Eigen::Index rank = 0;
};

inline SvdFactors full_svd(const ComplexMatrix& x, double rank_tol = kDefaultRankTol) {
  require_finite(x, "svd");
  Eigen::JacobiSVD<ComplexMatrix> svd(x, Eigen::ComputeFullU | Eigen::ComputeFullV);
  SvdFactors out{svd.matrixU(), svd.singularValues(), svd.matrixV(), 0};
  const double top = out.sigma.size() ? out.sigma(0) : 0.0;
  for (Eigen::Index i = 0; i < out.sigma.size(); ++i) {
    if (top > 0.0 && out.sigma(i) > rank_tol * top) ++out.rank;
  }
  return out;
}

inline PolarFactors polar_decompose(const ComplexMatrix& x, double rank_tol = kDefaultRankTol) {
  const SvdFactors svd = full_svd(x, rank_tol);
  const Eigen::Index r = svd.rank;
  PolarFactors out;
  out.rank = r;
  const ComplexMatrix ur = svd.u.leftCols(r);
  const ComplexMatrix vr = svd.v.leftCols(r);
  out.positive_part = ur * svd.sigma.head(r).cast<Complex>().asDiagonal() * ur.adjoint();
  out.isometry_part = ur * vr.adjoint();
  if (r == 0) {
    out.positive_part = ComplexMatrix::Zero(x.rows(), x.rows());
    out.isometry_part = ComplexMatrix::Zero(x.rows(), x.cols());
  }
  return out;
}

/// Whether `a` majorizes `b`. Lists are sorted descending and zero padded to
/// equal length; their sums must agree within `tol`.
inline bool majorizes(std::span<const double> a, std::span<const double> b, double tol = 1e-12) {
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  const std::size_t n = std::max(x.size(), y.size());
  x.resize(n, 0.0);
  y.resize(n, 0.0);
  std::sort(x.begin(), x.end(), std::greater<>());
  std::sort(y.begin(), y.end(), std::greater<>());
  const double sx = std::accumulate(x.begin(), x.end(), 0.0);
  const double sy = std::accumulate(y.begin(), y.end(), 0.0);
  if (std::abs(sx - sy) > tol) {
    throw ValidationError("majorizes: sums differ", std::abs(sx - sy));
  }
  double px = 0.0;
  double py = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    px += x[k];
    py += y[k];
    if (py > px + tol) return false;
  }
  return true;
}

inline std::vector<double> to_std_vector(const RealVector& v) { return {v.data(), v.data() + v.size()}; }

/// Orthonormal basis (Hilbert-Schmidt) of the span of `spanning`, dropping
/// directions whose singular value falls below `drop_tol` (relative).
inline std::vector<ComplexMatrix> orthonormalize(std::span<const ComplexMatrix> spanning, Eigen::Index rows,
                                                 Eigen::Index cols, double drop_tol = 1e-10) {
  std::vector<ComplexMatrix> basis;
  if (spanning.empty()) return basis;
  ComplexMatrix stacked(rows * cols, static_cast<Eigen::Index>(spanning.size()));
  for (std::size_t k = 0; k < spanning.size(); ++k) {
    if (spanning[k].rows() != rows || spanning[k].cols() != cols) {
      throw DimensionError("orthonormalize: element has shape " + shape_string(spanning[k]));
    }
    stacked.col(static_cast<Eigen::Index>(k)) =
        Eigen::Map<const ComplexVector>(spanning[k].data(), rows * cols);
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(stacked, Eigen::ComputeThinU);
  const RealVector& s = svd.singularValues();
  const double top = s.size() ? s(0) : 0.0;
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    if (top <= 0.0 || s(k) <= drop_tol * std::max(top, 1.0)) break;
    ComplexMatrix m(rows, cols);
    Eigen::Map<ComplexVector>(m.data(), rows * cols) = svd.matrixU().col(k);
    basis.push_back(std::move(m));
  }
  return basis;
}

}  // namespace moe
