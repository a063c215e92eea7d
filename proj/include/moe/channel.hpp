#pragma once

// Channels as Stinespring isometries K : C^{d_in} -> C^{d_out} (x) C^{d_env}
// and the matrix subspace spanned by Omega(K e_i).
//
// Index convention: the bipartite vector index is b * d_env + e, so
// Omega(v)(b, e) = v[b * d_env + e] and Kraus operator e has entries
// (A_e)(b, i) = K(b * d_env + e, i).

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "moe/linalg.hpp"

namespace moe {

inline constexpr double kKrausTol = 1e-10;

inline ComplexMatrix omega_reshape(const ComplexVector& v, Eigen::Index d_b, Eigen::Index d_e) {
  if (v.size() != d_b * d_e) {
    throw DimensionError("omega_reshape: vector length " + std::to_string(v.size()) + " != " +
                         std::to_string(d_b) + "*" + std::to_string(d_e));
  }
  ComplexMatrix m(d_b, d_e);
  for (Eigen::Index b = 0; b < d_b; ++b) {
    for (Eigen::Index e = 0; e < d_e; ++e) m(b, e) = v(b * d_e + e);
  }
  return m;
}

inline ComplexVector omega_unreshape(const ComplexMatrix& m) {
  ComplexVector v(m.size());
  for (Eigen::Index b = 0; b < m.rows(); ++b) {
    for (Eigen::Index e = 0; e < m.cols(); ++e) v(b * m.cols() + e) = m(b, e);
  }
  return v;
}

inline double kraus_completeness_defect(std::span<const ComplexMatrix> kraus) {
  if (kraus.empty()) throw ValidationError("channel: empty Kraus list");
  const Eigen::Index d_in = kraus.front().cols();
  ComplexMatrix sum = ComplexMatrix::Zero(d_in, d_in);
  for (const auto& a : kraus) sum += a.adjoint() * a;
  return (sum - ComplexMatrix::Identity(d_in, d_in)).norm();
}

inline ComplexMatrix isometry_from_kraus(std::span<const ComplexMatrix> kraus, double tol = kKrausTol) {
  if (kraus.empty()) throw ValidationError("isometry_from_kraus: empty Kraus list");
  const Eigen::Index d_out = kraus.front().rows();
  const Eigen::Index d_in = kraus.front().cols();
  for (const auto& a : kraus) {
    if (a.rows() != d_out || a.cols() != d_in) {
      throw DimensionError("isometry_from_kraus: Kraus operators have inconsistent shapes");
    }
    require_finite(a, "isometry_from_kraus");
  }
  const double defect = kraus_completeness_defect(kraus);
  if (defect > tol) throw ValidationError("isometry_from_kraus: Kraus operators are not trace preserving", defect);
  const auto d_env = static_cast<Eigen::Index>(kraus.size());
  ComplexMatrix k(d_out * d_env, d_in);
  for (Eigen::Index e = 0; e < d_env; ++e) {
    const ComplexMatrix& a = kraus[static_cast<std::size_t>(e)];
    for (Eigen::Index b = 0; b < d_out; ++b) k.row(b * d_env + e) = a.row(b);
  }
  return k;
}

inline std::vector<ComplexMatrix> kraus_from_isometry(const ComplexMatrix& k, Eigen::Index d_out, Eigen::Index d_env) {
  if (k.rows() != d_out * d_env) throw DimensionError("kraus_from_isometry: row count mismatch");
  std::vector<ComplexMatrix> kraus(static_cast<std::size_t>(d_env), ComplexMatrix(d_out, k.cols()));
  for (Eigen::Index e = 0; e < d_env; ++e) {
    for (Eigen::Index b = 0; b < d_out; ++b) kraus[static_cast<std::size_t>(e)].row(b) = k.row(b * d_env + e);
  }
  return kraus;
}

struct ChannelSpec {
  Eigen::Index d_in = 0;
  Eigen::Index d_out = 0;
  Eigen::Index d_env = 0;
  std::vector<ComplexMatrix> kraus;
  ComplexMatrix isometry;

  static ChannelSpec from_kraus(std::vector<ComplexMatrix> ops, double tol = kKrausTol) {
    ChannelSpec spec;
    spec.isometry = isometry_from_kraus(ops, tol);
    spec.d_in = ops.front().cols();
    spec.d_out = ops.front().rows();
    spec.d_env = static_cast<Eigen::Index>(ops.size());
    spec.kraus = std::move(ops);
    return spec;
  }

  static ChannelSpec from_isometry(const ComplexMatrix& k, Eigen::Index d_out, Eigen::Index d_env,
                                   double tol = kKrausTol) {
    if (d_out <= 0 || d_env <= 0 || k.rows() != d_out * d_env) {
      throw DimensionError("ChannelSpec: isometry rows must equal d_out * d_env");
    }
    const double defect = (k.adjoint() * k - ComplexMatrix::Identity(k.cols(), k.cols())).norm();
    if (defect > tol) throw ValidationError("ChannelSpec: K^dagger K != I", defect);
    ChannelSpec spec;
    spec.d_in = k.cols();
    spec.d_out = d_out;
    spec.d_env = d_env;
    spec.isometry = k;
    spec.kraus = kraus_from_isometry(k, d_out, d_env);
    return spec;
  }

  /// Omega(K psi), the d_out x d_env matrix whose Gram X X^dagger is the output.
  ComplexMatrix output_matrix(const ComplexVector& psi) const {
    if (psi.size() != d_in) throw DimensionError("ChannelSpec: input dimension mismatch");
    return omega_reshape(isometry * psi, d_out, d_env);
  }
};

/// Subspace of d_b x d_e matrices with a Hilbert-Schmidt orthonormal basis.
class MatrixSubspace {
 public:
  MatrixSubspace() = default;

  MatrixSubspace(Eigen::Index d_b, Eigen::Index d_e, std::vector<ComplexMatrix> orthonormal_basis,
                 double tol = 1e-10)
      : d_b_(d_b), d_e_(d_e), basis_(std::move(orthonormal_basis)) {
    for (const auto& b : basis_) {
      if (b.rows() != d_b_ || b.cols() != d_e_) throw DimensionError("MatrixSubspace: basis element has wrong shape");
    }
    if (static_cast<Eigen::Index>(basis_.size()) > d_b_ * d_e_) {
      throw DimensionError("MatrixSubspace: more basis elements than ambient dimension");
    }
    const double defect = (gram() - ComplexMatrix::Identity(dim(), dim())).norm();
    if (defect > tol) throw ValidationError("MatrixSubspace: basis is not orthonormal", defect);
  }

  /// Orthonormalizes an arbitrary spanning set, dropping dependent directions.
  static MatrixSubspace spanned_by(Eigen::Index d_b, Eigen::Index d_e, std::span<const ComplexMatrix> spanning,
                                   double drop_tol = 1e-10) {
    return MatrixSubspace(d_b, d_e, orthonormalize(spanning, d_b, d_e, drop_tol));
  }

  Eigen::Index rows() const { return d_b_; }
  Eigen::Index cols() const { return d_e_; }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(basis_.size()); }
  const std::vector<ComplexMatrix>& basis() const { return basis_; }
  const ComplexMatrix& operator[](std::size_t i) const { return basis_[i]; }

  ComplexMatrix gram() const {
    ComplexMatrix g(dim(), dim());
    for (Eigen::Index i = 0; i < dim(); ++i) {
      for (Eigen::Index j = 0; j < dim(); ++j) {
        g(i, j) = hs_inner(basis_[static_cast<std::size_t>(i)], basis_[static_cast<std::size_t>(j)]);
      }
    }
    return g;
  }

  ComplexVector coefficients(const ComplexMatrix& y) const {
    if (y.rows() != d_b_ || y.cols() != d_e_) throw DimensionError("MatrixSubspace: element has wrong shape");
    ComplexVector c(dim());
    for (Eigen::Index i = 0; i < dim(); ++i) c(i) = hs_inner(basis_[static_cast<std::size_t>(i)], y);
    return c;
  }

  ComplexMatrix combine(const ComplexVector& c) const {
    if (c.size() != dim()) throw DimensionError("MatrixSubspace: coefficient length mismatch");
    ComplexMatrix y = ComplexMatrix::Zero(d_b_, d_e_);
    for (Eigen::Index i = 0; i < dim(); ++i) y += c(i) * basis_[static_cast<std::size_t>(i)];
    return y;
  }

  ComplexMatrix project(const ComplexMatrix& y) const { return combine(coefficients(y)); }

  /// Frobenius distance from y to the subspace.
  double residual(const ComplexMatrix& y) const { return (y - project(y)).norm(); }

  bool contains(const ComplexMatrix& y, double tol = 1e-10) const {
    return residual(y) <= tol * std::max(1.0, y.norm());
  }

  /// Whether A in the subspace implies A^dagger in it (requires square shape).
  bool closed_under_adjoint(double tol = 1e-10) const {
    if (d_b_ != d_e_) return false;
    for (const auto& b : basis_) {
      if (residual(b.adjoint()) > tol) return false;
    }
    return true;
  }

 private:
  Eigen::Index d_b_ = 0;
  Eigen::Index d_e_ = 0;
  std::vector<ComplexMatrix> basis_;
};

inline MatrixSubspace subspace_from_channel(const ChannelSpec& spec) {
  std::vector<ComplexMatrix> basis;
  basis.reserve(static_cast<std::size_t>(spec.d_in));
  for (Eigen::Index i = 0; i < spec.d_in; ++i) {
    basis.push_back(omega_reshape(spec.isometry.col(i), spec.d_out, spec.d_env));
  }
  return MatrixSubspace(spec.d_out, spec.d_env, std::move(basis));
}

/// The channel whose subspace has exactly this basis: K e_i = vec Omega^{-1}(B_i).
inline ChannelSpec channel_from_subspace(const MatrixSubspace& k) {
  ComplexMatrix iso(k.rows() * k.cols(), k.dim());
  for (Eigen::Index i = 0; i < k.dim(); ++i) iso.col(i) = omega_unreshape(k[static_cast<std::size_t>(i)]);
  return ChannelSpec::from_isometry(iso, k.rows(), k.cols());
}

inline void validate_density_matrix(const ComplexMatrix& rho, Eigen::Index d, double tol, const char* where) {
  if (rho.rows() != d || rho.cols() != d) throw DimensionError(std::string(where) + ": state has wrong shape");
  require_finite(rho, where);
  if (hermiticity_defect(rho) > tol) throw ValidationError(std::string(where) + ": state is not Hermitian");
  const double trace_defect = std::abs(rho.trace().real() - 1.0);
  if (trace_defect > tol) throw ValidationError(std::string(where) + ": state does not have unit trace", trace_defect);
  const double lo = eigh(rho).min_value();
  if (lo < -tol) throw ValidationError(std::string(where) + ": state is not positive semidefinite", -lo);
}

inline ComplexMatrix apply_channel(const ChannelSpec& spec, const ComplexMatrix& rho, double tol = 1e-8) {
  validate_density_matrix(rho, spec.d_in, tol, "apply_channel");
  ComplexMatrix out = ComplexMatrix::Zero(spec.d_out, spec.d_out);
  for (const auto& a : spec.kraus) out += a * rho * a.adjoint();
  return hermitian_part(out);
}

inline ComplexMatrix pure_state(const ComplexVector& psi) { return psi * psi.adjoint(); }

/// X^T conj(X): output of the complementary channel for the input behind X.
inline ComplexMatrix complementary_output(const ComplexMatrix& x, double tol = 1e-8) {
  const double n = x.squaredNorm();
  if (std::abs(n - 1.0) > tol) throw NormalizationError("complementary_output: Tr X X^dagger != 1");
  return x.transpose() * x.conjugate();
}

inline MatrixSubspace tensor_subspace(const MatrixSubspace& kb, const MatrixSubspace& kc) {
  std::vector<ComplexMatrix> basis;
  basis.reserve(static_cast<std::size_t>(kb.dim() * kc.dim()));
  for (const auto& a : kb.basis()) {
    for (const auto& b : kc.basis()) basis.push_back(kron(a, b));
  }
  return MatrixSubspace(kb.rows() * kc.rows(), kb.cols() * kc.cols(), std::move(basis));
}

inline ChannelSpec tensor_channel(const ChannelSpec& a, const ChannelSpec& b) {
  std::vector<ComplexMatrix> ops;
  ops.reserve(a.kraus.size() * b.kraus.size());
  for (const auto& ka : a.kraus) {
    for (const auto& kb : b.kraus) ops.push_back(kron(ka, kb));
  }
  return ChannelSpec::from_kraus(std::move(ops), 1e-9);
}

inline ChannelSpec identity_channel(Eigen::Index d) {
  return ChannelSpec::from_kraus({ComplexMatrix::Identity(d, d)});
}

/// Qubit depolarizing channel (1-p) rho + p I/2.
inline ChannelSpec depolarizing_qubit(double p) {
  if (p < 0.0 || p > 4.0 / 3.0) throw ValidationError("depolarizing_qubit: p outside [0, 4/3]");
  const Complex i(0.0, 1.0);
  ComplexMatrix id = ComplexMatrix::Identity(2, 2);
  ComplexMatrix sx(2, 2), sy(2, 2), sz(2, 2);
  sx << 0, 1, 1, 0;
  sy << 0, -i, i, 0;
  sz << 1, 0, 0, -1;
  const double a = std::sqrt(1.0 - 0.75 * p);
  const double b = std::sqrt(0.25 * p);
  return ChannelSpec::from_kraus({a * id, b * sx, b * sy, b * sz});
}

}  // namespace moe
