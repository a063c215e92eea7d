#pragma once

// Seeded random matrices and states. Every randomized routine takes an
// explicit engine; independent streams come from make_stream(seed, index).

#include <cstdint>
#include <random>
#include <vector>

#include "moe/linalg.hpp"

namespace moe {

using Rng = std::mt19937_64;

inline Rng make_stream(std::uint64_t master_seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x6d6f65u};
  return Rng(seq);
}

inline ComplexMatrix random_ginibre(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = Complex(n(rng), n(rng));
  }
  return m;
}

inline ComplexMatrix random_unit_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  ComplexMatrix m = random_ginibre(rows, cols, rng);
  return m / m.norm();
}

inline ComplexVector random_unit_vector(Eigen::Index d, Rng& rng) {
  ComplexMatrix m = random_unit_matrix(d, 1, rng);
  return m.col(0);
}

inline ComplexMatrix random_hermitian(Eigen::Index d, Rng& rng) {
  return hermitian_part(random_ginibre(d, d, rng));
}

/// Haar distributed isometry rows x cols (rows >= cols): QR of a Ginibre
/// matrix with the phases of R's diagonal divided out.
inline ComplexMatrix haar_isometry(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  if (cols > rows) throw DimensionError("haar_isometry: cols exceed rows");
  const ComplexMatrix g = random_ginibre(rows, cols, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(rows, cols);
  const ComplexMatrix r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < cols; ++k) {
    const Complex diag = r(k, k);
    const double mag = std::abs(diag);
    if (mag > 0.0) q.col(k) *= diag / mag;
  }
  return q;
}

inline ComplexMatrix haar_unitary(Eigen::Index d, Rng& rng) { return haar_isometry(d, d, rng); }

/// Full rank density matrix G G^dagger / Tr.
inline ComplexMatrix random_density_matrix(Eigen::Index d, Rng& rng) {
  const ComplexMatrix g = random_ginibre(d, d, rng);
  ComplexMatrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

/// Positive definite matrix with unit Hilbert-Schmidt norm.
inline ComplexMatrix random_positive_definite_unit(Eigen::Index d, Rng& rng) {
  const ComplexMatrix u = haar_unitary(d, rng);
  std::uniform_real_distribution<double> spread(0.2, 1.0);
  RealVector x(d);
  for (Eigen::Index i = 0; i < d; ++i) x(i) = spread(rng);
  x /= x.norm();
  return u * x.cast<Complex>().asDiagonal() * u.adjoint();
}

inline std::vector<double> random_dirichlet(std::size_t n, double alpha, Rng& rng) {
  std::gamma_distribution<double> gamma(alpha, 1.0);
  std::vector<double> p(n);
  double total = 0.0;
  for (auto& v : p) {
    v = gamma(rng);
    total += v;
  }
  for (auto& v : p) v /= total;
  return p;
}

/// Bipartite unit vector in C^d (x) C^d with Dirichlet Schmidt weights and
/// Haar local bases. Index convention i * d + j.
inline ComplexVector random_entangled_state(Eigen::Index d, Rng& rng, double alpha = 1.0) {
  const std::vector<double> w = random_dirichlet(static_cast<std::size_t>(d), alpha, rng);
  const ComplexMatrix ua = haar_unitary(d, rng);
  const ComplexMatrix ub = haar_unitary(d, rng);
  ComplexMatrix coeff = ComplexMatrix::Zero(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    coeff += std::sqrt(w[static_cast<std::size_t>(k)]) * ua.col(k) * ub.col(k).transpose();
  }
  ComplexVector psi(d * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) psi(i * d + j) = coeff(i, j);
  }
  return psi.normalized();
}

inline double log_uniform(double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

}  // namespace moe
