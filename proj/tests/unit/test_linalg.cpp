#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "moe/linalg.hpp"
#include "moe/random.hpp"

using namespace moe;

namespace {

const Complex I1(0.0, 1.0);

ComplexMatrix pauli_x() {
  ComplexMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

ComplexMatrix pauli_z() {
  ComplexMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

ComplexMatrix diag(std::initializer_list<double> v) {
  RealVector d(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) d(i++) = x;
  return d.cast<Complex>().asDiagonal();
}

}  // namespace

TEST(HsInner, Examples) {
  const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
  EXPECT_NEAR(std::abs(hs_inner(id, id) - Complex(2.0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(hs_inner(pauli_x(), pauli_z())), 0.0, 1e-15);
  ComplexMatrix a(2, 2);
  a << 1.0, I1, 0.0, 2.0;
  EXPECT_NEAR(std::abs(hs_inner(a, a) - Complex(6.0)), 0.0, 1e-15);
}

TEST(HsInner, ConjugateSymmetric) {
  Rng rng = make_stream(1, 0);
  for (int k = 0; k < 20; ++k) {
    const ComplexMatrix a = random_ginibre(3, 4, rng), b = random_ginibre(3, 4, rng);
    EXPECT_NEAR(std::abs(hs_inner(a, b) - std::conj(hs_inner(b, a))), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(hs_inner(a, b) - (a.adjoint() * b).trace()), 0.0, 1e-12);
  }
}

TEST(HsInner, ShapeMismatchThrows) {
  EXPECT_THROW(hs_inner(ComplexMatrix::Zero(2, 2), ComplexMatrix::Zero(2, 3)), DimensionError);
}

TEST(Eigh, Examples) {
  const HermitianEigen d = eigh(diag({3.0, 1.0}));
  EXPECT_DOUBLE_EQ(d.values(0), 1.0);
  EXPECT_DOUBLE_EQ(d.values(1), 3.0);
  EXPECT_NEAR(std::abs(d.vectors(1, 0)), 1.0, 1e-15);
  const HermitianEigen x = eigh(pauli_x());
  EXPECT_NEAR(x.values(0), -1.0, 1e-15);
  EXPECT_NEAR(x.values(1), 1.0, 1e-15);
}

TEST(Eigh, RoundTripUpTo16) {
  Rng rng = make_stream(2, 0);
  for (Eigen::Index d = 1; d <= 16; ++d) {
    const ComplexMatrix a = random_hermitian(d, rng);
    const HermitianEigen e = eigh(a);
    const ComplexMatrix back = e.vectors * e.values.cast<Complex>().asDiagonal() * e.vectors.adjoint();
    EXPECT_LE((back - a).norm(), 1e-12 * a.norm()) << "d=" << d;
    EXPECT_LE((e.vectors.adjoint() * e.vectors - ComplexMatrix::Identity(d, d)).norm(), 1e-12);
    for (Eigen::Index i = 1; i < d; ++i) EXPECT_LE(e.values(i - 1), e.values(i));
  }
}

TEST(Eigh, RejectsNonHermitian) {
  ComplexMatrix a(2, 2);
  a << 1, 2, 0, 1;
  EXPECT_THROW(eigh(a), ValidationError);
}

TEST(MatrixFunction, Examples) {
  const ComplexMatrix s = matrix_function_psd(diag({4.0, 9.0}), [](double x) { return std::sqrt(x); });
  EXPECT_LE((s - diag({2.0, 3.0})).norm(), 1e-14);
  const ComplexMatrix l = support_log(diag({1.0, 0.0}));
  EXPECT_LE(l.norm(), 1e-15);
}

TEST(MatrixFunction, UndefinedValueThrows) {
  EXPECT_THROW(matrix_function_psd(diag({0.25, 1.0}), [](double x) { return std::log(x - 0.5); }), DomainError);
  EXPECT_THROW(psd_sqrt(diag({-1.0, 1.0})), ValidationError);
}

TEST(MatrixFunction, SqrtRoundTripAndIdentity) {
  Rng rng = make_stream(3, 0);
  for (int k = 0; k < 20; ++k) {
    const ComplexMatrix a = random_density_matrix(5, rng);
    const ComplexMatrix r = psd_sqrt(a);
    EXPECT_LE((r * r - a).norm(), 1e-10);
    const ComplexMatrix same = matrix_function_psd(a, [](double x) { return x; });
    EXPECT_LE((same - a).norm(), 1e-12);
  }
}

TEST(MatrixFunction, IdentityProjectsToSupport) {
  Rng rng = make_stream(3, 1);
  const ComplexMatrix v = random_ginibre(4, 2, rng);
  const ComplexMatrix a = v * v.adjoint();
  const ComplexMatrix same = matrix_function_psd(a, [](double x) { return x; });
  EXPECT_LE((same - a).norm(), 1e-12 * a.norm());
}

TEST(Polar, Examples) {
  const PolarFactors d = polar_decompose(diag({2.0, 3.0}));
  EXPECT_LE((d.positive_part - diag({2.0, 3.0})).norm(), 1e-14);
  EXPECT_LE((d.isometry_part - ComplexMatrix::Identity(2, 2)).norm(), 1e-14);
  Rng rng = make_stream(4, 0);
  const ComplexMatrix u = haar_unitary(3, rng);
  const PolarFactors pu = polar_decompose(u);
  EXPECT_LE((pu.positive_part - ComplexMatrix::Identity(3, 3)).norm(), 1e-12);
  EXPECT_LE((pu.isometry_part - u).norm(), 1e-12);
}

TEST(Polar, ReconstructionAndPartialIsometry) {
  Rng rng = make_stream(4, 1);
  for (int k = 0; k < 20; ++k) {
    ComplexMatrix x = random_ginibre(3, 5, rng);
    if (k % 2) x = random_ginibre(3, 1, rng) * random_ginibre(1, 5, rng) + random_ginibre(3, 1, rng) * random_ginibre(1, 5, rng);
    const PolarFactors p = polar_decompose(x);
    EXPECT_LE((p.positive_part * p.isometry_part - x).norm(), 1e-10);
    const ComplexMatrix pb = p.isometry_part * p.isometry_part.adjoint();
    const ComplexMatrix pe = p.isometry_part.adjoint() * p.isometry_part;
    EXPECT_LE((pb * pb - pb).norm(), 1e-10);
    EXPECT_LE((pe * pe - pe).norm(), 1e-10);
    EXPECT_LE((pb - pb.adjoint()).norm(), 1e-10);
    EXPECT_GE(eigh(p.positive_part).min_value(), -1e-12);
    EXPECT_EQ(p.rank, k % 2 ? 2 : 3);
  }
}

TEST(Majorization, Examples) {
  const std::vector<double> a{1.0, 0.0}, b{0.5, 0.5}, c{0.6, 0.4}, d{0.7, 0.3};
  EXPECT_TRUE(majorizes(a, b));
  EXPECT_TRUE(majorizes(b, b));
  EXPECT_FALSE(majorizes(c, d));
  EXPECT_FALSE(majorizes(b, a));
}

TEST(Majorization, SumMismatchThrows) {
  const std::vector<double> a{1.0, 0.0}, b{0.5, 0.4};
  EXPECT_THROW(majorizes(a, b), ValidationError);
}

TEST(Majorization, SortsAndPads) {
  const std::vector<double> a{0.0, 1.0}, b{0.25, 0.25, 0.25, 0.25};
  EXPECT_TRUE(majorizes(a, b));
}

TEST(Entropy, SupportConvention) {
  EXPECT_NEAR(von_neumann_entropy(diag({0.5, 0.5, 0.0})), std::log(2.0), 1e-15);
  EXPECT_NEAR(von_neumann_entropy(diag({1.0, 0.0})), 0.0, 1e-15);
}

TEST(Orthonormalize, DropsDependentDirections) {
  Rng rng = make_stream(5, 0);
  const ComplexMatrix a = random_ginibre(2, 3, rng), b = random_ginibre(2, 3, rng);
  const std::vector<ComplexMatrix> span{a, b, a + I1 * b};
  const std::vector<ComplexMatrix> basis = orthonormalize(span, 2, 3);
  ASSERT_EQ(basis.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(std::abs(hs_inner(basis[i], basis[j])), i == j ? 1.0 : 0.0, 1e-12);
  }
}
