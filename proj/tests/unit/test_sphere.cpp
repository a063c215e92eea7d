#include <gtest/gtest.h>

#include <cmath>

#include "moe/sphere.hpp"
#include "oracles.hpp"

using namespace moe;

namespace {

MatrixSubspace random_subspace(Eigen::Index rows, Eigen::Index cols, Eigen::Index dim, Rng& rng) {
  std::vector<ComplexMatrix> span;
  for (Eigen::Index k = 0; k < dim; ++k) span.push_back(random_ginibre(rows, cols, rng));
  return MatrixSubspace(rows, cols, orthonormalize(span, rows, cols));
}

double projected_gradient_norm(const MatrixSubspace& k, const ComplexVector& c, const ComplexMatrix& g) {
  const ComplexVector gc = k.coefficients(g);
  return (gc - c * c.dot(gc)).norm();
}

}  // namespace

TEST(Sphere, SingletonSphere) {
  const ComplexMatrix x = ComplexMatrix::Identity(3, 3) / std::sqrt(3.0);
  const MatrixSubspace k(3, 3, {x});
  ComplexVector c(1);
  c(0) = Complex(0.0, 2.0);
  const SphereResult r = minimize_on_sphere(k, EntropyObjective{}, c);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, std::log(3.0), 1e-14);
  EXPECT_LE((r.x - x).norm(), 1e-14);
}

TEST(Sphere, ConvergesToStationaryPoint) {
  Rng rng = make_stream(1, 0);
  for (int t = 0; t < 5; ++t) {
    const MatrixSubspace k = random_subspace(3, 3, 3, rng);
    const ComplexVector c0 = random_unit_vector(3, rng);
    const double start = entropy_of(k.combine(c0));
    SphereConfig cfg;
    cfg.grad_tol = 1e-10;
    const SphereResult r = minimize_on_sphere(k, EntropyObjective{}, c0, cfg);
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.value, start + 1e-14);
    EXPECT_NEAR(r.coefficients.norm(), 1.0, 1e-12);
    EXPECT_NEAR(r.value, oracle::entropy(r.x * r.x.adjoint()), 1e-12);
    EXPECT_LT(projected_gradient_norm(k, r.coefficients, entropy_gradient(r.x)), 1e-9);
  }
}

TEST(Sphere, ReachesPureOutputWhenAvailable) {
  Rng rng = make_stream(1, 1);
  const oracle::CriticalInstance inst = oracle::m2_pure(1, rng);
  MultiStartConfig cfg;
  cfg.starts = 12;
  const MultiStartResult m = multistart_minimize(inst.k, EntropyObjective{}, 5, cfg);
  EXPECT_NEAR(m.best.value, 0.0, 1e-8);
}

TEST(Sphere, ShapeErrors) {
  Rng rng = make_stream(1, 2);
  const MatrixSubspace k = random_subspace(2, 2, 2, rng);
  EXPECT_THROW(minimize_on_sphere(k, EntropyObjective{}, ComplexVector::Ones(3)), DimensionError);
  MultiStartConfig none;
  none.starts = 0;
  EXPECT_THROW(multistart_minimize(k, EntropyObjective{}, 1, none), ValidationError);
}

TEST(Sphere, MultistartIsDeterministicAcrossThreadCounts) {
  Rng rng = make_stream(2, 0);
  const MatrixSubspace k = random_subspace(3, 4, 3, rng);
  MultiStartConfig one;
  one.starts = 6;
  MultiStartConfig many = one;
  many.threads = 4;
  const MultiStartResult a = multistart_minimize(k, EntropyObjective{}, 42, one);
  const MultiStartResult b = multistart_minimize(k, EntropyObjective{}, 42, many);
  ASSERT_EQ(a.runs.size(), b.runs.size());
  EXPECT_EQ(a.best_start, b.best_start);
  for (std::size_t i = 0; i < a.runs.size(); ++i) EXPECT_EQ(a.runs[i].value, b.runs[i].value);
  for (const auto& r : a.runs) EXPECT_GE(r.value, a.best.value);
}

TEST(Sphere, ExtraStartsComeFirst) {
  Rng rng = make_stream(2, 1);
  const MatrixSubspace k = random_subspace(2, 3, 2, rng);
  const ComplexVector start = random_unit_vector(2, rng);
  MultiStartConfig cfg;
  cfg.starts = 2;
  const MultiStartResult m = multistart_minimize(k, EntropyObjective{}, 3, cfg, {start});
  ASSERT_EQ(m.runs.size(), 3u);
  EXPECT_EQ(m.runs[0].value, minimize_on_sphere(k, EntropyObjective{}, start, cfg.sphere).value);
}

TEST(RelentObjective, GradientAndCurvatureMatchDifferences) {
  Rng rng = make_stream(3, 0);
  for (int t = 0; t < 5; ++t) {
    const ComplexMatrix omega = random_density_matrix(3, rng);
    const RelentObjective obj{support_log(omega)};
    const oracle::PathInstance p = oracle::random_pd_instance(3, rng);
    auto along = [&](double s) {
      const ComplexMatrix xs = std::sqrt(1.0 - s * s) * p.x + s * p.y;
      return oracle::entropy(xs * xs.adjoint()) + (xs * xs.adjoint() * obj.log_omega).trace().real();
    };
    EXPECT_NEAR(obj.value(p.x), along(0.0), 1e-12);
    EXPECT_NEAR(oracle::relative_entropy(p.x * p.x.adjoint(), omega), -obj.value(p.x), 1e-10);
    EXPECT_NEAR(hs_inner(obj.gradient(p.x), p.y).real(), oracle::fd1(along), 1e-6);
    EXPECT_NEAR(obj.curvature_at(p.x)(p.y, p.y), oracle::fd2(along), 1e-5);
  }
}
