#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "moe/holevo.hpp"
#include "oracles.hpp"

using namespace moe;

namespace {

double max_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

}  // namespace

TEST(RelativeEntropy, Examples) {
  Rng rng = make_stream(1, 0);
  const ComplexMatrix rho = random_density_matrix(3, rng);
  EXPECT_NEAR(relative_entropy(rho, rho), 0.0, 1e-12);
  ComplexMatrix zero = ComplexMatrix::Zero(2, 2);
  zero(0, 0) = 1.0;
  EXPECT_NEAR(relative_entropy(zero, ComplexMatrix::Identity(2, 2) / 2.0), std::log(2.0), 1e-14);
}

TEST(RelativeEntropy, MatchesSpectralOracleAndIsNonnegative) {
  Rng rng = make_stream(1, 1);
  for (int t = 0; t < 50; ++t) {
    const Eigen::Index d = 2 + t % 4;
    const ComplexMatrix rho = random_density_matrix(d, rng), omega = random_density_matrix(d, rng);
    const double h = relative_entropy(rho, omega);
    EXPECT_NEAR(h, oracle::relative_entropy(rho, omega), 1e-10);
    EXPECT_GT(h, 0.0);
  }
}

TEST(RelativeEntropy, SupportViolationIsTyped) {
  ComplexMatrix omega = ComplexMatrix::Zero(2, 2);
  omega(0, 0) = 1.0;
  try {
    relative_entropy(ComplexMatrix::Identity(2, 2) / 2.0, omega);
    FAIL() << "expected a support error";
  } catch (const SupportError& e) {
    EXPECT_NEAR(e.leaked_weight, 0.5, 1e-12);
  }
  EXPECT_NEAR(relative_entropy(omega, omega), 0.0, 1e-14);
}

TEST(RelativeEntropy, AdditiveOverProducts) {
  Rng rng = make_stream(1, 2);
  for (int t = 0; t < 10; ++t) {
    const ComplexMatrix r1 = random_density_matrix(2, rng), r2 = random_density_matrix(3, rng);
    const ComplexMatrix w1 = random_density_matrix(2, rng), w2 = random_density_matrix(3, rng);
    EXPECT_NEAR(relative_entropy(kron(r1, r2), kron(w1, w2)), relative_entropy(r1, w1) + relative_entropy(r2, w2),
                1e-10);
  }
}

TEST(RelentDerivatives, MatchFiniteDifferences) {
  Rng rng = make_stream(2, 0);
  for (int t = 0; t < 5; ++t) {
    const ChannelSpec ch = oracle::random_channel(3, 3, 2, rng);
    const ComplexVector psi = random_unit_vector(3, rng);
    ComplexVector phi = random_unit_vector(3, rng);
    phi -= psi.dot(phi) * psi;
    phi.normalize();
    const ComplexMatrix omega = random_density_matrix(3, rng);
    const RelentDerivatives r = relent_derivatives(ch, psi, phi, omega);
    auto h = [&](double s) {
      const ComplexVector v = std::sqrt(1.0 - s * s) * psi + s * phi;
      return oracle::relative_entropy(apply_channel(ch, pure_state(v)), omega);
    };
    EXPECT_NEAR(r.d1, oracle::fd1(h), 1e-6);
    EXPECT_NEAR(r.d2, oracle::fd2(h), 1e-5);
    const RelentDerivatives half = relent_derivatives(ch, psi, phi, omega, 0.5);
    EXPECT_NEAR(half.d1, 0.5 * r.d1, 1e-12);
    EXPECT_NEAR(half.d2, 0.25 * r.d2, 1e-12);
  }
}

TEST(RelentDerivatives, SingularReferenceIsRejected) {
  ComplexMatrix omega = ComplexMatrix::Zero(2, 2);
  omega(0, 0) = 1.0;
  ComplexVector psi = ComplexVector::Zero(2), phi = ComplexVector::Zero(2);
  psi(0) = 1.0;
  phi(1) = 1.0;
  EXPECT_THROW(relent_derivatives(depolarizing_qubit(0.5), psi, phi, omega), DomainError);
}

TEST(RelentMaximum, IdentityChannelIsFlat) {
  Rng rng = make_stream(3, 0);
  const ComplexVector psi = random_unit_vector(2, rng);
  const CertifiedPoint p = certify_relent_maximum(identity_channel(2), ComplexMatrix::Identity(2, 2) / 2.0, psi);
  EXPECT_TRUE(p.certificate.is_critical);
  EXPECT_NEAR(p.certificate.nu, 0.0, 1e-10);
  EXPECT_FALSE(p.certificate.nondegenerate);
  EXPECT_NEAR(relative_entropy(pure_state(psi), ComplexMatrix::Identity(2, 2) / 2.0), std::log(2.0), 1e-12);
}

TEST(RelentMaximum, DepolarizingPureInputsAreCritical) {
  Rng rng = make_stream(3, 1);
  for (double p : {0.25, 0.5}) {
    const CertifiedPoint c =
        certify_relent_maximum(depolarizing_qubit(p), ComplexMatrix::Identity(2, 2) / 2.0, random_unit_vector(2, rng));
    EXPECT_TRUE(c.certificate.is_critical);
    EXPECT_LT(c.certificate.gradient_norm, 1e-7);
  }
  EXPECT_THROW(certify_relent_maximum(depolarizing_qubit(0.5), ComplexMatrix::Identity(3, 3) / 3.0,
                                      random_unit_vector(2, rng)),
               DimensionError);
}

TEST(Capacity, IdentityQubit) {
  const CapacityReport r = holevo_capacity(identity_channel(2));
  EXPECT_NEAR(r.c_holv, std::log(2.0), 1e-8);
  EXPECT_TRUE(r.converged);
  EXPECT_LE(r.gap(), 1e-8);
  EXPECT_LE(max_of(r.equidistance_residuals), 1e-5);
  EXPECT_LE((r.output_avg - ComplexMatrix::Identity(2, 2) / 2.0).norm(), 1e-6);
}

TEST(Capacity, DepolarizingClosedForm) {
  for (double p : {0.25, 0.5, 0.75}) {
    const CapacityReport r = holevo_capacity(depolarizing_qubit(p));
    EXPECT_NEAR(r.c_holv, oracle::depolarizing_capacity(p), 1e-5) << p;
    EXPECT_LE(max_of(r.equidistance_residuals), 1e-5);
    EXPECT_LE(r.lower_bound, r.c_holv + 1e-12);
    EXPECT_LE(r.c_holv, r.upper_bound + 1e-12);
  }
}

TEST(Capacity, SandwichAndEquidistanceOnRandomChannels) {
  Rng rng = make_stream(4, 0);
  for (int t = 0; t < 2; ++t) {
    const ChannelSpec ch = oracle::random_channel(2, 2, 2, rng);
    CapacityConfig cfg;
    cfg.seed = 10 + t;
    const CapacityReport r = holevo_capacity(ch, cfg);
    EXPECT_TRUE(r.converged);
    EXPECT_GE(r.c_holv, 0.0);
    EXPECT_LE(r.lower_bound, r.upper_bound + 1e-12);
    EXPECT_LT(r.gap(), 1e-5);
    EXPECT_LE(max_of(r.equidistance_residuals), 1e-5);
    double total = 0.0;
    for (double p : r.ensemble.probabilities) total += p;
    EXPECT_NEAR(total, 1.0, 1e-12);
    for (const auto& psi : r.ensemble.pure_states) EXPECT_NEAR(psi.norm(), 1.0, 1e-12);
    const ComplexMatrix out = apply_channel(ch, r.rho_avg);
    double chi = oracle::entropy(out);
    for (std::size_t j = 0; j < r.ensemble.size(); ++j) {
      chi -= r.ensemble.probabilities[j] * oracle::entropy(apply_channel(ch, pure_state(r.ensemble.pure_states[j])));
    }
    EXPECT_NEAR(chi, r.lower_bound, 1e-10);
    for (int k = 0; k < 20; ++k) {
      const ComplexVector psi = random_unit_vector(2, rng);
      EXPECT_LE(oracle::relative_entropy(apply_channel(ch, pure_state(psi)), out), r.c_holv + 1e-6);
    }
  }
}

TEST(Capacity, DeterministicForSeed) {
  Rng rng = make_stream(4, 1);
  const ChannelSpec ch = oracle::random_channel(2, 2, 2, rng);
  CapacityConfig cfg;
  cfg.seed = 3;
  EXPECT_EQ(holevo_capacity(ch, cfg).c_holv, holevo_capacity(ch, cfg).c_holv);
}

TEST(Probe, IdentityChannelSaturatesAtProducts) {
  const CapacityReport cap = holevo_capacity(identity_channel(2));
  const SuperadditivityProbe p = superadditivity_probe(identity_channel(2), cap);
  EXPECT_NEAR(p.threshold, 2.0 * cap.c_holv, 1e-15);
  EXPECT_EQ(p.margin, p.value - p.threshold);
  EXPECT_LE(p.margin, 1e-6);
  EXPECT_NEAR(p.product_anchor, 2.0 * cap.c_holv, 1e-6);
  EXPECT_FALSE(p.violation);
}

TEST(Probe, RandomChannelsShowNoViolation) {
  Rng rng = make_stream(5, 0);
  const ChannelSpec ch = oracle::random_channel(2, 2, 2, rng);
  const CapacityReport cap = holevo_capacity(ch);
  ProbeConfig cfg;
  cfg.seed = 9;
  const SuperadditivityProbe p = superadditivity_probe(ch, cap, cfg);
  EXPECT_GE(p.product_anchor, 2.0 * cap.c_holv - 1e-6);
  EXPECT_LE(p.margin, 1e-6);
  EXPECT_FALSE(p.violation);
  EXPECT_EQ(p.starts.size(), cap.ensemble.size() * cap.ensemble.size() + 16u);
  EXPECT_NEAR(p.best_psi.norm(), 1.0, 1e-12);
}

TEST(Probe, EmptyEnsembleIsRejected) {
  CapacityReport empty;
  EXPECT_THROW(superadditivity_probe(identity_channel(2), empty), ValidationError);
}

TEST(TensorMaximum, ProductOfCertifiedMaxima) {
  Rng rng = make_stream(6, 0);
  const ChannelSpec ch = oracle::random_channel(2, 2, 2, rng);
  const CapacityReport cap = holevo_capacity(ch);
  const ComplexMatrix omega = apply_channel(ch, cap.rho_avg);
  const CertifiedPoint a = certify_relent_maximum(ch, omega, cap.ensemble.pure_states.front());
  const CertifiedPoint b = certify_relent_maximum(ch, omega, cap.ensemble.pure_states.back());
  EXPECT_TRUE(a.certificate.is_critical);
  EXPECT_TRUE(b.certificate.is_critical);
  TensorVerifyConfig cfg;
  cfg.samples = 200;
  cfg.mc_samples = 2000;
  const ComplexMatrix lo = support_log(omega);
  const TensorVerificationReport rep = verify_tensor_maximum(a, b, lo, lo, 3, cfg);
  EXPECT_TRUE(rep.passed) << (rep.counterexample ? rep.counterexample->failed_check : std::string());
  EXPECT_LT(rep.d1_max, 1e-9);
  EXPECT_GE(rep.bound_min_slack, -1e-8);
}
