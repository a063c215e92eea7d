// One PASS/FAIL line per acceptance criterion; exit status is nonzero on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "moe/moe.hpp"
#include "oracles.hpp"

using namespace moe;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void run(const char* id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::string detail = o.detail;
  if (budget_s > 0.0 && secs >= budget_s) {
    o.pass = false;
    detail += " over time budget";
  }
  if (!o.pass) ++failures;
  std::printf("%s %s  %s  [%s] (%.2fs)\n", id, o.pass ? "PASS" : "FAIL", name, detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt2(const char* f, double a, double b) {
  char buf[192];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

Outcome ac1() {
  Rng rng = make_stream(101, 0);
  std::uniform_real_distribution<double> u(std::log(1e-6), std::log(1e6));
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 1000000; ++k) worst = std::min(worst, check_phi_inequality(std::exp(u(rng)), std::exp(u(rng))));
  double diag = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const double a = std::pow(10.0, -6.0 + 12.0 * k / 9999.0);
    diag = std::max(diag, std::abs(check_phi_inequality(a, a)));
  }
  return {worst >= -1e-9 && diag <= 1e-8, fmt2("min slack %.3e, max |diagonal| %.3e", worst, diag)};
}

Outcome ac2() {
  const bool exact = phi(1.0) == 4.0;
  double sym = 0.0, chi2 = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 10000; ++k) {
    const double a = std::pow(10.0, -6.0 + 12.0 * k / 9999.0);
    sym = std::max(sym, std::abs(phi(a) - phi(1.0 / a)));
    chi2 = std::min(chi2, chi_second_derivative(2.0 * std::log(a)));
  }
  return {exact && sym <= 1e-12 && chi2 >= 0.0,
          std::string(exact ? "phi(1) = 4, " : "phi(1) != 4, ") + fmt2("max |phi(a) - phi(1/a)| %.3e, min chi'' %.3e", sym, chi2)};
}

Outcome ac3() {
  Rng rng = make_stream(103, 0);
  double e1 = 0.0, e2 = 0.0, agree = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Eigen::Index d = 2 + k % 5;
    const oracle::PathInstance p = oracle::random_pd_instance(d, rng);
    auto s = [&](double t) { return oracle::path_entropy(p.x, p.y, t); };
    e1 = std::max(e1, std::abs(first_derivative(p.x, p.y) - oracle::fd1(s)));
    const double d2 = second_derivative_integral(p.x, p.y);
    e2 = std::max(e2, std::abs(d2 - oracle::fd2(s)));
    const double modular = second_derivative_modular(SpectralData::from(p.x), p.y);
    agree = std::max(agree, std::abs(modular - d2) / std::max(1.0, std::abs(d2)));
  }
  return {e1 <= 1e-6 && e2 <= 1e-5 && agree <= 1e-9,
          fmt2("max |D1 - FD| %.3e, max |D2 - FD2| %.3e", e1, e2) + fmt(", kernel vs modular %.3e", agree)};
}

Outcome ac4() {
  Rng rng = make_stream(104, 0);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const oracle::PathInstance p = oracle::random_pd_instance(2 + k % 5, rng);
    const double t = -0.5 + 0.01 * k;
    const ComplexMatrix rho = path_state(p.x, p.y, t);
    const ComplexMatrix dlog = dlog_kernel_apply(rho, path_derivatives(p.x, p.y, t).first);
    worst = std::max(worst, std::abs((rho * dlog).trace()));
  }
  return {worst <= 1e-10, fmt("max |Tr rho d/dt log rho| %.3e", worst)};
}

Outcome ac5() {
  Rng rng = make_stream(105, 0);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const SpectralData s = SpectralData::from(random_positive_definite_unit(2 + k % 5, rng));
    worst = std::max(worst, (apply_phi_modular(s, s.x(), +1) - 4.0 * s.x()).norm());
  }
  return {worst <= 1e-10, fmt("max ||phi(Delta)X - 4X|| %.3e", worst)};
}

Outcome ac6() {
  Rng rng = make_stream(106, 0);
  double worst = 0.0;
  for (int rep = 0; rep < 5; ++rep) {
    for (Eigen::Index r = 1; r <= 6; ++r) {
      for (Eigen::Index c = 1; c <= 8; ++c) {
        const ComplexMatrix x = random_unit_matrix(r, c, rng);
        const double s = von_neumann_entropy(x * x.adjoint());
        worst = std::max(worst, std::abs(von_neumann_entropy(x.adjoint() * x) - s));
        worst = std::max(worst, std::abs(von_neumann_entropy(x.transpose() * x.conjugate()) - s));
      }
    }
  }
  return {worst <= 1e-10, fmt("max entropy mismatch %.3e", worst)};
}

Outcome ac7() {
  Rng rng = make_stream(107, 0);
  double worst = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 50; ++t) {
    const Eigen::Index db = 2 + t % 5, dc = 2 + (t / 5) % 5;
    const SpectralData sb = SpectralData::from(random_positive_definite_unit(db, rng));
    const SpectralData sc = SpectralData::from(random_positive_definite_unit(dc, rng));
    worst = std::min({worst, operator_inequality_check(sb, sc, +1), operator_inequality_check(sb, sc, -1)});
  }
  return {worst >= -1e-9, fmt("min quadruple slack %.3e", worst)};
}

oracle::CriticalInstance certified_factor(int kind, Rng& rng) {
  return kind == 0 ? oracle::m3_minimum(1, rng) : oracle::m2_pure(2, rng);
}

Outcome ac8() {
  Rng rng = make_stream(108, 0);
  double decomposition = 0.0, slack = std::numeric_limits<double>::infinity();
  int certified = 0;
  for (int t = 0; t < 20; ++t) {
    const oracle::CriticalInstance b = certified_factor(t % 3 == 2, rng);
    const oracle::CriticalInstance c = certified_factor(t % 3 == 1, rng);
    const CertifiedPoint pb = certify_local_minimum(b.x, b.k);
    const CertifiedPoint pc = certify_local_minimum(c.x, c.k);
    if (pb.certificate.nondegenerate && pc.certificate.nondegenerate) ++certified;
    TensorVerifyConfig cfg;
    cfg.samples = 1000;
    cfg.mc_samples = 0;
    const TensorVerificationReport rep = verify_tensor_minimum(pb, pc, 800 + t, cfg);
    decomposition = std::max(decomposition, rep.decomposition_max_error);
    slack = std::min(slack, rep.bound_min_slack);
  }
  return {certified == 20 && decomposition <= 1e-8 && slack >= -1e-8,
          std::to_string(certified) + "/20 pairs certified, " +
              fmt2("max decomposition error %.3e, min bound slack %.3e", decomposition, slack)};
}

Outcome ac9() {
  Rng rng = make_stream(109, 0);
  bool ok = true;
  double nu_min = std::numeric_limits<double>::infinity(), prod_nu = nu_min, excess = nu_min;
  for (int t = 0; t < 3; ++t) {
    const oracle::CriticalInstance b = oracle::m3_minimum(1, rng);
    const oracle::CriticalInstance c = t == 2 ? oracle::m2_pure(2, rng) : oracle::m3_minimum(1, rng);
    const CertifiedPoint pb = certify_local_minimum(b.x, b.k);
    const CertifiedPoint pc = certify_local_minimum(c.x, c.k);
    const bool nondeg = pb.certificate.nondegenerate && pc.certificate.nondegenerate && pb.certificate.nu > 1e-6 &&
                        pc.certificate.nu > 1e-6;
    nu_min = std::min({nu_min, pb.certificate.nu, pc.certificate.nu});
    TensorVerifyConfig cfg;
    cfg.samples = 200;
    cfg.mc_samples = 10000;
    const TensorVerificationReport rep = verify_tensor_minimum(pb, pc, 900 + t, cfg);
    prod_nu = std::min(prod_nu, rep.product_nu);
    excess = std::min(excess, rep.monte_carlo.min_excess);
    ok = ok && nondeg && rep.passed && rep.product_nu > 0.0 && rep.monte_carlo.samples == 10000 &&
         rep.product_certificate.certified_radius > 0.0 && rep.monte_carlo.min_excess >= -1e-12;
  }
  return {ok, fmt("min factor nu %.3e, ", nu_min) + fmt2("min product nu %.3e, min MC excess %.3e", prod_nu, excess)};
}

Outcome ac10() {
  Rng rng = make_stream(110, 0);
  const ComplexMatrix f = default_complement(2, 3);
  double slope_err = 0.0;
  double richardson_err = 0.0, final_err = 0.0;
  for (int k = 0; k < 3; ++k) {
    const ComplexMatrix x11 = random_positive_definite_unit(2, rng);
    ComplexMatrix y22 = random_ginibre(2, 3, rng);
    y22 -= hs_inner(f, y22) / f.squaredNorm() * f;
    y22 /= y22.norm();
    ComplexMatrix y = ComplexMatrix::Zero(4, 5);
    y.bottomRightCorner(2, 3) = y22;
    std::vector<double> logs, d2;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
      logs.push_back(-std::log(eps * eps));
      d2.push_back(second_derivative_integral(epsilon_embed(x11, f, eps), y));
    }
    const double expected = 2.0 * y22.squaredNorm();
    for (int j = 0; j < 2; ++j) {
      const double slope = (d2[j + 1] - d2[j]) / (logs[j + 1] - logs[j]);
      slope_err = std::max(slope_err, std::abs(slope - expected) / expected);
    }

    ComplexMatrix y21 = random_ginibre(2, 2, rng);
    y21 /= y21.norm();
    ComplexMatrix z = ComplexMatrix::Zero(4, 5);
    z.bottomLeftCorner(2, 2) = y21;
    const double limit = -2.0 * (y21.adjoint() * y21 * support_log(x11 * x11)).trace().real();
    const std::vector<double> eps{1e-3, 1e-4, 1e-5};
    std::vector<double> err;
    for (double e : eps) {
      const ComplexMatrix xe = epsilon_embed(x11, f, e);
      err.push_back(std::abs(second_derivative_integral(xe, z) + 2.0 * entropy_of(xe) * z.squaredNorm() - limit));
    }
    final_err = std::max(final_err, err.back());
    for (int j = 0; j < 2; ++j) {
      const double predicted = std::pow(eps[j] / eps[j + 1], 2) * std::log(eps[j]) / std::log(eps[j + 1]);
      richardson_err = std::max(richardson_err, std::abs(err[j] / err[j + 1] - predicted) / predicted);
    }
  }
  double kernel = 0.0;
  for (double eps : {1e-2, 1e-3, 1e-4}) kernel = std::max(kernel, singular_kernel_check(random_positive_definite_unit(3, rng), eps));
  return {slope_err <= 0.05 && final_err <= 1e-6 && richardson_err <= 0.1 && kernel <= 1e-8,
          fmt("Y22 slope rel err %.3e, ", slope_err) + fmt2("Y21 err at 1e-5 %.3e, Richardson rel err %.3e", final_err, richardson_err) +
              fmt(", kernel vs quadrature %.3e", kernel)};
}

double max_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

Outcome ac11() {
  const CapacityReport id = holevo_capacity(identity_channel(2));
  double id_err = std::abs(id.c_holv - std::log(2.0));
  double dep_err = 0.0, residual = max_of(id.equidistance_residuals);
  bool converged = id.converged;
  for (double p : {0.25, 0.5, 0.75}) {
    const CapacityReport r = holevo_capacity(depolarizing_qubit(p));
    dep_err = std::max(dep_err, std::abs(r.c_holv - oracle::depolarizing_capacity(p)));
    residual = std::max(residual, max_of(r.equidistance_residuals));
    converged = converged && r.converged;
  }
  return {id_err <= 1e-8 && dep_err <= 1e-5 && residual < 1e-5 && converged,
          fmt2("identity err %.3e, depolarizing max err %.3e", id_err, dep_err) + fmt(", max residual %.3e", residual)};
}

Outcome ac12() {
  Rng rng = make_stream(112, 0);
  std::vector<ChannelSpec> channels{identity_channel(2), depolarizing_qubit(0.25), depolarizing_qubit(0.5)};
  for (int k = 0; k < 3; ++k) channels.push_back(oracle::random_channel(2, 2, 2, rng));
  double anchor = 0.0, margin = -std::numeric_limits<double>::infinity();
  bool violation = false;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    CapacityConfig cc;
    cc.seed = i;
    const CapacityReport cap = holevo_capacity(channels[i], cc);
    ProbeConfig pc;
    pc.seed = i;
    const SuperadditivityProbe p = superadditivity_probe(channels[i], cap, pc);
    anchor = std::max(anchor, std::abs(p.product_anchor - 2.0 * cap.c_holv));
    margin = std::max(margin, p.margin);
    violation = violation || p.violation;
  }
  return {anchor <= 1e-6 && margin <= 1e-6 && !violation,
          fmt2("max |anchor - 2C| %.3e, max margin %.3e", anchor, margin) +
              std::string(violation ? ", violation flagged" : ", no violation")};
}

}  // namespace

int main() {
  run("AC1", "phi key inequality", 10.0, ac1);
  run("AC2", "phi fixed values", 0.0, ac2);
  run("AC3", "derivative oracles", 30.0, ac3);
  run("AC4", "orthogonality identity", 0.0, ac4);
  run("AC5", "modular fixed point", 0.0, ac5);
  run("AC6", "spectrum symmetry", 0.0, ac6);
  run("AC7", "operator key inequality", 0.0, ac7);
  run("AC8", "cross-term decomposition and superadditivity bound", 120.0, ac8);
  run("AC9", "end-to-end local additivity", 0.0, ac9);
  run("AC10", "reduction asymptotics", 0.0, ac10);
  run("AC11", "Holevo capacity", 0.0, ac11);
  run("AC12", "superadditivity probe anchor", 0.0, ac12);
  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
