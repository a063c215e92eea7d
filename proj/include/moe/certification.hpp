#pragma once

// Critical points of S(X X^dagger) on the unit sphere of a subspace, the
// Hessian form on the tangent space, local minimum certificates and the
// numerical check of local additivity at tensor products.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "moe/channel.hpp"
#include "moe/entropy.hpp"
#include "moe/parallel.hpp"
#include "moe/random.hpp"
#include "moe/reduction.hpp"
#include "moe/sphere.hpp"

namespace moe {

struct CertifyConfig {
  double grad_tol = 1e-7;
  double rank_tol = kDefaultRankTol;
  double nu_tol = 1e-8;
  int tau_grid = 49;
};

/// Real orthonormal basis of the tangent space {Y in K : Tr X Y^dagger = 0}.
/// When K is closed under adjoints and X is Hermitian the basis is
/// {W_k} followed by {i W_k} with W_k Hermitian, which splits the Hessian.
struct TangentBasis {
  ComplexMatrix base;
  std::vector<ComplexMatrix> directions;
  std::vector<ComplexMatrix> w_basis;
  bool hermitian_split = false;

  std::size_t size() const { return directions.size(); }

  ComplexMatrix combine(const RealVector& coeffs) const {
    ComplexMatrix y = ComplexMatrix::Zero(base.rows(), base.cols());
    for (std::size_t a = 0; a < directions.size(); ++a) y += coeffs(static_cast<Eigen::Index>(a)) * directions[a];
    return y;
  }

  RealVector coefficients(const ComplexMatrix& y) const {
    RealVector c(static_cast<Eigen::Index>(directions.size()));
    for (std::size_t a = 0; a < directions.size(); ++a) c(static_cast<Eigen::Index>(a)) = hs_inner(directions[a], y).real();
    return c;
  }
};

/// Orthonormal basis under Re <A, B> of the real span of `spanning`.
inline std::vector<ComplexMatrix> real_orthonormalize(std::span<const ComplexMatrix> spanning, Eigen::Index rows,
                                                      Eigen::Index cols, double drop_tol = 1e-10) {
  std::vector<ComplexMatrix> out;
  if (spanning.empty()) return out;
  const Eigen::Index n = rows * cols;
  RealMatrix stacked(2 * n, static_cast<Eigen::Index>(spanning.size()));
  for (std::size_t k = 0; k < spanning.size(); ++k) {
    Eigen::Map<const ComplexVector> v(spanning[k].data(), n);
    stacked.col(static_cast<Eigen::Index>(k)) << v.real(), v.imag();
  }
  Eigen::JacobiSVD<RealMatrix> svd(stacked, Eigen::ComputeThinU);
  const RealVector& s = svd.singularValues();
  const double top = s.size() ? s(0) : 0.0;
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    if (top <= 0.0 || s(k) <= drop_tol * std::max(top, 1.0)) break;
    ComplexMatrix m(rows, cols);
    Eigen::Map<ComplexVector> v(m.data(), n);
    v.real() = svd.matrixU().col(k).head(n);
    v.imag() = svd.matrixU().col(k).tail(n);
    out.push_back(std::move(m));
  }
  return out;
}

inline TangentBasis general_tangent_basis(const ComplexMatrix& x, const MatrixSubspace& k) {
  TangentBasis tb;
  tb.base = x;
  const ComplexMatrix xn = x / x.norm();
  std::vector<ComplexMatrix> spanning;
  for (const auto& b : k.basis()) spanning.push_back(b - hs_inner(xn, b) * xn);
  const std::vector<ComplexMatrix> t = orthonormalize(spanning, k.rows(), k.cols(), 1e-9);
  for (const auto& m : t) tb.directions.push_back(m);
  for (const auto& m : t) tb.directions.push_back(Complex(0.0, 1.0) * m);
  return tb;
}

inline TangentBasis make_tangent_basis(const ComplexMatrix& x, const MatrixSubspace& k, double tol = 1e-10) {
  if (x.rows() != k.rows() || x.cols() != k.cols()) throw DimensionError("make_tangent_basis: shape mismatch");
  if (!(x.rows() == x.cols() && is_hermitian(x, tol) && k.closed_under_adjoint(1e-9))) {
    return general_tangent_basis(x, k);
  }
  TangentBasis tb;
  tb.base = x;
  tb.hermitian_split = true;
  const ComplexMatrix xn = hermitian_part(x) / x.norm();
  const Complex i(0.0, 1.0);
  std::vector<ComplexMatrix> spanning;
  for (const auto& b : k.basis()) {
    for (const ComplexMatrix& h : {ComplexMatrix((b + b.adjoint()) * 0.5), ComplexMatrix(i * (b - b.adjoint()) * 0.5)}) {
      spanning.push_back(h - hs_inner(xn, h).real() * xn);
    }
  }
  tb.w_basis = real_orthonormalize(spanning, k.rows(), k.cols(), 1e-9);
  for (auto& w : tb.w_basis) w = hermitian_part(w);
  for (const auto& w : tb.w_basis) tb.directions.push_back(w);
  for (const auto& w : tb.w_basis) tb.directions.push_back(i * w);
  return tb;
}

struct HessianForm {
  RealMatrix matrix;   // in the order of TangentBasis::directions
  RealMatrix h_plus;   // Hermitian split only
  RealMatrix h_minus;  // Hermitian split only
  bool split = false;
  double nu = std::numeric_limits<double>::infinity();
  double symmetry_defect = 0.0;
};

inline double smallest_eigenvalue(const RealMatrix& h) {
  if (h.rows() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(0.5 * (h + h.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

/// H_+-(W) = -2 S(X^2) W - 2 W log X^2 - phi(+-Delta_X)(W).
inline ComplexMatrix apply_hessian_block(const SpectralData& s, const ComplexMatrix& w, int sign) {
  return -2.0 * s.entropy * w - 2.0 * w * s.log_x_squared() - apply_phi_modular(s, w, sign);
}

template <class Form>
HessianForm hessian_from_form(const Form& form, const std::vector<ComplexMatrix>& directions) {
  HessianForm h;
  h.matrix = bilinear_matrix(form, directions);
  h.nu = smallest_eigenvalue(h.matrix);
  return h;
}

/// Entropy Hessian at X > 0. In the Hermitian split the blocks come from the
/// modular operators H_+ and H_-; otherwise from the bilinear D_2 form.
inline HessianForm assemble_hessian(const SpectralData& s, const TangentBasis& tb,
                                    double pd_tol = kPositiveDefiniteTol) {
  if (!tb.hermitian_split) return hessian_from_form(SecondDerivativeForm(tb.base, pd_tol), tb.directions);
  HessianForm h;
  h.split = true;
  const auto m = static_cast<Eigen::Index>(tb.w_basis.size());
  h.h_plus.resize(m, m);
  h.h_minus.resize(m, m);
  std::vector<ComplexMatrix> hp, hm;
  for (const auto& w : tb.w_basis) {
    hp.push_back(apply_hessian_block(s, w, +1));
    hm.push_back(apply_hessian_block(s, w, -1));
  }
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) {
      h.h_plus(a, b) = hs_inner(tb.w_basis[static_cast<std::size_t>(a)], hp[static_cast<std::size_t>(b)]).real();
      h.h_minus(a, b) = hs_inner(tb.w_basis[static_cast<std::size_t>(a)], hm[static_cast<std::size_t>(b)]).real();
    }
  }
  h.symmetry_defect = std::max((h.h_plus - h.h_plus.transpose()).norm(), (h.h_minus - h.h_minus.transpose()).norm());
  h.matrix = RealMatrix::Zero(2 * m, 2 * m);
  h.matrix.topLeftCorner(m, m) = h.h_plus;
  h.matrix.bottomRightCorner(m, m) = h.h_minus;
  h.nu = std::min(smallest_eigenvalue(h.h_plus), smallest_eigenvalue(h.h_minus));
  return h;
}

struct CriticalityReport {
  bool critical = false;
  double gradient_norm = 0.0;
  double max_abs_d1 = 0.0;
};

inline CriticalityReport criticality_from_gradient(const ComplexMatrix& grad, const TangentBasis& tb, double tol) {
  CriticalityReport r;
  double sq = 0.0;
  for (const auto& d : tb.directions) {
    const double d1 = hs_inner(grad, d).real();
    sq += d1 * d1;
    r.max_abs_d1 = std::max(r.max_abs_d1, std::abs(d1));
  }
  r.gradient_norm = std::sqrt(sq);
  r.critical = r.max_abs_d1 < tol;
  return r;
}

/// max |D_1[X, Y]| over the tangent basis of K at X.
inline CriticalityReport is_critical_point(const ComplexMatrix& x, const MatrixSubspace& k, double tol = 1e-7) {
  return criticality_from_gradient(entropy_gradient(x), general_tangent_basis(x, k), tol);
}

struct MinimumCertificate {
  bool is_critical = false;
  double gradient_norm = 0.0;
  double nu = 0.0;
  std::optional<double> r_bound;
  std::optional<double> tau;
  double certified_radius = 0.0;
  bool nondegenerate = false;
  Eigen::Index rank = 0;
  Eigen::Index tangent_dim = 0;
  double grad_tol = 0.0;
  double rank_tol = 0.0;
  double nu_tol = 0.0;
  std::string note;
};

/// A certificate together with the frame it was computed in: the point and
/// subspace after reduction, tangent basis and Hessian.
struct CertifiedPoint {
  MinimumCertificate certificate;
  ComplexMatrix x;
  MatrixSubspace k;
  TangentBasis tangent;
  HessianForm hessian;
  std::optional<ReducedProblem> reduced;
};

namespace detail {

/// Radius search: maximize min(tau, 3 nu / R(tau)) over a grid of fractions
/// of the largest tau for which positivity is guaranteed.
inline void attach_radius(MinimumCertificate& c, const ComplexMatrix& x, const CertifyConfig& cfg,
                          double extra_b3_weight) {
  const HermitianEigen left = eigh(x * x.adjoint());
  const HermitianEigen right = eigh(x.adjoint() * x);
  const bool use_left = left.min_value() > kPositiveDefiniteTol * left.max_value();
  const HermitianEigen& gram = use_left ? left : right;
  const double lambda = gram.min_value();
  const double sigma = std::sqrt(std::max(gram.max_value(), 0.0));
  const double limit = uniform_tau_limit(lambda, sigma);
  if (!(limit > 0.0)) {
    c.note += "positivity radius is zero; ";
    return;
  }
  double best = -1.0;
  for (int k = 1; k <= cfg.tau_grid; ++k) {
    const double tau = std::min(limit * k / (cfg.tau_grid + 1.0), 0.999);
    ThirdDerivativeBound b;
    try {
      b = uniform_third_derivative_bound(lambda, sigma, gram.dimension(), tau);
    } catch (const CertifyRadiusError&) {
      continue;
    }
    const double r = b.r + b.b3 * extra_b3_weight;
    const double radius = std::min(tau, 3.0 * c.nu / r);
    if (radius > best) {
      best = radius;
      c.tau = tau;
      c.r_bound = r;
    }
  }
  if (best < 0.0) c.note += "positivity radius is zero; ";
  c.certified_radius = std::max(best, 0.0);
}

}  // namespace detail

inline MinimumCertificate finish_certificate(const CriticalityReport& crit, const HessianForm& h, const ComplexMatrix& x,
                                             Eigen::Index rank, std::size_t tangent_dim, const CertifyConfig& cfg,
                                             double extra_b3_weight = 0.0) {
  MinimumCertificate c;
  c.is_critical = crit.critical;
  c.gradient_norm = crit.gradient_norm;
  c.nu = h.nu;
  c.rank = rank;
  c.tangent_dim = static_cast<Eigen::Index>(tangent_dim);
  c.grad_tol = cfg.grad_tol;
  c.rank_tol = cfg.rank_tol;
  c.nu_tol = cfg.nu_tol;
  if (!crit.critical) c.note += "not critical within grad_tol; ";
  c.nondegenerate = crit.critical && h.nu > cfg.nu_tol;
  if (crit.critical && !c.nondegenerate) c.note += "degenerate within nu_tol; ";
  if (c.nondegenerate) detail::attach_radius(c, x, cfg, extra_b3_weight);
  if (!c.nondegenerate) c.certified_radius = 0.0;
  return c;
}

/// Reduction, criticality, Hessian and third derivative bound in sequence.
/// A point of rank min(d_B, d_E) is certified on K itself. Only a point
/// where both Grams are singular is moved to the reduced frame, and then the
/// certificate covers the directions of P_B K P_E only.
inline CertifiedPoint certify_local_minimum(const ComplexMatrix& x, const MatrixSubspace& k, const CertifyConfig& cfg = {}) {
  CertifiedPoint out;
  out.reduced = reduce_to_positive_definite(x, k, cfg.rank_tol);
  const bool full_rank = out.reduced->rank() == std::min(x.rows(), x.cols());
  out.x = full_rank ? x : out.reduced->x_pd;
  out.k = full_rank ? k : out.reduced->k_b;
  out.tangent = make_tangent_basis(out.x, out.k);
  // the rank decision keeps singular values above rank_tol, so the Gram above its square
  const double pd_tol = std::min(kPositiveDefiniteTol, 0.5 * cfg.rank_tol * cfg.rank_tol);
  out.hessian = out.tangent.hermitian_split ? assemble_hessian(SpectralData::from(out.x, pd_tol), out.tangent, pd_tol)
                                            : hessian_from_form(SecondDerivativeForm(out.x, pd_tol), out.tangent.directions);
  const CriticalityReport crit = criticality_from_gradient(entropy_gradient(out.x), out.tangent, cfg.grad_tol);
  out.certificate = finish_certificate(crit, out.hessian, out.x, out.reduced->rank(), out.tangent.size(), cfg);
  if (!full_rank) out.certificate.note += "reduced frame; ";
  return out;
}

/// Certificate for a generic phase invariant objective, in the given frame
/// (no reduction). `extra_b3_weight` adds B_3 * weight to R for objectives whose
/// third derivative carries a linear term Tr rho''' M with |M| <= weight.
template <SphereObjective O>
CertifiedPoint certify_with_objective(const ComplexMatrix& x, const MatrixSubspace& k, const O& obj,
                                      const CertifyConfig& cfg = {}, double extra_b3_weight = 0.0) {
  CertifiedPoint out;
  out.x = x;
  out.k = k;
  out.tangent = general_tangent_basis(x, k);
  out.hessian = hessian_from_form(obj.curvature_at(x), out.tangent.directions);
  const CriticalityReport crit = criticality_from_gradient(obj.gradient(x), out.tangent, cfg.grad_tol);
  const Eigen::Index rank = full_svd(x, cfg.rank_tol).rank;
  out.certificate = finish_certificate(crit, out.hessian, x, rank, out.tangent.size(), cfg, extra_b3_weight);
  return out;
}

struct LocalMinimum {
  ComplexMatrix x;
  double value = 0.0;
  double grad_norm = 0.0;
  bool converged = false;
  std::size_t start = 0;
  std::vector<double> start_values;
};

/// Multi-start Riemannian descent of S(X X^dagger) over the unit sphere of K.
inline LocalMinimum find_local_minimum(const MatrixSubspace& k, std::uint64_t seed, const MultiStartConfig& cfg = {}) {
  if (k.dim() == 0) throw DimensionError("find_local_minimum: empty subspace");
  const MultiStartResult r = multistart_minimize(k, EntropyObjective{}, seed, cfg);
  LocalMinimum out{r.best.x, r.best.value, r.best.grad_norm, r.best.converged, r.best_start, {}};
  for (const auto& run : r.runs) out.start_values.push_back(run.value);
  return out;
}

struct MonteCarloReport {
  std::size_t samples = 0;
  double min_excess = std::numeric_limits<double>::infinity();  // min S(X(t)) - S(X)
  double worst_t = 0.0;
  bool passed = true;
};

/// Samples unit tangent directions and t in [-radius, radius] and records the
/// smallest objective increase.
template <SphereObjective O>
MonteCarloReport monte_carlo_check(const CertifiedPoint& p, const O& obj, std::size_t samples, std::uint64_t seed,
                                   unsigned threads = 1, double tol = 1e-12) {
  MonteCarloReport rep;
  if (p.tangent.size() == 0 || samples == 0 || !(p.certificate.certified_radius > 0.0)) return rep;
  rep.samples = samples;
  const double base = obj.value(p.x);
  const double radius = p.certificate.certified_radius;
  std::vector<double> excess(samples), ts(samples);
  parallel_for(samples, threads, [&](std::size_t i) {
    Rng rng = make_stream(seed, i);
    std::normal_distribution<double> n(0.0, 1.0);
    RealVector c(static_cast<Eigen::Index>(p.tangent.size()));
    for (Eigen::Index a = 0; a < c.size(); ++a) c(a) = n(rng);
    c.normalize();
    std::uniform_real_distribution<double> u(-radius, radius);
    const double t = u(rng);
    const ComplexMatrix y = p.tangent.combine(c);
    excess[i] = obj.value(path_point(p.x / p.x.norm(), y, t)) - base;
    ts[i] = t;
  });
  for (std::size_t i = 0; i < samples; ++i) {
    if (excess[i] < rep.min_excess) {
      rep.min_excess = excess[i];
      rep.worst_t = ts[i];
    }
  }
  rep.passed = rep.min_excess >= -tol;
  return rep;
}

inline MonteCarloReport monte_carlo_check(const CertifiedPoint& p, std::size_t samples, std::uint64_t seed,
                                          unsigned threads = 1, double tol = 1e-12) {
  return monte_carlo_check(p, EntropyObjective{}, samples, seed, threads, tol);
}

/// Y_BC = u1 X_B (x) Y_C^0 + u2 Y_B^0 (x) X_C + eta sum_j xi_j Y_B^j (x) Y_C^j.
struct ProductPerturbationDecomposition {
  Complex u1, u2, eta;
  ComplexMatrix x_b, x_c;
  ComplexMatrix y_b0, y_c0;
  std::vector<double> xis;
  std::vector<std::pair<ComplexMatrix, ComplexMatrix>> t_bc_factors;

  ComplexMatrix t_bc() const {
    ComplexMatrix t = ComplexMatrix::Zero(x_b.rows() * x_c.rows(), x_b.cols() * x_c.cols());
    for (std::size_t j = 0; j < xis.size(); ++j) t += xis[j] * kron(t_bc_factors[j].first, t_bc_factors[j].second);
    return t;
  }

  ComplexMatrix reassemble() const { return u1 * kron(x_b, y_c0) + u2 * kron(y_b0, x_c) + eta * t_bc(); }
};

namespace detail {

/// {X, e_1, ..., e_m}: orthonormal basis of K whose first element is X.
inline std::vector<ComplexMatrix> basis_starting_with(const ComplexMatrix& x, const MatrixSubspace& k) {
  std::vector<ComplexMatrix> spanning;
  for (const auto& b : k.basis()) spanning.push_back(b - hs_inner(x, b) * x);
  std::vector<ComplexMatrix> out{x};
  for (auto& m : orthonormalize(spanning, k.rows(), k.cols(), 1e-9)) out.push_back(std::move(m));
  return out;
}

inline ComplexMatrix combine(const std::vector<ComplexMatrix>& basis, const ComplexVector& c, std::size_t offset) {
  ComplexMatrix y = ComplexMatrix::Zero(basis.front().rows(), basis.front().cols());
  for (Eigen::Index a = 0; a < c.size(); ++a) y += c(a) * basis[offset + static_cast<std::size_t>(a)];
  return y;
}

inline void fix_leading_phase(ComplexMatrix& a, ComplexMatrix& b) {
  const double top = a.cwiseAbs().maxCoeff();
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const Complex v = a(i, j);
      if (std::abs(v) > 1e-12 * top) {
        const Complex p = std::conj(v) / std::abs(v);
        a *= p;
        b *= std::conj(p);
        return;
      }
    }
  }
}

}  // namespace detail

inline ProductPerturbationDecomposition decompose_product_perturbation(const ComplexMatrix& y_bc, const ComplexMatrix& x_b,
                                                                       const ComplexMatrix& x_c, const MatrixSubspace& k_b,
                                                                       const MatrixSubspace& k_c, double tol = 1e-8) {
  const std::vector<ComplexMatrix> eb = detail::basis_starting_with(x_b / x_b.norm(), k_b);
  const std::vector<ComplexMatrix> ec = detail::basis_starting_with(x_c / x_c.norm(), k_c);
  const auto nb = static_cast<Eigen::Index>(eb.size());
  const auto nc = static_cast<Eigen::Index>(ec.size());
  if (y_bc.rows() != k_b.rows() * k_c.rows() || y_bc.cols() != k_b.cols() * k_c.cols()) {
    throw DimensionError("decompose_product_perturbation: Y_BC has wrong shape");
  }
  ComplexMatrix c(nb, nc);
  ComplexMatrix rebuilt = ComplexMatrix::Zero(y_bc.rows(), y_bc.cols());
  for (Eigen::Index a = 0; a < nb; ++a) {
    for (Eigen::Index b = 0; b < nc; ++b) {
      const ComplexMatrix e = kron(eb[static_cast<std::size_t>(a)], ec[static_cast<std::size_t>(b)]);
      c(a, b) = hs_inner(e, y_bc);
      rebuilt += c(a, b) * e;
    }
  }
  const double residual = (rebuilt - y_bc).norm();
  if (residual > tol) throw MembershipError("decompose_product_perturbation: Y_BC is not in K_B (x) K_C", residual);
  if (std::abs(c(0, 0)) > tol) {
    throw ValidationError("decompose_product_perturbation: Y_BC is not orthogonal to X_B (x) X_C", std::abs(c(0, 0)));
  }
  ProductPerturbationDecomposition d;
  d.x_b = eb.front();
  d.x_c = ec.front();
  const ComplexVector row = c.row(0).tail(nc - 1).transpose();
  const ComplexVector col = c.col(0).tail(nb - 1);
  const double n1 = row.norm();
  const double n2 = col.norm();
  d.u1 = n1;
  d.u2 = n2;
  d.y_c0 = n1 > 0.0 ? ComplexMatrix(detail::combine(ec, row / n1, 1)) : ComplexMatrix::Zero(x_c.rows(), x_c.cols());
  d.y_b0 = n2 > 0.0 ? ComplexMatrix(detail::combine(eb, col / n2, 1)) : ComplexMatrix::Zero(x_b.rows(), x_b.cols());
  const ComplexMatrix rest = c.bottomRightCorner(nb - 1, nc - 1);
  const double eta = rest.norm();
  d.eta = eta;
  if (eta > 0.0) {
    Eigen::JacobiSVD<ComplexMatrix> svd(rest / eta, Eigen::ComputeThinU | Eigen::ComputeThinV);
    for (Eigen::Index j = 0; j < svd.singularValues().size(); ++j) {
      ComplexMatrix yb = detail::combine(eb, svd.matrixU().col(j), 1);
      ComplexMatrix yc = detail::combine(ec, svd.matrixV().col(j).conjugate(), 1);
      detail::fix_leading_phase(yb, yc);
      d.xis.push_back(svd.singularValues()(j));
      d.t_bc_factors.emplace_back(std::move(yb), std::move(yc));
    }
  }
  return d;
}

struct TensorCounterexample {
  ComplexMatrix y_bc;
  double d1 = 0.0;
  double d2_direct = 0.0;
  double d2_decomposed = 0.0;
  double lower_bound = 0.0;
  std::string failed_check;
};

struct TensorVerificationReport {
  std::size_t samples = 0;
  double d1_max = 0.0;
  double decomposition_max_error = 0.0;
  double bound_min_slack = std::numeric_limits<double>::infinity();
  double strict_min_margin = std::numeric_limits<double>::infinity();
  double nu_b = 0.0, nu_c = 0.0;
  double product_nu = 0.0;
  MinimumCertificate product_certificate;
  MonteCarloReport monte_carlo;
  bool passed = false;
  std::optional<TensorCounterexample> counterexample;
};

struct TensorVerifyConfig {
  std::size_t samples = 1000;
  std::size_t mc_samples = 10000;
  double d1_tol = 1e-9;
  double decomposition_tol = 1e-8;
  double bound_tol = 1e-8;
  double strict_rel = 1e-6;
  unsigned threads = 1;
  CertifyConfig certify;
};

/// Unit vector of K orthogonal to x, from a Gaussian coefficient draw.
inline ComplexMatrix random_tangent(const ComplexMatrix& x, const MatrixSubspace& k, Rng& rng) {
  for (int attempt = 0; attempt < 16; ++attempt) {
    ComplexMatrix y = k.combine(random_unit_vector(k.dim(), rng));
    y -= hs_inner(x, y) * x;
    const double n = y.norm();
    if (n > 1e-8) return y / n;
  }
  throw DegenerateInputError("random_tangent: subspace has no tangent directions");
}

/// Numerical local additivity at a product of two certified points, for
/// objectives whose curvature splits across tensor factors.
template <class FormB, class FormC, class FormP, class CertifyProduct, class ProductObjective>
TensorVerificationReport verify_tensor_generic(const CertifiedPoint& pb, const CertifiedPoint& pc, const FormB& form_b,
                                               const FormC& form_c, const FormP& form_p,
                                               const ComplexMatrix& product_gradient, CertifyProduct&& certify_product,
                                               const ProductObjective& product_objective, std::uint64_t seed,
                                               const TensorVerifyConfig& cfg) {
  TensorVerificationReport rep;
  rep.nu_b = pb.certificate.nu;
  rep.nu_c = pc.certificate.nu;
  const ComplexMatrix xb = pb.x / pb.x.norm();
  const ComplexMatrix xc = pc.x / pc.x.norm();
  const ComplexMatrix x = kron(xb, xc);
  const MatrixSubspace k = tensor_subspace(pb.k, pc.k);
  const bool both_nondegenerate = pb.certificate.nondegenerate && pc.certificate.nondegenerate;
  const double nu_min = std::min(rep.nu_b, rep.nu_c);

  struct Sample {
    double d1 = 0, decomposition_err = 0, slack = 0, margin = 0, direct = 0, decomposed = 0, bound = 0;
    ComplexMatrix y;
  };
  // a product of two trivial problems has no perturbations to sample
  const std::size_t samples = k.dim() > 1 ? cfg.samples : 0;
  rep.samples = samples;
  std::vector<Sample> out(samples);
  parallel_for(samples, cfg.threads, [&](std::size_t i) {
    Rng rng = make_stream(seed, i);
    Sample s;
    s.y = random_tangent(x, k, rng);
    const ProductPerturbationDecomposition d = decompose_product_perturbation(s.y, xb, xc, pb.k, pc.k);
    s.d1 = std::abs(hs_inner(product_gradient, s.y).real());
    s.direct = form_p(s.y, s.y);
    const double a1 = std::norm(d.u1), a2 = std::norm(d.u2), ae = std::norm(d.eta);
    const double dc0 = a1 > 0 ? form_c(d.y_c0, d.y_c0) : 0.0;
    const double db0 = a2 > 0 ? form_b(d.y_b0, d.y_b0) : 0.0;
    const ComplexMatrix t = d.t_bc();
    const double dt = ae > 0 ? form_p(t, t) : 0.0;
    s.decomposed = a1 * dc0 + a2 * db0 + ae * dt;
    double pair_sum = 0.0;
    const Complex i1(0.0, 1.0);
    for (std::size_t j = 0; j < d.xis.size(); ++j) {
      const auto& [yb, yc] = d.t_bc_factors[j];
      const ComplexMatrix iyb = i1 * yb, iyc = i1 * yc;
      pair_sum += d.xis[j] * d.xis[j] * (form_b(yb, yb) + form_b(iyb, iyb) + form_c(yc, yc) + form_c(iyc, iyc));
    }
    s.bound = a1 * dc0 + a2 * db0 + ae * 0.5 * pair_sum;
    s.decomposition_err = std::abs(s.direct - s.decomposed);
    s.slack = s.direct - s.bound;
    s.margin = s.direct - nu_min * (1.0 - cfg.strict_rel);
    out[i] = std::move(s);
  });

  bool ok = true;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const Sample& s = out[i];
    rep.d1_max = std::max(rep.d1_max, s.d1);
    rep.decomposition_max_error = std::max(rep.decomposition_max_error, s.decomposition_err);
    rep.bound_min_slack = std::min(rep.bound_min_slack, s.slack);
    if (both_nondegenerate && std::isfinite(nu_min)) rep.strict_min_margin = std::min(rep.strict_min_margin, s.margin);
    std::string failed;
    if (s.d1 > cfg.d1_tol) failed = "first derivative";
    else if (s.decomposition_err > cfg.decomposition_tol * std::max(1.0, std::abs(s.direct)))
      failed = "cross-term decomposition";
    else if (s.slack < -cfg.bound_tol) failed = "superadditivity bound";
    else if (both_nondegenerate && std::isfinite(nu_min) && s.margin < 0.0) failed = "strict positivity";
    if (!failed.empty() && ok) {
      ok = false;
      rep.counterexample = TensorCounterexample{s.y, s.d1, s.direct, s.decomposed, s.bound, failed};
    }
  }
  const CertifiedPoint prod = certify_product(x, k);
  rep.product_certificate = prod.certificate;
  rep.product_nu = prod.certificate.nu;
  if (cfg.mc_samples > 0 && prod.certificate.certified_radius > 0.0) {
    rep.monte_carlo = monte_carlo_check(prod, product_objective, cfg.mc_samples, seed ^ 0x9e3779b97f4a7c15ULL, cfg.threads);
  }
  if (both_nondegenerate && !(rep.product_nu > 0.0)) ok = false;
  if (!rep.monte_carlo.passed) ok = false;
  rep.passed = ok;
  return rep;
}

/// Local additivity of minimum output entropy at X_B (x) X_C, checked in the
/// frames of both certificates.
inline TensorVerificationReport verify_tensor_minimum(const CertifiedPoint& pb, const CertifiedPoint& pc,
                                                      std::uint64_t seed, const TensorVerifyConfig& cfg = {}) {
  const ComplexMatrix x = kron(pb.x / pb.x.norm(), pc.x / pc.x.norm());
  const SecondDerivativeForm fb(pb.x / pb.x.norm());
  const SecondDerivativeForm fc(pc.x / pc.x.norm());
  const SecondDerivativeForm fp(x);
  return verify_tensor_generic(
      pb, pc, fb, fc, fp, entropy_gradient(x),
      [&](const ComplexMatrix& xp, const MatrixSubspace& kp) { return certify_local_minimum(xp, kp, cfg.certify); },
      EntropyObjective{}, seed, cfg);
}

/// min over (i, j, k, l) of phi((b_i/b_j)^2) + phi((c_k/c_l)^2) - 2 phi(+-(b_i/b_j)(c_k/c_l)).
inline double operator_inequality_check(const SpectralData& sb, const SpectralData& sc, int sign) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < sb.dim(); ++i) {
    for (Eigen::Index j = 0; j < sb.dim(); ++j) {
      const double rb = sb.x_eigs(i) / sb.x_eigs(j);
      const double pb = i == j ? 4.0 : phi(rb * rb);
      for (Eigen::Index k = 0; k < sc.dim(); ++k) {
        for (Eigen::Index l = 0; l < sc.dim(); ++l) {
          const double rc = sc.x_eigs(k) / sc.x_eigs(l);
          const double pc = k == l ? 4.0 : phi(rc * rc);
          const double cross = (i == j && k == l) ? (sign > 0 ? 4.0 : 0.0) : phi(sign * rb * rc);
          best = std::min(best, pb + pc - 2.0 * cross);
        }
      }
    }
  }
  return best;
}

}  // namespace moe
