#pragma once

// Relative entropy to a fixed reference, its derivatives along channel
// paths, the Holevo capacity by the max-min characterization and the
// superadditivity probe on two copies of a channel.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "moe/certification.hpp"
#include "moe/channel.hpp"
#include "moe/entropy.hpp"
#include "moe/parallel.hpp"
#include "moe/random.hpp"
#include "moe/sphere.hpp"

namespace moe {

/// H(rho, omega) = Tr rho (log rho - log omega), clamped at zero.
inline double relative_entropy(const ComplexMatrix& rho, const ComplexMatrix& omega,
                               double support_tol = kDefaultSupportTol) {
  require_same_shape(rho, omega, "relative_entropy");
  require_square(rho, "relative_entropy");
  const HermitianEigen w = eigh(omega);
  const double cut = support_cutoff(w, support_tol);
  double leaked = 0.0;
  for (Eigen::Index k = 0; k < w.dimension(); ++k) {
    if (w.values(k) <= cut) leaked += (w.vectors.col(k).adjoint() * rho * w.vectors.col(k))(0, 0).real();
  }
  if (leaked > support_tol) throw SupportError("relative_entropy: ker omega is not contained in ker rho", leaked);
  const double h = -von_neumann_entropy(rho, support_tol) - (rho * support_log(w, support_tol)).trace().real();
  return std::max(h, 0.0);
}

struct RelentDerivatives {
  double d1 = 0.0;
  double d2 = 0.0;
};

/// First and second t-derivatives of H(X(t) X(t)^dagger, omega) at t = 0.
inline RelentDerivatives relent_derivatives(const Perturbation& p, const ComplexMatrix& omega) {
  const HermitianEigen w = eigh(omega);
  require_positive_definite(w, kPositiveDefiniteTol, "relent_derivatives");
  const ComplexMatrix log_omega = support_log(w);
  const PathDerivatives pd = path_derivatives(p.x, p.y, 0.0);
  const double s = p.scale;
  RelentDerivatives r;
  r.d1 = -first_derivative(p) - s * (pd.first * log_omega).trace().real();
  r.d2 = -second_derivative_integral(p) - s * s * (pd.second * log_omega).trace().real();
  return r;
}

/// Same along the channel path psi(t) = sqrt(1 - t^2) psi + t phi, phi a unit
/// input direction orthogonal to psi.
inline RelentDerivatives relent_derivatives(const ChannelSpec& channel, const ComplexVector& psi,
                                            const ComplexVector& phi, const ComplexMatrix& omega, double scale = 1.0) {
  return relent_derivatives(Perturbation::make(channel.output_matrix(psi), channel.output_matrix(phi), scale), omega);
}

inline double spectral_norm_hermitian(const ComplexMatrix& h) {
  const HermitianEigen e = eigh(h);
  return std::max(std::abs(e.min_value()), std::abs(e.max_value()));
}

/// Certificate that pure input psi is a local maximum of H(Phi(psi psi^dagger), omega).
/// The sign convention is that of the minimized objective -H: nu > 0 means a
/// strict local maximum of H.
inline CertifiedPoint certify_relent_maximum(const ChannelSpec& channel, const ComplexMatrix& omega,
                                             const ComplexVector& psi, const CertifyConfig& cfg = {}) {
  if (omega.rows() != channel.d_out) throw DimensionError("certify_relent_maximum: reference has wrong shape");
  const HermitianEigen w = eigh(omega);
  require_positive_definite(w, kPositiveDefiniteTol, "certify_relent_maximum");
  const double n = psi.norm();
  if (std::abs(n - 1.0) > 1e-8) throw NormalizationError("certify_relent_maximum: input is not a unit vector");
  const RelentObjective obj{support_log(w)};
  return certify_with_objective(channel.output_matrix(psi), subspace_from_channel(channel), obj, cfg,
                                spectral_norm_hermitian(obj.log_omega));
}

/// Local additivity of the relative entropy maximum at a product of two
/// certified maxima with product reference.
inline TensorVerificationReport verify_tensor_maximum(const CertifiedPoint& pb, const CertifiedPoint& pc,
                                                      const ComplexMatrix& log_omega_b, const ComplexMatrix& log_omega_c,
                                                      std::uint64_t seed, const TensorVerifyConfig& cfg = {}) {
  const ComplexMatrix xb = pb.x / pb.x.norm();
  const ComplexMatrix xc = pc.x / pc.x.norm();
  const ComplexMatrix x = kron(xb, xc);
  const RelentObjective ob{log_omega_b};
  const RelentObjective oc{log_omega_c};
  const RelentObjective op{kron(log_omega_b, ComplexMatrix::Identity(log_omega_c.rows(), log_omega_c.cols())) +
                           kron(ComplexMatrix::Identity(log_omega_b.rows(), log_omega_b.cols()), log_omega_c)};
  const double weight = spectral_norm_hermitian(op.log_omega);
  return verify_tensor_generic(
      pb, pc, ob.curvature_at(xb), oc.curvature_at(xc), op.curvature_at(x), op.gradient(x),
      [&](const ComplexMatrix& xp, const MatrixSubspace& kp) {
        return certify_with_objective(xp, kp, op, cfg.certify, weight);
      },
      op, seed, cfg);
}

struct Ensemble {
  std::vector<double> probabilities;
  std::vector<ComplexVector> pure_states;

  std::size_t size() const { return probabilities.size(); }

  ComplexMatrix average() const {
    ComplexMatrix r = ComplexMatrix::Zero(pure_states.front().size(), pure_states.front().size());
    for (std::size_t j = 0; j < size(); ++j) r += probabilities[j] * pure_state(pure_states[j]);
    return r;
  }
};

struct CapacityConfig {
  std::uint64_t seed = 0;
  int starts = 8;
  unsigned threads = 1;
  int max_outer = 300;
  int ba_iterations = 2000;
  double damping = 0.5;
  double outer_tol = 1e-10;
  double gap_tol = 1e-7;
  double weight_floor = 1e-12;
  double same_state_tol = 1e-10;
  double add_tol = 1e-12;  // a new state must beat the current chi by this much
  SphereConfig sphere;
};

struct CapacityReport {
  double c_holv = 0.0;
  double lower_bound = 0.0;  // chi of the extracted ensemble
  double upper_bound = std::numeric_limits<double>::infinity();  // min over visited gamma of max_psi H
  ComplexMatrix rho_avg;
  ComplexMatrix output_avg;
  Ensemble ensemble;
  std::vector<double> equidistance_residuals;
  int iterations = 0;
  bool converged = false;
  std::uint64_t seed = 0;

  double gap() const { return upper_bound - lower_bound; }
};

namespace detail {

inline ComplexMatrix reference_log(const ChannelSpec& ch, const ComplexMatrix& gamma) {
  return support_log(apply_channel(ch, gamma), 1e-13);
}

/// H(Phi(psi psi^dagger), omega) for each ensemble state.
inline std::vector<double> divergences(const ChannelSpec& ch, const Ensemble& e, const ComplexMatrix& log_omega) {
  const RelentObjective obj{log_omega};
  std::vector<double> d(e.size());
  for (std::size_t j = 0; j < e.size(); ++j) d[j] = -obj.value(ch.output_matrix(e.pure_states[j]));
  return d;
}

inline double chi_of(const std::vector<double>& p, const std::vector<double>& d) {
  double c = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) c += p[j] * d[j];
  return c;
}

/// Reweights pi_j by exp(D_j) until the divergences equalize on the support.
inline void blahut_arimoto(const ChannelSpec& ch, Ensemble& e, int iterations) {
  for (int it = 0; it < iterations; ++it) {
    const std::vector<double> d = divergences(ch, e, reference_log(ch, e.average()));
    const double top = *std::max_element(d.begin(), d.end());
    double z = 0.0;
    for (std::size_t j = 0; j < e.size(); ++j) {
      e.probabilities[j] *= std::exp(d[j] - top);
      z += e.probabilities[j];
    }
    for (auto& p : e.probabilities) p /= z;
    double spread = 0.0;
    const double c = chi_of(e.probabilities, d);
    for (std::size_t j = 0; j < e.size(); ++j) {
      if (e.probabilities[j] > 1e-9) spread = std::max(spread, std::abs(d[j] - c));
    }
    if (spread < 1e-13) break;
  }
}

inline void prune(Ensemble& e, double floor, std::size_t cap) {
  std::vector<std::size_t> order(e.size());
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return e.probabilities[a] > e.probabilities[b]; });
  Ensemble kept;
  for (std::size_t j : order) {
    if (kept.size() >= cap || e.probabilities[j] < floor) break;
    kept.probabilities.push_back(e.probabilities[j]);
    kept.pure_states.push_back(e.pure_states[j]);
  }
  double z = 0.0;
  for (double p : kept.probabilities) z += p;
  for (auto& p : kept.probabilities) p /= z;
  e = std::move(kept);
}

}  // namespace detail

namespace detail {

/// Moves every ensemble state to a nearby maximizer of H(Phi(psi), omega) and
/// merges states that land on the same ray.
inline void polish_states(const ChannelSpec& ch, const MatrixSubspace& k, Ensemble& e, const SphereConfig& sphere,
                          double same_state_tol) {
  const RelentObjective obj{reference_log(ch, e.average())};
  Ensemble merged;
  for (std::size_t j = 0; j < e.size(); ++j) {
    const ComplexVector psi = minimize_on_sphere(k, obj, e.pure_states[j], sphere).coefficients.normalized();
    bool found = false;
    for (std::size_t i = 0; i < merged.size() && !found; ++i) {
      if (1.0 - std::norm(merged.pure_states[i].dot(psi)) < same_state_tol) {
        merged.probabilities[i] += e.probabilities[j];
        found = true;
      }
    }
    if (!found) {
      merged.probabilities.push_back(e.probabilities[j]);
      merged.pure_states.push_back(psi);
    }
  }
  e = std::move(merged);
}

}  // namespace detail

/// Alternates an inner multi-start maximization of H(Phi(psi), Phi(gamma))
/// with Blahut-Arimoto reweighting of the discovered states, local polishing
/// of the states against the ensemble average output and a damped update of
/// gamma toward that average.
inline CapacityReport holevo_capacity(const ChannelSpec& ch, const CapacityConfig& cfg = {}) {
  if (!(cfg.damping > 0.0 && cfg.damping <= 1.0)) throw ValidationError("holevo_capacity: damping must lie in (0, 1]");
  const MatrixSubspace k = subspace_from_channel(ch);
  const auto d = static_cast<std::size_t>(ch.d_in);
  CapacityReport rep;
  rep.seed = cfg.seed;
  ComplexMatrix gamma = ComplexMatrix::Identity(ch.d_in, ch.d_in) / static_cast<double>(ch.d_in);
  Ensemble& ens = rep.ensemble;
  MultiStartConfig ms{cfg.starts, cfg.threads, cfg.sphere};
  auto lower_of = [&] { return detail::chi_of(ens.probabilities, detail::divergences(ch, ens, detail::reference_log(ch, ens.average()))); };

  for (int outer = 0; outer < cfg.max_outer; ++outer) {
    rep.iterations = outer + 1;
    const RelentObjective obj{detail::reference_log(ch, gamma)};
    const MultiStartResult inner =
        multistart_minimize(k, obj, cfg.seed + static_cast<std::uint64_t>(outer) * 7919u, ms, ens.pure_states);
    rep.upper_bound = std::min(rep.upper_bound, -inner.best.value);

    bool added = false;
    if (ens.size() == 0) {
      ens.probabilities.push_back(1.0);
      ens.pure_states.push_back(inner.best.coefficients.normalized());
      added = true;
    }
    const ComplexMatrix out_avg = apply_channel(ch, ens.average());
    const double chi = lower_of();
    for (const SphereResult& run : inner.runs) {
      const ComplexVector psi = run.coefficients.normalized();
      bool skip = false;
      for (const auto& s : ens.pure_states) skip = skip || 1.0 - std::norm(s.dot(psi)) < cfg.same_state_tol;
      if (!skip) {
        try {
          skip = relative_entropy(apply_channel(ch, pure_state(psi)), out_avg) <= chi + cfg.add_tol;
        } catch (const SupportError&) {
          skip = false;
        }
      }
      if (skip) continue;
      added = true;
      for (auto& p : ens.probabilities) p *= 1.0 - 1.0 / (ens.size() + 1.0);
      ens.probabilities.push_back(ens.size() ? 1.0 / (ens.size() + 1.0) : 1.0);
      ens.pure_states.push_back(psi);
    }
    detail::blahut_arimoto(ch, ens, cfg.ba_iterations);
    detail::prune(ens, cfg.weight_floor, 4 * d * d);
    detail::polish_states(ch, k, ens, cfg.sphere, cfg.same_state_tol);
    detail::blahut_arimoto(ch, ens, cfg.ba_iterations);
    detail::prune(ens, cfg.weight_floor, d * d);
    rep.lower_bound = lower_of();

    const ComplexMatrix avg = ens.average();
    const ComplexMatrix next = (1.0 - cfg.damping) * gamma + cfg.damping * avg;
    const double move = (next - gamma).norm();
    gamma = next;
    if (move < cfg.outer_tol && rep.gap() < cfg.gap_tol && !added) {
      rep.converged = true;
      break;
    }
  }
  SphereConfig tight = cfg.sphere;
  tight.grad_tol = std::min(tight.grad_tol, 1e-13);
  for (int round = 0; round < 3; ++round) {
    detail::polish_states(ch, k, ens, tight, cfg.same_state_tol);
    detail::blahut_arimoto(ch, ens, cfg.ba_iterations);
  }
  rep.rho_avg = ens.average();
  rep.output_avg = apply_channel(ch, rep.rho_avg);
  const RelentObjective at_avg{detail::reference_log(ch, rep.rho_avg)};
  const MultiStartResult final_max = multistart_minimize(k, at_avg, cfg.seed ^ 0xa5a5a5a5ULL, ms, ens.pure_states);
  rep.upper_bound = std::min(rep.upper_bound, -final_max.best.value);
  const std::vector<double> dj = detail::divergences(ch, ens, at_avg.log_omega);
  rep.lower_bound = detail::chi_of(ens.probabilities, dj);
  rep.c_holv = std::max(rep.lower_bound, 0.0);
  for (double v : dj) rep.equidistance_residuals.push_back(std::abs(v - rep.c_holv));
  return rep;
}

struct ProbeStart {
  std::string kind;  // product | entangled | random
  std::size_t index = 0;
  double value = std::numeric_limits<double>::quiet_NaN();
  double grad_norm = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  bool converged = false;
  std::string error;
};

struct SuperadditivityProbe {
  ComplexVector best_psi;
  double value = 0.0;
  double threshold = 0.0;
  double margin = 0.0;
  double product_anchor = 0.0;  // best value among product starts
  double reference_distance = 0.0;
  bool violation = false;
  std::vector<ProbeStart> starts;
  std::uint64_t seed = 0;
};

struct ProbeConfig {
  std::uint64_t seed = 0;
  int entangled_starts = 8;
  int random_starts = 8;
  double dirichlet_alpha = 0.5;
  double violation_tol = 1e-6;
  unsigned threads = 1;
  SphereConfig sphere;
};

/// Maximizes H((Phi (x) Phi)(Psi), Phi(rho_Av) (x) Phi(rho_Av)) from product,
/// entangled and uniform random starts.
inline SuperadditivityProbe superadditivity_probe(const ChannelSpec& ch, const CapacityReport& cap,
                                                  const ProbeConfig& cfg = {}) {
  if (cap.ensemble.size() == 0) throw ValidationError("superadditivity_probe: capacity report has an empty ensemble");
  const ChannelSpec two = tensor_channel(ch, ch);
  const MatrixSubspace k = subspace_from_channel(two);
  const ComplexMatrix out_avg = apply_channel(ch, cap.rho_avg);
  const RelentObjective obj{support_log(kron(out_avg, out_avg), 1e-13)};

  std::vector<ComplexVector> inits;
  std::vector<ProbeStart> log;
  const Ensemble& e = cap.ensemble;
  ComplexMatrix product_avg = ComplexMatrix::Zero(ch.d_in * ch.d_in, ch.d_in * ch.d_in);
  for (std::size_t a = 0; a < e.size(); ++a) {
    for (std::size_t b = 0; b < e.size(); ++b) {
      inits.push_back(kron(e.pure_states[a], e.pure_states[b]).col(0));
      log.emplace_back();
      log.back().kind = "product";
      log.back().index = log.size() - 1;
      product_avg += e.probabilities[a] * e.probabilities[b] * pure_state(inits.back());
    }
  }
  for (int i = 0; i < cfg.entangled_starts; ++i) {
    Rng rng = make_stream(cfg.seed, static_cast<std::uint64_t>(i));
    inits.push_back(random_entangled_state(ch.d_in, rng, cfg.dirichlet_alpha));
    log.emplace_back();
    log.back().kind = "entangled";
    log.back().index = log.size() - 1;
  }
  for (int i = 0; i < cfg.random_starts; ++i) {
    Rng rng = make_stream(cfg.seed ^ 0x5bd1e995ULL, static_cast<std::uint64_t>(i));
    inits.push_back(random_unit_vector(ch.d_in * ch.d_in, rng));
    log.emplace_back();
    log.back().kind = "random";
    log.back().index = log.size() - 1;
  }

  std::vector<SphereResult> runs(inits.size());
  parallel_for(inits.size(), cfg.threads, [&](std::size_t i) {
    try {
      runs[i] = minimize_on_sphere(k, obj, inits[i], cfg.sphere);
      log[i].value = -runs[i].value;
      log[i].grad_norm = runs[i].grad_norm;
      log[i].iterations = runs[i].iterations;
      log[i].converged = runs[i].converged;
    } catch (const Error& err) {
      log[i].error = err.what();
    }
  });

  SuperadditivityProbe p;
  p.seed = cfg.seed;
  p.threshold = 2.0 * cap.c_holv;
  p.value = -std::numeric_limits<double>::infinity();
  p.product_anchor = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < inits.size(); ++i) {
    if (!log[i].error.empty()) continue;
    if (log[i].kind == "product") p.product_anchor = std::max(p.product_anchor, log[i].value);
    if (log[i].value > p.value) {
      p.value = log[i].value;
      p.best_psi = runs[i].coefficients;
    }
  }
  if (!std::isfinite(p.value)) throw NumericalError("superadditivity_probe: every start failed");
  p.margin = p.value - p.threshold;
  p.violation = p.margin > cfg.violation_tol;
  p.reference_distance = (product_avg - kron(cap.rho_avg, cap.rho_avg)).norm();
  p.starts = std::move(log);
  return p;
}

}  // namespace moe
