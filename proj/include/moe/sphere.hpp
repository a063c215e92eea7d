#pragma once

// Minimization of phase invariant objectives over the unit sphere of a matrix
// subspace, parametrized by coefficients in its orthonormal basis.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <vector>

#include "moe/channel.hpp"
#include "moe/entropy.hpp"
#include "moe/parallel.hpp"
#include "moe/random.hpp"

namespace moe {

/// value(X), Euclidean gradient G with directional derivative Re <G, Y>, and
/// curvature_at(X) returning the symmetric bilinear second derivative along
/// norm preserving paths (may throw DomainError at singular points).
template <class O>
concept SphereObjective = requires(const O& o, const ComplexMatrix& x) {
  { o.value(x) } -> std::convertible_to<double>;
  { o.gradient(x) } -> std::convertible_to<ComplexMatrix>;
  { o.curvature_at(x)(x, x) } -> std::convertible_to<double>;
};

/// S(X X^dagger).
struct EntropyObjective {
  double value(const ComplexMatrix& x) const { return entropy_of(x); }
  ComplexMatrix gradient(const ComplexMatrix& x) const { return entropy_gradient(x); }
  SecondDerivativeForm curvature_at(const ComplexMatrix& x) const { return SecondDerivativeForm(x); }
};

/// -H(X X^dagger, omega) = S(X X^dagger) + Tr X X^dagger log omega; minimizing it
/// maximizes the relative entropy to the fixed reference.
struct RelentObjective {
  ComplexMatrix log_omega;

  struct Form {
    SecondDerivativeForm entropy_part;
    const ComplexMatrix* log_omega;
    double reference_term;

    double operator()(const ComplexMatrix& ya, const ComplexMatrix& yb) const {
      return entropy_part(ya, yb) + 2.0 * (ya * yb.adjoint() * (*log_omega)).trace().real() -
             2.0 * hs_inner(ya, yb).real() * reference_term;
    }
  };

  double value(const ComplexMatrix& x) const {
    const ComplexMatrix rho = x * x.adjoint();
    return von_neumann_entropy(rho) + (rho * log_omega).trace().real();
  }
  ComplexMatrix gradient(const ComplexMatrix& x) const { return entropy_gradient(x) + 2.0 * log_omega * x; }
  Form curvature_at(const ComplexMatrix& x) const {
    return {SecondDerivativeForm(x), &log_omega, (x * x.adjoint() * log_omega).trace().real()};
  }
};

struct SphereConfig {
  double grad_tol = 1e-9;
  int max_iter = 4000;
  double newton_switch = 1e-3;
  double armijo = 1e-4;
  double initial_step = 0.1;
};

struct SphereResult {
  ComplexVector coefficients;
  ComplexMatrix x;
  double value = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Complex orthonormal basis of the orthogonal complement of unit c.
inline ComplexMatrix complement_basis(const ComplexVector& c) {
  const Eigen::Index n = c.size();
  const ComplexMatrix p = ComplexMatrix::Identity(n, n) - c * c.adjoint();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(p);
  return es.eigenvectors().rightCols(n - 1);
}

/// Makes the largest coefficient real and positive.
inline ComplexVector fix_phase(const ComplexVector& c) {
  Eigen::Index k = 0;
  c.cwiseAbs().maxCoeff(&k);
  const double mag = std::abs(c(k));
  if (mag == 0.0) return c;
  return c * (std::conj(c(k)) / mag);
}

/// Real orthonormal tangent directions {e_k, i e_k} of the sphere at c modulo phase.
inline std::vector<ComplexVector> real_tangent_directions(const ComplexVector& c) {
  std::vector<ComplexVector> out;
  if (c.size() <= 1) return out;
  const ComplexMatrix comp = complement_basis(c);
  for (Eigen::Index k = 0; k < comp.cols(); ++k) out.push_back(comp.col(k));
  for (Eigen::Index k = 0; k < comp.cols(); ++k) out.push_back(Complex(0.0, 1.0) * comp.col(k));
  return out;
}

/// Real symmetric matrix of a bilinear form over a list of directions.
template <class Form>
RealMatrix bilinear_matrix(const Form& form, const std::vector<ComplexMatrix>& dirs) {
  const auto n = static_cast<Eigen::Index>(dirs.size());
  RealMatrix h(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a; b < n; ++b) {
      h(a, b) = form(dirs[static_cast<std::size_t>(a)], dirs[static_cast<std::size_t>(b)]);
      h(b, a) = h(a, b);
    }
  }
  return h;
}

namespace detail {

inline ComplexVector coefficient_gradient(const MatrixSubspace& k, const ComplexMatrix& g) { return k.coefficients(g); }

inline ComplexVector project_tangent(const ComplexVector& c, const ComplexVector& g) {
  return g - c * c.dot(g);
}

}  // namespace detail

template <SphereObjective O>
SphereResult minimize_on_sphere(const MatrixSubspace& k, const O& obj, ComplexVector c, const SphereConfig& cfg = {}) {
  if (k.dim() == 0) throw DimensionError("minimize_on_sphere: empty subspace");
  if (c.size() != k.dim()) throw DimensionError("minimize_on_sphere: start has wrong length");
  c.normalize();
  ComplexMatrix x = k.combine(c);
  double f = obj.value(x);
  double alpha = cfg.initial_step;
  double newton_below = cfg.newton_switch;
  SphereResult res;
  int it = 0;
  double gnorm = 0.0;
  for (; it < cfg.max_iter; ++it) {
    const ComplexVector g = detail::project_tangent(c, detail::coefficient_gradient(k, obj.gradient(x)));
    gnorm = g.norm();
    if (gnorm < cfg.grad_tol) {
      res.converged = true;
      break;
    }
    if (gnorm < newton_below) {
      bool stepped = false;
      try {
        const std::vector<ComplexVector> dirs = real_tangent_directions(c);
        std::vector<ComplexMatrix> mats;
        mats.reserve(dirs.size());
        for (const auto& d : dirs) mats.push_back(k.combine(d));
        const auto form = obj.curvature_at(x);
        const RealMatrix h = bilinear_matrix(form, mats);
        RealVector r(static_cast<Eigen::Index>(dirs.size()));
        for (std::size_t a = 0; a < dirs.size(); ++a) r(static_cast<Eigen::Index>(a)) = dirs[a].dot(g).real();
        Eigen::SelfAdjointEigenSolver<RealMatrix> es(h);
        const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
        if (es.eigenvalues().minCoeff() > 1e-10 * scale) {
          const RealVector s = -es.eigenvectors() * (es.eigenvalues().cwiseInverse().asDiagonal() *
                                                     (es.eigenvectors().transpose() * r));
          ComplexVector step = ComplexVector::Zero(c.size());
          for (std::size_t a = 0; a < dirs.size(); ++a) step += s(static_cast<Eigen::Index>(a)) * dirs[a];
          ComplexVector cn = (c + step).normalized();
          const ComplexMatrix xn = k.combine(cn);
          const ComplexVector gn = detail::project_tangent(cn, detail::coefficient_gradient(k, obj.gradient(xn)));
          const double fn = obj.value(xn);
          if (gn.norm() < gnorm && fn <= f + 1e-12 * std::max(1.0, std::abs(f))) {
            c = cn;
            x = xn;
            f = fn;
            stepped = true;
          }
        }
      } catch (const DomainError&) {
        newton_below = 0.0;
      }
      if (stepped) continue;
      newton_below = std::min(newton_below, 0.1 * gnorm);
    }
    const double g2 = gnorm * gnorm;
    bool accepted = false;
    for (int bt = 0; bt < 80; ++bt) {
      ComplexVector cn = (c - alpha * g).normalized();
      const ComplexMatrix xn = k.combine(cn);
      const double fn = obj.value(xn);
      if (fn <= f - cfg.armijo * alpha * g2) {
        c = cn;
        x = xn;
        f = fn;
        accepted = true;
        alpha = std::min(alpha * 1.5, 10.0);
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;  // no descent at double precision
  }
  if (!res.converged) {
    const ComplexVector g = detail::project_tangent(c, detail::coefficient_gradient(k, obj.gradient(x)));
    gnorm = g.norm();
    res.converged = gnorm < cfg.grad_tol;
  }
  res.coefficients = fix_phase(c);
  res.x = k.combine(res.coefficients);
  res.value = obj.value(res.x);
  res.grad_norm = gnorm;
  res.iterations = it;
  return res;
}

struct MultiStartConfig {
  int starts = 8;
  unsigned threads = 1;
  SphereConfig sphere;
};

struct MultiStartResult {
  SphereResult best;
  std::size_t best_start = 0;
  std::vector<SphereResult> runs;
};

/// Runs from random starts drawn from independent streams of `seed`; the
/// lowest value wins, ties broken by start index.
template <SphereObjective O>
MultiStartResult multistart_minimize(const MatrixSubspace& k, const O& obj, std::uint64_t seed,
                                     const MultiStartConfig& cfg, std::vector<ComplexVector> extra_starts = {}) {
  const std::size_t n = static_cast<std::size_t>(std::max(0, cfg.starts)) + extra_starts.size();
  if (n == 0) throw ValidationError("multistart_minimize: no starts");
  MultiStartResult out;
  out.runs.resize(n);
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    ComplexVector c0;
    if (i < extra_starts.size()) {
      c0 = extra_starts[i];
    } else {
      Rng rng = make_stream(seed, i);
      c0 = random_unit_vector(k.dim(), rng);
    }
    out.runs[i] = minimize_on_sphere(k, obj, c0, cfg.sphere);
  });
  for (std::size_t i = 1; i < n; ++i) {
    if (out.runs[i].value < out.runs[out.best_start].value) out.best_start = i;
  }
  out.best = out.runs[out.best_start];
  return out;
}

}  // namespace moe
