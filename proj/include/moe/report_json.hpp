#pragma once

// JSON and CSV views of the reports. Units only rescale entropy valued
// fields (and their t-derivatives); stored values are always in nats.

#include <cmath>
#include <optional>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "moe/certification.hpp"
#include "moe/channel_io.hpp"
#include "moe/holevo.hpp"

namespace moe {

enum class Units { nats, bits };

inline double unit_scale(Units u) { return u == Units::bits ? 1.0 / std::log(2.0) : 1.0; }

inline Units parse_units(const std::string& s) {
  if (s == "nats") return Units::nats;
  if (s == "bits") return Units::bits;
  throw ValidationError("unknown units '" + s + "' (expected nats or bits)");
}

inline const char* units_name(Units u) { return u == Units::bits ? "bits" : "nats"; }

inline nlohmann::json optional_json(const std::optional<double>& v, double scale = 1.0) {
  if (!v) return nullptr;
  return *v * scale;
}

inline nlohmann::json finite_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

inline nlohmann::json vector_to_json(const ComplexVector& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(complex_to_json(v(i)));
  return a;
}

inline nlohmann::json matrix_to_json(const ComplexMatrix& m) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    a.push_back(std::move(row));
  }
  return a;
}

inline nlohmann::json to_json(const MinimumCertificate& c, Units u = Units::nats) {
  const double s = unit_scale(u);
  return {{"is_critical", c.is_critical},
          {"gradient_norm", c.gradient_norm * s},
          {"nu", finite_or_null(c.nu * s)},
          {"nu_is_infinite", std::isinf(c.nu)},
          {"r_bound", optional_json(c.r_bound, s)},
          {"tau", optional_json(c.tau)},
          {"certified_radius", c.certified_radius},
          {"nondegenerate", c.nondegenerate},
          {"rank", c.rank},
          {"tangent_dim", c.tangent_dim},
          {"tolerances", {{"grad_tol", c.grad_tol}, {"rank_tol", c.rank_tol}, {"nu_tol", c.nu_tol}}},
          {"note", c.note}};
}

inline nlohmann::json to_json(const MonteCarloReport& m, Units u = Units::nats) {
  return {{"samples", m.samples},
          {"min_excess", finite_or_null(m.min_excess * unit_scale(u))},
          {"worst_t", m.worst_t},
          {"passed", m.passed}};
}

inline nlohmann::json to_json(const TensorVerificationReport& r, Units u = Units::nats) {
  const double s = unit_scale(u);
  nlohmann::json j = {{"passed", r.passed},
                      {"samples", r.samples},
                      {"d1_max", r.d1_max * s},
                      {"decomposition_max_error", r.decomposition_max_error * s},
                      {"bound_min_slack", finite_or_null(r.bound_min_slack * s)},
                      {"strict_min_margin", finite_or_null(r.strict_min_margin * s)},
                      {"nu_b", finite_or_null(r.nu_b * s)},
                      {"nu_c", finite_or_null(r.nu_c * s)},
                      {"product_nu", finite_or_null(r.product_nu * s)},
                      {"product_certificate", to_json(r.product_certificate, u)},
                      {"monte_carlo", to_json(r.monte_carlo, u)},
                      {"counterexample", nullptr}};
  if (r.counterexample) {
    const auto& c = *r.counterexample;
    j["counterexample"] = {{"failed_check", c.failed_check}, {"y_bc", matrix_to_json(c.y_bc)},
                           {"d1", c.d1 * s},                 {"d2_direct", c.d2_direct * s},
                           {"d2_decomposed", c.d2_decomposed * s},     {"lower_bound", c.lower_bound * s}};
  }
  return j;
}

inline nlohmann::json to_json(const CapacityReport& r, Units u = Units::nats) {
  const double s = unit_scale(u);
  nlohmann::json states = nlohmann::json::array();
  for (std::size_t j = 0; j < r.ensemble.size(); ++j) {
    states.push_back({{"probability", r.ensemble.probabilities[j]},
                      {"psi", vector_to_json(r.ensemble.pure_states[j])},
                      {"residual", r.equidistance_residuals[j] * s}});
  }
  nlohmann::json res = nlohmann::json::array();
  for (double v : r.equidistance_residuals) res.push_back(v * s);
  return {{"c_holv", r.c_holv * s},
          {"lower_bound", r.lower_bound * s},
          {"upper_bound", finite_or_null(r.upper_bound * s)},
          {"gap", finite_or_null(r.gap() * s)},
          {"rho_avg", matrix_to_json(r.rho_avg)},
          {"ensemble", states},
          {"equidistance_residuals", res},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"seed", r.seed},
          {"units", units_name(u)}};
}

inline nlohmann::json to_json(const SuperadditivityProbe& p, Units u = Units::nats) {
  const double s = unit_scale(u);
  nlohmann::json starts = nlohmann::json::array();
  for (const auto& st : p.starts) {
    starts.push_back({{"kind", st.kind},
                      {"index", st.index},
                      {"value", finite_or_null(st.value * s)},
                      {"grad_norm", finite_or_null(st.grad_norm * s)},
                      {"iterations", st.iterations},
                      {"converged", st.converged},
                      {"error", st.error.empty() ? nlohmann::json(nullptr) : nlohmann::json(st.error)}});
  }
  return {{"best_psi", vector_to_json(p.best_psi)},
          {"value", p.value * s},
          {"threshold", p.threshold * s},
          {"margin", p.margin * s},
          {"product_anchor", finite_or_null(p.product_anchor * s)},
          {"reference_distance", p.reference_distance},
          {"violation", p.violation},
          {"seed", p.seed},
          {"units", units_name(u)},
          {"starts", starts}};
}

/// One row per start: kind,index,value,grad_norm,iterations,converged,error.
inline std::string probe_starts_csv(const SuperadditivityProbe& p, Units u = Units::nats) {
  std::ostringstream out;
  out.precision(17);
  out << "kind,index,value,grad_norm,iterations,converged,error\n";
  for (const auto& st : p.starts) {
    out << st.kind << ',' << st.index << ',' << st.value * unit_scale(u) << ',' << st.grad_norm << ','
        << st.iterations << ',' << (st.converged ? 1 : 0) << ',' << '"' << st.error << '"' << '\n';
  }
  return out.str();
}

}  // namespace moe
