// moe: minimum output entropy, local additivity and Holevo capacity checks.
//
// Exit codes: 0 pass, 2 invalid input, 3 no convergence, 4 property violated.

#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "moe/moe.hpp"

using namespace moe;
using nlohmann::json;

namespace {

enum Exit { kPass = 0, kInvalid = 2, kNoConvergence = 3, kViolation = 4 };

struct RunConfig {
  std::uint64_t seed = 0;
  double grad_tol = 1e-7;
  double rank_tol = kDefaultRankTol;
  double nu_tol = 1e-8;
  std::size_t samples = 1000;
  std::size_t mc_samples = 10000;
  std::string format = "json";
  std::string units = "nats";
  unsigned threads = default_thread_count();
  std::vector<double> eps_sweep;

  Units unit() const { return parse_units(units); }
  double scale() const { return unit_scale(unit()); }

  CertifyConfig certify() const {
    CertifyConfig c;
    c.grad_tol = grad_tol;
    c.rank_tol = rank_tol;
    c.nu_tol = nu_tol;
    return c;
  }

  void validate() const {
    if (!(grad_tol > 0.0) || !(rank_tol > 0.0) || !(nu_tol > 0.0)) throw ValidationError("tolerances must be positive");
    if (format != "json" && format != "csv") throw ValidationError("unknown format '" + format + "' (expected json or csv)");
    parse_units(units);
    for (double e : eps_sweep) {
      if (!(e > 0.0 && e < 1.0)) throw ValidationError("--eps-sweep values must lie in (0, 1)");
    }
  }
};

json header(const RunConfig& rc, const std::string& command) {
  return {{"command", command},
          {"seed", rc.seed},
          {"units", rc.units},
          {"tolerances", {{"grad_tol", rc.grad_tol}, {"rank_tol", rc.rank_tol}, {"nu_tol", rc.nu_tol}}}};
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

void flatten(const json& j, const std::string& prefix, std::ostream& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
  } else {
    out << csv_field(prefix) << ',' << csv_field(j.is_string() ? j.get<std::string>() : j.dump()) << '\n';
  }
}

void emit(const json& j, const RunConfig& rc) {
  if (rc.format == "csv") {
    std::cout << "key,value\n";
    flatten(j, "", std::cout);
  } else {
    std::cout << j.dump(2) << '\n';
  }
}

std::string csv_comment(const RunConfig& rc) { return "# seed=" + std::to_string(rc.seed) + " units=" + rc.units + "\n"; }

// --- entropy ---------------------------------------------------------------

int cmd_entropy(const RunConfig& rc, const std::string& channel_file, const std::string& state) {
  const ChannelSpec ch = load_channel(channel_file);
  const double s = rc.scale();
  json j = header(rc, "entropy");
  if (!state.empty()) {
    const ComplexVector psi = load_state(state, ch.d_in);
    j["entropy"] = entropy_of(ch.output_matrix(psi)) * s;
    j["input"] = vector_to_json(psi);
    emit(j, rc);
    return kPass;
  }
  const MatrixSubspace k = subspace_from_channel(ch);
  MultiStartConfig mc;
  mc.threads = rc.threads;
  const LocalMinimum m = find_local_minimum(k, rc.seed, mc);
  const CertifiedPoint p = certify_local_minimum(m.x / m.x.norm(), k, rc.certify());
  json values = json::array();
  for (double v : m.start_values) values.push_back(v * s);
  j["s_min_candidate"] = m.value * s;
  j["converged"] = m.converged;
  j["grad_norm"] = m.grad_norm;
  j["best_start"] = m.start;
  j["start_values"] = values;
  j["input"] = vector_to_json(k.coefficients(m.x) / m.x.norm());
  j["certificate"] = to_json(p.certificate, rc.unit());
  emit(j, rc);
  return m.converged ? kPass : kNoConvergence;
}

// --- certify -----------------------------------------------------------------

// D_2 near a rank deficient point along a Y_22 and a Y_21 block direction taken
// from a random tangent of K, with X_eps = [[x11, 0], [0, eps F]].
json eps_sweep_report(const CertifiedPoint& p, const ComplexMatrix& x, const MatrixSubspace& k, const RunConfig& rc) {
  const SupportProjectors& sp = p.reduced->support;
  const Eigen::Index r = sp.rank;
  if (r == std::min(x.rows(), x.cols())) throw ValidationError("--eps-sweep needs rank below min(d_B, d_E)");
  Rng rng = make_stream(rc.seed, 0);
  BlockSplit bs = block_split(random_tangent(x, k, rng), sp);
  Eigen::Index m = x.rows() - r, n = x.cols() - r;
  if (m > n) {
    // same entropies on the adjoint problem
    bs = {bs.y11.adjoint(), bs.y21.adjoint(), bs.y12.adjoint(), bs.y22.adjoint()};
    std::swap(m, n);
  }
  const ComplexMatrix x11 = sp.sigma.cast<Complex>().asDiagonal();
  const ComplexMatrix f = default_complement(m, n);
  ComplexMatrix y22 = bs.y22;
  if (y22.size()) y22 -= hs_inner(f, y22) / f.squaredNorm() * f;
  const bool has22 = y22.size() && y22.norm() > 1e-12;
  const bool has21 = bs.y21.size() && bs.y21.norm() > 1e-12;
  ComplexMatrix z22 = ComplexMatrix::Zero(r + m, r + n), z21 = z22;
  if (has22) z22.bottomRightCorner(m, n) = y22 / y22.norm();
  if (has21) z21.bottomLeftCorner(m, r) = bs.y21 / bs.y21.norm();
  const ComplexMatrix y21n = has21 ? ComplexMatrix(bs.y21 / bs.y21.norm()) : ComplexMatrix();
  const double s = rc.scale();

  json rows = json::array();
  for (double eps : rc.eps_sweep) {
    const ComplexMatrix xe = epsilon_embed(x11, f, eps);
    json row = {{"eps", eps}, {"minus_log_eps2", -std::log(eps * eps)}, {"d2_y22", nullptr}, {"d2_y21_net", nullptr}};
    if (has22) row["d2_y22"] = second_derivative_integral(xe, z22) * s;
    if (has21) row["d2_y21_net"] = (second_derivative_integral(xe, z21) + 2.0 * entropy_of(xe)) * s;
    rows.push_back(row);
  }
  json out = {{"rank", r}, {"rows", rows}, {"y22_slope_predicted", has22 ? json(2.0 * s) : json(nullptr)}};
  out["y21_limit"] =
      has21 ? json(-2.0 * (y21n.adjoint() * y21n * support_log(x11 * x11)).trace().real() * s) : json(nullptr);
  return out;
}

int cmd_certify(const RunConfig& rc, const std::string& channel_file, const std::string& state) {
  const ChannelSpec ch = load_channel(channel_file);
  const ComplexVector psi = load_state(state, ch.d_in);
  const MatrixSubspace k = subspace_from_channel(ch);
  const ComplexMatrix x = ch.output_matrix(psi);
  const CertifiedPoint p = certify_local_minimum(x, k, rc.certify());
  json j = header(rc, "certify");
  j["entropy"] = entropy_of(x) * rc.scale();
  j["certificate"] = to_json(p.certificate, rc.unit());
  bool ok = p.certificate.is_critical && p.certificate.nondegenerate;
  if (rc.samples > 0 && p.certificate.certified_radius > 0.0) {
    const MonteCarloReport mc = monte_carlo_check(p, rc.samples, rc.seed, rc.threads);
    j["monte_carlo"] = to_json(mc, rc.unit());
    ok = ok && mc.passed;
  }
  if (!rc.eps_sweep.empty()) {
    const json sweep = eps_sweep_report(p, x, k, rc);
    if (rc.format == "csv") {
      std::cout << csv_comment(rc) << "eps,minus_log_eps2,d2_y22,d2_y21_net\n";
      for (const auto& row : sweep["rows"]) {
        std::cout << row["eps"].dump() << ',' << row["minus_log_eps2"].dump() << ',' << row["d2_y22"].dump() << ','
                  << row["d2_y21_net"].dump() << '\n';
      }
      return ok ? kPass : kViolation;
    }
    j["eps_sweep"] = sweep;
  }
  emit(j, rc);
  return ok ? kPass : kViolation;
}

// --- additivity --------------------------------------------------------------

int cmd_additivity(const RunConfig& rc, const std::vector<std::string>& args) {
  const ChannelSpec cb = load_channel(args[0]);
  const ComplexVector sb = load_state(args[1], cb.d_in);
  const ChannelSpec cc = load_channel(args[2]);
  const ComplexVector sc = load_state(args[3], cc.d_in);
  const CertifiedPoint pb = certify_local_minimum(cb.output_matrix(sb), subspace_from_channel(cb), rc.certify());
  const CertifiedPoint pc = certify_local_minimum(cc.output_matrix(sc), subspace_from_channel(cc), rc.certify());
  json j = header(rc, "additivity");
  j["certificate_b"] = to_json(pb.certificate, rc.unit());
  j["certificate_c"] = to_json(pc.certificate, rc.unit());
  if (!pb.certificate.is_critical || !pc.certificate.is_critical) {
    j["note"] = "a factor is not a critical point; local additivity is only claimed at products of critical points";
    emit(j, rc);
    return kViolation;
  }
  if (!pb.certificate.nondegenerate || !pc.certificate.nondegenerate) {
    j["note"] =
        "a factor is a degenerate minimum: the second order bound still applies but strict positivity and the "
        "product radius are not guaranteed";
  }
  TensorVerifyConfig cfg;
  cfg.samples = rc.samples;
  cfg.mc_samples = rc.mc_samples;
  cfg.threads = rc.threads;
  cfg.certify = rc.certify();
  const TensorVerificationReport rep = verify_tensor_minimum(pb, pc, rc.seed, cfg);
  j["report"] = to_json(rep, rc.unit());
  emit(j, rc);
  return rep.passed ? kPass : kViolation;
}

// --- capacity / superadd -----------------------------------------------------

CapacityConfig capacity_config(const RunConfig& rc) {
  CapacityConfig c;
  c.seed = rc.seed;
  c.threads = rc.threads;
  return c;
}

void emit_capacity(const CapacityReport& r, const RunConfig& rc) {
  if (rc.format == "csv") {
    std::cout << csv_comment(rc) << "index,probability,residual,psi\n";
    for (std::size_t i = 0; i < r.ensemble.size(); ++i) {
      std::cout << i << ',' << json(r.ensemble.probabilities[i]).dump() << ','
                << json(r.equidistance_residuals[i] * rc.scale()).dump() << ','
                << csv_field(vector_to_json(r.ensemble.pure_states[i]).dump()) << '\n';
    }
    return;
  }
  json j = header(rc, "capacity");
  j.update(to_json(r, rc.unit()));
  emit(j, rc);
}

int cmd_capacity(const RunConfig& rc, const std::string& channel_file) {
  const ChannelSpec ch = load_channel(channel_file);
  const CapacityReport r = holevo_capacity(ch, capacity_config(rc));
  emit_capacity(r, rc);
  return r.converged ? kPass : kNoConvergence;
}

ComplexMatrix matrix_from_json(const json& a, const std::string& path) {
  if (!a.is_array() || a.empty() || !a[0].is_array()) throw InputError(path + ": expected a matrix");
  ComplexMatrix m(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(a[0].size()));
  for (std::size_t r = 0; r < a.size(); ++r) {
    if (!a[r].is_array() || a[r].size() != a[0].size()) throw InputError(path + ": ragged rows");
    for (std::size_t c = 0; c < a[r].size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          detail::parse_complex(a[r][c], path + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
  }
  return m;
}

// Reads the JSON written by `capacity` back into the fields the probe uses.
CapacityReport load_capacity_report(const std::string& path, Eigen::Index d_in) {
  const json j = detail::parse_text(detail::read_file(path), path);
  try {
    const double to_nats = j.value("units", std::string("nats")) == "bits" ? std::log(2.0) : 1.0;
    CapacityReport r;
    r.c_holv = j.at("c_holv").get<double>() * to_nats;
    r.lower_bound = j.at("lower_bound").get<double>() * to_nats;
    r.rho_avg = matrix_from_json(j.at("rho_avg"), path + ": rho_avg");
    if (r.rho_avg.rows() != d_in || r.rho_avg.cols() != d_in) throw InputError(path + ": rho_avg has the wrong shape");
    for (const auto& e : j.at("ensemble")) {
      r.ensemble.probabilities.push_back(e.at("probability").get<double>());
      ComplexVector psi(d_in);
      const json& a = e.at("psi");
      if (!a.is_array() || a.size() != static_cast<std::size_t>(d_in)) throw InputError(path + ": psi has the wrong length");
      for (Eigen::Index i = 0; i < d_in; ++i) psi(i) = detail::parse_complex(a[static_cast<std::size_t>(i)], path + ": psi");
      r.ensemble.pure_states.push_back(psi);
      r.equidistance_residuals.push_back(0.0);
    }
    r.converged = j.value("converged", false);
    r.seed = j.value("seed", std::uint64_t{0});
    return r;
  } catch (const json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

int cmd_superadd(const RunConfig& rc, const std::string& channel_file, const std::string& report_file) {
  const ChannelSpec ch = load_channel(channel_file);
  const CapacityReport cap =
      report_file.empty() ? holevo_capacity(ch, capacity_config(rc)) : load_capacity_report(report_file, ch.d_in);
  ProbeConfig cfg;
  cfg.seed = rc.seed;
  cfg.threads = rc.threads;
  const SuperadditivityProbe p = superadditivity_probe(ch, cap, cfg);
  if (rc.format == "csv") {
    std::cout << csv_comment(rc) << probe_starts_csv(p, rc.unit());
  } else {
    json j = header(rc, "superadd");
    j.update(to_json(p, rc.unit()));
    j["capacity"] = {{"c_holv", cap.c_holv * rc.scale()},
                     {"converged", cap.converged},
                     {"source", report_file.empty() ? "computed" : report_file}};
    emit(j, rc);
  }
  if (p.violation) return kViolation;
  return cap.converged ? kPass : kNoConvergence;
}

// --- phi-sweep ---------------------------------------------------------------

int cmd_phi_sweep(const RunConfig& rc, const std::vector<double>& range, int count) {
  if (range.size() != 2 || !(range[0] > 0.0) || !(range[1] > range[0])) {
    throw ValidationError("--range needs 0 < lo < hi");
  }
  if (count < 2) throw ValidationError("--count must be at least 2");
  std::vector<double> grid(static_cast<std::size_t>(count));
  const double l0 = std::log10(range[0]), l1 = std::log10(range[1]);
  for (int i = 0; i < count; ++i) grid[static_cast<std::size_t>(i)] = std::pow(10.0, l0 + (l1 - l0) * i / (count - 1));
  double worst = std::numeric_limits<double>::infinity(), wa = 0.0, wb = 0.0, diag = 0.0;
  const bool csv = rc.format == "csv";
  if (csv) std::cout << "a,b,phi_ab,slack\n";
  for (double a : grid) {
    for (double b : grid) {
      const double slack = check_phi_inequality(a, b);
      if (slack < worst) {
        worst = slack;
        wa = a;
        wb = b;
      }
      if (a == b) diag = std::max(diag, std::abs(slack));
      if (csv) std::cout << json(a).dump() << ',' << json(b).dump() << ',' << json(phi(a * b)).dump() << ',' << json(slack).dump() << '\n';
    }
  }
  json summary = {{"command", "phi-sweep"}, {"seed", rc.seed},  {"range", range},
                  {"count", count},         {"min_slack", worst}, {"argmin", {wa, wb}},
                  {"max_diagonal_slack", diag}};
  if (csv) {
    std::cerr << "min slack " << json(worst).dump() << " at a=" << json(wa).dump() << " b=" << json(wb).dump() << '\n';
  } else {
    std::cout << summary.dump(2) << '\n';
  }
  return worst < -1e-9 ? kViolation : kPass;
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::numerical:
    case ErrorKind::certify_radius:
    case ErrorKind::inconsistency:
      return kNoConvergence;
    default:
      return kInvalid;
  }
}

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::dimension: return "dimension";
    case ErrorKind::validation: return "validation";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::domain: return "domain";
    case ErrorKind::support: return "support";
    case ErrorKind::membership: return "membership";
    case ErrorKind::certify_radius: return "certify_radius";
    case ErrorKind::degenerate_input: return "degenerate_input";
    case ErrorKind::normalization: return "normalization";
    case ErrorKind::inconsistency: return "inconsistency";
  }
  return "unknown";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minimum output entropy, local additivity and Holevo capacity checks"};
  app.require_subcommand(1);
  app.fallthrough();
  RunConfig rc;
  app.add_option("--seed", rc.seed, "Master seed for every randomized step")->capture_default_str();
  app.add_option("--tol-grad", rc.grad_tol, "Criticality tolerance on the projected gradient")->capture_default_str();
  app.add_option("--tol-rank", rc.rank_tol, "Singular values at or below this are dropped")->capture_default_str();
  app.add_option("--tol-nu", rc.nu_tol, "Smallest Hessian eigenvalue counted as positive")->capture_default_str();
  app.add_option("--format", rc.format, "json or csv")->capture_default_str();
  app.add_option("--units", rc.units, "nats or bits")->capture_default_str();
  app.add_option("--threads", rc.threads, "Worker cap")->capture_default_str();
  app.add_option("--samples", rc.samples, "Sampled perturbations (certify Monte Carlo, additivity)")->capture_default_str();
  app.add_option("--mc-samples", rc.mc_samples, "Monte Carlo samples on the product certificate")->capture_default_str();
  app.add_option("--eps-sweep", rc.eps_sweep, "eps values for the singular block sweep (certify)")->delimiter(',');

  std::string channel, state, report;
  auto* entropy = app.add_subcommand("entropy", "Output entropy of a pure input, or a certified local minimum");
  entropy->add_option("channel", channel, "Channel JSON file")->required();
  entropy->add_option("--state", state, "Input vector: inline JSON array or file");

  auto* certify = app.add_subcommand("certify", "Local minimum certificate at a pure input");
  certify->add_option("channel", channel, "Channel JSON file")->required();
  certify->add_option("--state", state, "Input vector: inline JSON array or file")->required();

  std::vector<std::string> pair(4);
  auto* additivity = app.add_subcommand("additivity", "Local additivity at a product of two certified minima");
  additivity->add_option("channel_b", pair[0], "First channel JSON file")->required();
  additivity->add_option("state_b", pair[1], "Input vector for the first channel")->required();
  additivity->add_option("channel_c", pair[2], "Second channel JSON file")->required();
  additivity->add_option("state_c", pair[3], "Input vector for the second channel")->required();

  auto* capacity = app.add_subcommand("capacity", "Holevo capacity with bracketing bounds");
  capacity->add_option("channel", channel, "Channel JSON file")->required();

  auto* superadd = app.add_subcommand("superadd", "Search two-letter inputs for superadditivity");
  superadd->add_option("channel", channel, "Channel JSON file")->required();
  superadd->add_option("--capacity-report", report, "JSON written by the capacity command");

  std::vector<double> range{1e-6, 1e6};
  int count = 101;
  auto* sweep = app.add_subcommand("phi-sweep", "Key inequality slack on a log-uniform grid");
  sweep->add_option("--range", range, "lo,hi")->delimiter(',')->expected(2)->capture_default_str();
  sweep->add_option("--count", count, "Grid points per axis")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc_parse = app.exit(e);
    return rc_parse == 0 ? kPass : kInvalid;
  }

  try {
    rc.validate();
    if (*entropy) return cmd_entropy(rc, channel, state);
    if (*certify) return cmd_certify(rc, channel, state);
    if (*additivity) return cmd_additivity(rc, pair);
    if (*capacity) return cmd_capacity(rc, channel);
    if (*superadd) return cmd_superadd(rc, channel, report);
    if (*sweep) return cmd_phi_sweep(rc, range, count);
  } catch (const InputError& e) {
    json err = {{"error", "input"}, {"message", e.what()}};
    if (e.line > 0) {
      err["line"] = e.line;
      err["column"] = e.column;
    }
    if (e.residual > 0.0) err["residual"] = e.residual;
    std::cerr << err.dump() << '\n';
    return kInvalid;
  } catch (const ValidationError& e) {
    json err = {{"error", kind_name(e.kind())}, {"message", e.what()}};
    if (e.residual > 0.0) err["residual"] = e.residual;
    std::cerr << err.dump() << '\n';
    return exit_code_for(e);
  } catch (const Error& e) {
    std::cerr << json{{"error", kind_name(e.kind())}, {"message", e.what()}}.dump() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "other"}, {"message", e.what()}}.dump() << '\n';
    return kInvalid;
  }
  return kInvalid;
}
