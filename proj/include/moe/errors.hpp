#pragma once

#include <stdexcept>
#include <string>

namespace moe {

// Error categories; the CLI maps them onto process exit codes.
enum class ErrorKind {
  dimension,
  validation,
  numerical,
  domain,
  support,
  membership,
  certify_radius,
  degenerate_input,
  normalization,
  inconsistency,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct DimensionError : Error {
  explicit DimensionError(const std::string& what) : Error(ErrorKind::dimension, what) {}
};

// Input violates a documented precondition. `residual` carries the measured
// violation when there is one (e.g. Kraus completeness defect).
struct ValidationError : Error {
  ValidationError(const std::string& what, double residual = 0.0)
      : Error(ErrorKind::validation, what), residual(residual) {}
  double residual;
};

struct NumericalError : Error {
  explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

struct DomainError : Error {
  explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

// ker(omega) is not contained in ker(rho). `leaked_weight` is Tr P_ker(omega) rho.
struct SupportError : Error {
  SupportError(const std::string& what, double leaked_weight)
      : Error(ErrorKind::support, what), leaked_weight(leaked_weight) {}
  double leaked_weight;
};

struct MembershipError : Error {
  MembershipError(const std::string& what, double residual)
      : Error(ErrorKind::membership, what), residual(residual) {}
  double residual;
};

// The perturbation path leaves the positive definite cone inside the requested
// radius. `largest_admissible_tau` is a radius at which it does not.
struct CertifyRadiusError : Error {
  CertifyRadiusError(const std::string& what, double largest_admissible_tau)
      : Error(ErrorKind::certify_radius, what), largest_admissible_tau(largest_admissible_tau) {}
  double largest_admissible_tau;
};

struct DegenerateInputError : Error {
  explicit DegenerateInputError(const std::string& what) : Error(ErrorKind::degenerate_input, what) {}
};

struct NormalizationError : Error {
  explicit NormalizationError(const std::string& what) : Error(ErrorKind::normalization, what) {}
};

// Two independent evaluations of the same quantity disagree.
struct InconsistencyError : Error {
  InconsistencyError(const std::string& what, double discrepancy)
      : Error(ErrorKind::inconsistency, what), discrepancy(discrepancy) {}
  double discrepancy;
};

}  // namespace moe
