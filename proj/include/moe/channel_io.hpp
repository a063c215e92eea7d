#pragma once

// Channel and state files. A channel is
//   {"d_in": n, "d_out": m, "kraus": [ [[ [re, im], ... ], ...], ... ]}
// with each Kraus operator given as d_out rows of d_in complex entries.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "moe/channel.hpp"

namespace moe {

/// Malformed or inconsistent channel/state input. `line` and `column` are 1-based
/// and zero when the problem is not tied to a text position.
struct InputError : ValidationError {
  InputError(const std::string& what, std::size_t line = 0, std::size_t column = 0, double residual = 0.0)
      : ValidationError(what, residual), line(line), column(column) {}
  std::size_t line;
  std::size_t column;
};

namespace detail {

inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

inline nlohmann::json parse_text(const std::string& text, const std::string& source) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw InputError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": malformed JSON", line, col);
  }
}

inline Complex parse_complex(const nlohmann::json& j, const std::string& path) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw InputError(path + ": expected a number or [re, im]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

inline std::size_t get_dimension(const nlohmann::json& doc, const char* key, const std::string& source) {
  if (!doc.contains(key)) throw InputError(source + ": missing \"" + key + "\"");
  const auto& v = doc[key];
  if (!v.is_number_integer() || v.get<long long>() <= 0) throw InputError(source + ": \"" + key + "\" must be a positive integer");
  return v.get<std::size_t>();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

inline ChannelSpec parse_channel(const std::string& text, const std::string& source = "<channel>",
                                 double tol = kKrausTol) {
  const nlohmann::json doc = detail::parse_text(text, source);
  if (!doc.is_object()) throw InputError(source + ": top level must be an object", 1, 1);
  const std::size_t d_in = detail::get_dimension(doc, "d_in", source);
  const std::size_t d_out = detail::get_dimension(doc, "d_out", source);
  if (!doc.contains("kraus") || !doc["kraus"].is_array() || doc["kraus"].empty()) {
    throw InputError(source + ": \"kraus\" must be a nonempty array");
  }
  std::vector<ComplexMatrix> ops;
  const auto& kraus = doc["kraus"];
  for (std::size_t k = 0; k < kraus.size(); ++k) {
    const std::string path = source + ": kraus[" + std::to_string(k) + "]";
    const auto& m = kraus[k];
    if (!m.is_array() || m.size() != d_out) throw InputError(path + ": expected " + std::to_string(d_out) + " rows");
    ComplexMatrix a(static_cast<Eigen::Index>(d_out), static_cast<Eigen::Index>(d_in));
    for (std::size_t r = 0; r < d_out; ++r) {
      const auto& row = m[r];
      const std::string rp = path + "[" + std::to_string(r) + "]";
      if (!row.is_array() || row.size() != d_in) throw InputError(rp + ": expected " + std::to_string(d_in) + " entries");
      for (std::size_t c = 0; c < d_in; ++c) {
        a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            detail::parse_complex(row[c], rp + "[" + std::to_string(c) + "]");
      }
    }
    ops.push_back(std::move(a));
  }
  try {
    return ChannelSpec::from_kraus(std::move(ops), tol);
  } catch (const ValidationError& e) {
    throw InputError(source + ": " + e.what(), 0, 0, e.residual);
  }
}

inline ChannelSpec load_channel(const std::string& path, double tol = kKrausTol) {
  return parse_channel(detail::read_file(path), path, tol);
}

/// A unit input vector given inline as a JSON array or as a file holding one.
inline ComplexVector parse_state(const std::string& text, Eigen::Index d, const std::string& source = "<state>",
                                 double tol = 1e-8) {
  const nlohmann::json doc = detail::parse_text(text, source);
  if (!doc.is_array() || doc.size() != static_cast<std::size_t>(d)) {
    throw InputError(source + ": state must be an array of " + std::to_string(d) + " amplitudes");
  }
  ComplexVector psi(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    psi(i) = detail::parse_complex(doc[static_cast<std::size_t>(i)], source + "[" + std::to_string(i) + "]");
  }
  const double defect = std::abs(psi.norm() - 1.0);
  if (defect > tol) throw InputError(source + ": state is not a unit vector", 0, 0, defect);
  return psi;
}

inline ComplexVector load_state(const std::string& arg, Eigen::Index d) {
  const auto first = arg.find_first_not_of(" \t\n");
  if (first != std::string::npos && arg[first] == '[') return parse_state(arg, d);
  return parse_state(detail::read_file(arg), d, arg);
}

inline nlohmann::json complex_to_json(Complex z) { return nlohmann::json::array({z.real(), z.imag()}); }

inline nlohmann::json channel_to_json(const ChannelSpec& ch) {
  nlohmann::json ops = nlohmann::json::array();
  for (const auto& a : ch.kraus) {
    nlohmann::json m = nlohmann::json::array();
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index c = 0; c < a.cols(); ++c) row.push_back(complex_to_json(a(r, c)));
      m.push_back(std::move(row));
    }
    ops.push_back(std::move(m));
  }
  return {{"d_in", ch.d_in}, {"d_out", ch.d_out}, {"kraus", std::move(ops)}};
}

}  // namespace moe
