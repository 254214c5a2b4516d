#ifndef MEDLI_IO_HPP
#define MEDLI_IO_HPP

// JSON interchange: ensemble files ("med-li/1"), measurement files, and a
// deterministic writer that prints every real with 17 significant digits.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "medli/ensembles.hpp"

namespace medli::io {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "med-li/1";

/// Row-major array of rows of [re, im] pairs.
inline Json matrix_to_json(const CMatrix& m) {
  Json rows = Json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(Json::array({m(r, c).real(), m(r, c).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline CMatrix matrix_from_json(const Json& j, Index d, const std::string& field) {
  auto fail = [&](const std::string& why) { return Error(ErrorCode::ParseError, "field '" + field + "': " + why); };
  if (!j.is_array() || static_cast<Index>(j.size()) != d) {
    throw fail("expected an array of " + std::to_string(d) + " rows");
  }
  CMatrix m(d, d);
  for (Index r = 0; r < d; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != d) {
      throw fail("row " + std::to_string(r) + " must hold " + std::to_string(d) + " entries");
    }
    for (Index c = 0; c < d; ++c) {
      const Json& entry = row[static_cast<std::size_t>(c)];
      if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number() || !entry[1].is_number()) {
        throw fail("entry [" + std::to_string(r) + "][" + std::to_string(c) + "] must be [re, im]");
      }
      m(r, c) = Complex(entry[0].get<double>(), entry[1].get<double>());
    }
  }
  return m;
}

inline Json ensemble_to_json(const Ensemble& e, const std::optional<std::string>& label = std::nullopt) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["dim"] = e.dim();
  if (label) j["label"] = *label;
  j["priors"] = e.priors();
  Json states = Json::array();
  for (const auto& s : e.states()) states.push_back(matrix_to_json(s.matrix()));
  j["states"] = std::move(states);
  return j;
}

inline Index read_dim(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "top level must be an object");
  if (!j.contains("schema_version") || j["schema_version"] != kSchemaVersion) {
    throw Error(ErrorCode::ParseError, std::string("field 'schema_version': expected \"") + kSchemaVersion + "\"");
  }
  if (!j.contains("dim") || !j["dim"].is_number_integer() || j["dim"].get<long long>() < 1) {
    throw Error(ErrorCode::ParseError, "field 'dim': expected a positive integer");
  }
  return static_cast<Index>(j["dim"].get<long long>());
}

inline std::vector<CMatrix> matrices_from_json(const Json& j, const char* key, Index d) {
  if (!j.contains(key) || !j[key].is_array()) {
    throw Error(ErrorCode::ParseError, std::string("field '") + key + "': expected an array of matrices");
  }
  std::vector<CMatrix> out;
  for (std::size_t i = 0; i < j[key].size(); ++i) {
    out.push_back(matrix_from_json(j[key][i], d, std::string(key) + "[" + std::to_string(i) + "]"));
  }
  return out;
}

inline Ensemble ensemble_from_json(const Json& j, const Tolerances& tol = {}) {
  const Index d = read_dim(j);
  if (!j.contains("priors") || !j["priors"].is_array()) {
    throw Error(ErrorCode::ParseError, "field 'priors': expected an array of numbers");
  }
  std::vector<double> priors;
  for (std::size_t i = 0; i < j["priors"].size(); ++i) {
    if (!j["priors"][i].is_number()) {
      throw Error(ErrorCode::ParseError, "field 'priors[" + std::to_string(i) + "]': expected a number");
    }
    priors.push_back(j["priors"][i].get<double>());
  }
  if (j.contains("label") && !j["label"].is_string()) {
    throw Error(ErrorCode::ParseError, "field 'label': expected a string");
  }
  return validate_ensemble(priors, matrices_from_json(j, "states", d), tol);
}

inline Json measurement_to_json(std::span<const HermitianMatrix> elements) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["dim"] = elements.empty() ? 0 : elements.front().dim();
  Json arr = Json::array();
  for (const auto& e : elements) arr.push_back(matrix_to_json(e.matrix()));
  j["elements"] = std::move(arr);
  return j;
}

/// Raw POVM elements from a measurement file; validation is up to the caller.
inline std::vector<CMatrix> measurement_from_json(const Json& j) {
  const Index d = read_dim(j);
  return matrices_from_json(j, "elements", d);
}

/// Parses text, turning syntax errors into ParseError with the location.
inline Json parse_text(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// FNV-1a 64-bit hash of the raw bytes, as "fnv1a64:<16 hex digits>".
inline std::string content_digest(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string format_real(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace detail {

inline bool is_leaf_array(const Json& j) {
  if (!j.is_array()) return false;
  for (const auto& e : j) {
    if (e.is_structured()) return false;
  }
  return true;
}

inline void write(std::ostream& os, const Json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (const auto& [key, value] : j.items()) {
        if (!first) os << ",\n";
        first = false;
        os << inner << Json(key).dump() << ": ";
        write(os, value, indent + 1);
      }
      os << "\n" << pad << "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      if (is_leaf_array(j)) {
        os << "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) os << ", ";
          write(os, j[i], indent + 1);
        }
        os << "]";
        return;
      }
      os << "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) os << ",\n";
        os << inner;
        write(os, j[i], indent + 1);
      }
      os << "\n" << pad << "]";
      return;
    }
    case Json::value_t::number_float:
      os << format_real(j.get<double>());
      return;
    default:
      os << j.dump();
      return;
  }
}

}  // namespace detail

/// Pretty-printed JSON with arrays of scalars kept on one line and reals
/// printed with 17 significant digits, so parsing the output is exact.
inline std::string dump(const Json& j) {
  std::ostringstream os;
  detail::write(os, j, 0);
  os << "\n";
  return os.str();
}

}  // namespace medli::io

#endif  // MEDLI_IO_HPP
