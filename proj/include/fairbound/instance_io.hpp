/**
 * @file instance_io.hpp
 * @brief JSON instance files.
 *
 *   { "claims": [a_1, ...],
 *     "agents": [ { "name": "...",
 *                   "pieces": [ { "interval": [lo, hi], "coeffs": [c_0, ...] } ] } ] }
 *
 * Coefficients are in ascending degree. Schema problems are reported as
 * InstanceError violations, like any other validation failure.
 */

#ifndef FAIRBOUND_INSTANCE_IO_HPP
#define FAIRBOUND_INSTANCE_IO_HPP

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "measure_model.hpp"

namespace fairbound {

/// The file could not be opened or read (as opposed to being invalid).
class InstanceIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline bool is_number_array(const nlohmann::json& j) {
  if (!j.is_array()) return false;
  for (const auto& x : j) {
    if (!x.is_number()) return false;
  }
  return true;
}

}  // namespace detail

/// Reads the schema into an unchecked description. Density and claim
/// validation is left to validate_instance.
inline RawInstance parse_raw_instance(const nlohmann::json& j) {
  std::vector<Violation> bad;
  RawInstance raw;
  if (!j.is_object()) throw InstanceError({{std::nullopt, std::nullopt, "top level is not an object"}});

  if (!j.contains("claims") || !detail::is_number_array(j["claims"])) {
    bad.push_back({std::nullopt, std::nullopt, "\"claims\" must be an array of numbers"});
  } else {
    raw.claims = j["claims"].get<std::vector<double>>();
  }

  if (!j.contains("agents") || !j["agents"].is_array()) {
    bad.push_back({std::nullopt, std::nullopt, "\"agents\" must be an array"});
    throw InstanceError(std::move(bad));
  }
  const auto& agents = j["agents"];
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto& a = agents[i];
    RawAgent agent;
    if (!a.is_object() || !a.contains("pieces") || !a["pieces"].is_array()) {
      bad.push_back({i, std::nullopt, "agent needs a \"pieces\" array"});
      raw.agents.push_back(std::move(agent));
      continue;
    }
    if (a.contains("name")) {
      if (a["name"].is_string()) {
        agent.name = a["name"].get<std::string>();
      } else {
        bad.push_back({i, std::nullopt, "\"name\" must be a string"});
      }
    }
    const auto& pieces = a["pieces"];
    for (std::size_t k = 0; k < pieces.size(); ++k) {
      const auto& p = pieces[k];
      RawPiece piece;
      const bool interval_ok = p.is_object() && p.contains("interval") &&
                               detail::is_number_array(p["interval"]) && p["interval"].size() == 2;
      const bool coeffs_ok =
          p.is_object() && p.contains("coeffs") && detail::is_number_array(p["coeffs"]);
      if (!interval_ok) bad.push_back({i, k, "\"interval\" must be [lo, hi]"});
      if (!coeffs_ok) bad.push_back({i, k, "\"coeffs\" must be an array of numbers"});
      if (interval_ok) {
        piece.lo = p["interval"][0].get<double>();
        piece.hi = p["interval"][1].get<double>();
      }
      if (coeffs_ok) piece.coeffs = p["coeffs"].get<std::vector<double>>();
      agent.pieces.push_back(std::move(piece));
    }
    raw.agents.push_back(std::move(agent));
  }
  if (!bad.empty()) throw InstanceError(std::move(bad));
  return raw;
}

inline nlohmann::json to_json(const RawInstance& raw) {
  nlohmann::json agents = nlohmann::json::array();
  for (const auto& a : raw.agents) {
    nlohmann::json pieces = nlohmann::json::array();
    for (const auto& p : a.pieces) {
      pieces.push_back({{"interval", {p.lo, p.hi}}, {"coeffs", p.coeffs}});
    }
    agents.push_back({{"name", a.name}, {"pieces", std::move(pieces)}});
  }
  return {{"claims", raw.claims}, {"agents", std::move(agents)}};
}

/// Parses and validates instance text. Malformed JSON is reported as an
/// InstanceError with a single violation.
inline Instance parse_instance(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InstanceError({{std::nullopt, std::nullopt, std::string("malformed JSON: ") + e.what()}});
  }
  return validate_instance(parse_raw_instance(j));
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InstanceIoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw InstanceIoError("cannot read " + path.string());
  return ss.str();
}

inline Instance load_instance(const std::filesystem::path& path) {
  return parse_instance(read_text_file(path));
}

/// 64-bit FNV-1a of the canonical JSON form, as 16 hex digits. Equal for
/// files that differ only in whitespace or key order.
inline std::string instance_digest(const RawInstance& raw) {
  const std::string canon = to_json(raw).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace fairbound

#endif  // FAIRBOUND_INSTANCE_IO_HPP
