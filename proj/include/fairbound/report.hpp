/**
 * @file report.hpp
 * @brief Machine-readable result of one CLI run.
 */

#ifndef FAIRBOUND_REPORT_HPP
#define FAIRBOUND_REPORT_HPP

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bound_core.hpp"

namespace fairbound {

struct ReportEvv {
  std::vector<double> beta;
  std::vector<double> u;

  bool operator==(const ReportEvv&) const = default;
};

struct OracleSummary {
  std::size_t cells = 0;
  double value = 0.0;
  double dual_value = 0.0;
  double slack = 0.0;
  std::size_t pivots = 0;

  bool operator==(const OracleSummary&) const = default;
};

/// lower is absent when no lower bound was certified. wall_time_s is the
/// only field that varies between identical runs.
struct RunReport {
  std::string digest;
  std::string mode;
  std::vector<double> alpha;
  std::optional<double> lower;
  std::optional<double> upper;
  std::string cone_status = "outside";
  std::vector<ReportEvv> evvs;
  std::size_t iterations = 0;
  double wall_time_s = 0.0;
  std::optional<OracleSummary> oracle;

  bool operator==(const RunReport&) const = default;

  static RunReport from_bounds(const BoundsResult& b) {
    RunReport r;
    r.lower = b.lower;
    if (std::isfinite(b.upper)) r.upper = b.upper;
    r.cone_status = std::string(to_string(b.cone_status));
    for (const auto& e : b.basis) r.evvs.push_back({e.beta.values(), e.u});
    return r;
  }
};

namespace detail {

inline nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

inline std::optional<double> read_optional(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

}  // namespace detail

inline nlohmann::json to_json(const RunReport& r) {
  nlohmann::json evvs = nlohmann::json::array();
  for (const auto& e : r.evvs) evvs.push_back({{"beta", e.beta}, {"u", e.u}});
  nlohmann::json j = {
      {"digest", r.digest},
      {"mode", r.mode},
      {"alpha", r.alpha},
      {"lower", detail::optional_number(r.lower)},
      {"upper", detail::optional_number(r.upper)},
      {"cone_status", r.cone_status},
      {"evvs", std::move(evvs)},
      {"iterations", r.iterations},
      {"wall_time_s", r.wall_time_s},
  };
  if (r.oracle) {
    j["oracle"] = {{"cells", r.oracle->cells},
                   {"value", r.oracle->value},
                   {"dual_value", r.oracle->dual_value},
                   {"slack", r.oracle->slack},
                   {"pivots", r.oracle->pivots}};
  } else {
    j["oracle"] = nullptr;
  }
  return j;
}

inline RunReport report_from_json(const nlohmann::json& j) {
  RunReport r;
  r.digest = j.at("digest").get<std::string>();
  r.mode = j.at("mode").get<std::string>();
  r.alpha = j.at("alpha").get<std::vector<double>>();
  r.lower = detail::read_optional(j, "lower");
  r.upper = detail::read_optional(j, "upper");
  r.cone_status = j.at("cone_status").get<std::string>();
  for (const auto& e : j.at("evvs")) {
    r.evvs.push_back({e.at("beta").get<std::vector<double>>(), e.at("u").get<std::vector<double>>()});
  }
  r.iterations = j.at("iterations").get<std::size_t>();
  r.wall_time_s = j.at("wall_time_s").get<double>();
  if (j.contains("oracle") && !j["oracle"].is_null()) {
    const auto& o = j["oracle"];
    r.oracle = OracleSummary{o.at("cells").get<std::size_t>(), o.at("value").get<double>(),
                             o.at("dual_value").get<double>(), o.at("slack").get<double>(),
                             o.at("pivots").get<std::size_t>()};
  }
  return r;
}

}  // namespace fairbound

#endif  // FAIRBOUND_REPORT_HPP
