/**
 * @file measure_model.hpp
 * @brief Agents' measures on [0,1] as piecewise-polynomial densities.
 *
 * Every measure is mu_i(A) = integral over A of f_i with respect to
 * Lebesgue measure. Densities are stored piecewise with ascending-degree
 * coefficients; integrals are exact through closed-form antiderivatives.
 */

#ifndef FAIRBOUND_MEASURE_MODEL_HPP
#define FAIRBOUND_MEASURE_MODEL_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "polynomial.hpp"

namespace fairbound {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const noexcept { return hi - lo; }
  bool operator==(const Interval&) const = default;
};

/// Sorted, non-overlapping closed intervals inside [0,1]. Intervals that
/// touch at an endpoint are merged on construction.
class IntervalSet {
 public:
  IntervalSet() = default;

  explicit IntervalSet(std::vector<Interval> parts) {
    for (const auto& iv : parts) {
      if (!(iv.lo >= 0.0 && iv.hi <= 1.0 && iv.lo <= iv.hi)) {
        throw std::invalid_argument("IntervalSet: interval outside [0,1] or reversed");
      }
    }
    for (std::size_t k = 1; k < parts.size(); ++k) {
      if (parts[k].lo < parts[k - 1].hi) {
        throw std::invalid_argument("IntervalSet: intervals unsorted or overlapping");
      }
    }
    for (const auto& iv : parts) {
      if (!parts_.empty() && parts_.back().hi == iv.lo) {
        parts_.back().hi = iv.hi;
      } else {
        parts_.push_back(iv);
      }
    }
  }

  static IntervalSet whole() { return IntervalSet({{0.0, 1.0}}); }

  /// Union of two disjoint sets.
  static IntervalSet unite(const IntervalSet& a, const IntervalSet& b) {
    std::vector<Interval> all(a.parts_);
    all.insert(all.end(), b.parts_.begin(), b.parts_.end());
    std::sort(all.begin(), all.end(),
              [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
    return IntervalSet(std::move(all));
  }

  const std::vector<Interval>& parts() const noexcept { return parts_; }
  bool empty() const noexcept { return parts_.empty(); }

  double length() const {
    double s = 0.0;
    for (const auto& iv : parts_) s += iv.length();
    return s;
  }

  bool operator==(const IntervalSet&) const = default;

 private:
  std::vector<Interval> parts_;
};

/// One polynomial piece of a density, with its antiderivative cached.
struct PolynomialPiece {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> coeffs;
  std::vector<double> primitive;

  double value(double x) const { return poly::eval<double>(coeffs, x); }
  double integral(double a, double b) const {
    return poly::eval<double>(primitive, b) - poly::eval<double>(primitive, a);
  }
};

// ---------------------------------------------------------------------------
// Raw (unchecked) descriptions and validation errors

struct RawPiece {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> coeffs;

  bool operator==(const RawPiece&) const = default;
};

struct RawAgent {
  std::string name;
  std::vector<RawPiece> pieces;

  bool operator==(const RawAgent&) const = default;
};

struct RawInstance {
  std::vector<double> claims;
  std::vector<RawAgent> agents;

  bool operator==(const RawInstance&) const = default;
};

struct Violation {
  std::optional<std::size_t> agent;
  std::optional<std::size_t> piece;
  std::string message;

  std::string describe() const {
    std::ostringstream os;
    if (agent) os << "agent " << *agent << ": ";
    if (piece) os << "piece " << *piece << ": ";
    os << message;
    return os.str();
  }
};

/// Thrown when an instance or density fails validation; carries every
/// violation found, not only the first.
class InstanceError : public std::invalid_argument {
 public:
  explicit InstanceError(std::vector<Violation> violations)
      : std::invalid_argument(summarize(violations)),
        violations_(std::move(violations)) {}

  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  static std::string summarize(const std::vector<Violation>& vs) {
    std::string s = "invalid instance";
    for (const auto& v : vs) s += "\n  " + v.describe();
    return s;
  }
  std::vector<Violation> violations_;
};

namespace detail {

// Grid resolution for the (heuristic) nonnegativity check.
inline constexpr std::size_t kNonnegGrid = 1024;
inline constexpr double kJoinTol = 1e-12;

inline std::vector<Violation> check_pieces(const std::vector<RawPiece>& pieces,
                                           std::optional<std::size_t> agent) {
  std::vector<Violation> out;
  auto report = [&](std::optional<std::size_t> piece, std::string msg) {
    out.push_back({agent, piece, std::move(msg)});
  };
  if (pieces.empty()) {
    report(std::nullopt, "density has no pieces");
    return out;
  }
  if (std::abs(pieces.front().lo) > kJoinTol) {
    report(0, "first piece does not start at 0");
  }
  if (std::abs(pieces.back().hi - 1.0) > kJoinTol) {
    report(pieces.size() - 1, "last piece does not end at 1");
  }
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    const auto& p = pieces[k];
    if (!std::isfinite(p.lo) || !std::isfinite(p.hi) || !(p.lo < p.hi)) {
      report(k, "interval is empty, reversed or not finite");
      continue;
    }
    if (p.lo < -kJoinTol || p.hi > 1.0 + kJoinTol) {
      report(k, "interval leaves [0,1]");
    }
    if (k > 0) {
      const double prev = pieces[k - 1].hi;
      if (p.lo > prev + kJoinTol) report(k, "gap before this piece");
      if (p.lo < prev - kJoinTol) report(k, "overlaps the previous piece");
    }
    if (p.coeffs.empty()) {
      report(k, "no coefficients");
      continue;
    }
    bool finite = true;
    double scale = 1.0;
    for (double c : p.coeffs) {
      finite = finite && std::isfinite(c);
      scale += std::abs(c);
    }
    if (!finite) {
      report(k, "non-finite coefficient");
      continue;
    }
    const double floor = -1e-10 * scale;
    for (std::size_t g = 0; g <= kNonnegGrid + 1; ++g) {
      // g = 0 and g = kNonnegGrid + 1 are the endpoints themselves.
      const double x = g == 0 ? p.lo
                       : g == kNonnegGrid + 1
                           ? p.hi
                           : p.lo + (p.hi - p.lo) * (static_cast<double>(g) - 0.5) /
                                        static_cast<double>(kNonnegGrid);
      const double v = poly::eval<double>(p.coeffs, x);
      if (v < floor) {
        std::ostringstream os;
        os << "negative density " << v << " at x=" << x;
        report(k, os.str());
        break;
      }
    }
  }
  return out;
}

}  // namespace detail

/// Piecewise-polynomial density on [0,1]. Immutable once constructed.
class DensityFunction {
 public:
  /// Validates the pieces; throws InstanceError listing every problem.
  explicit DensityFunction(std::vector<RawPiece> pieces, std::string name = {})
      : name_(std::move(name)) {
    auto bad = detail::check_pieces(pieces, std::nullopt);
    if (!bad.empty()) throw InstanceError(std::move(bad));
    build(std::move(pieces));
    if (!(total_mass_ > 0.0) || !std::isfinite(total_mass_)) {
      throw InstanceError({{std::nullopt, std::nullopt, "total mass is not positive"}});
    }
  }

  /// Single polynomial on all of [0,1].
  static DensityFunction polynomial(std::vector<double> coeffs, std::string name = {}) {
    return DensityFunction({RawPiece{0.0, 1.0, std::move(coeffs)}}, std::move(name));
  }

  const std::string& name() const noexcept { return name_; }
  const std::vector<PolynomialPiece>& pieces() const noexcept { return pieces_; }
  double total_mass() const noexcept { return total_mass_; }

  /// Index of the piece owning x; the left piece wins at shared endpoints.
  std::size_t piece_index(double x) const {
    auto it = std::lower_bound(pieces_.begin(), pieces_.end(), x,
                               [](const PolynomialPiece& p, double v) { return p.hi < v; });
    if (it == pieces_.end()) --it;
    return static_cast<std::size_t>(it - pieces_.begin());
  }

  double operator()(double x) const {
    if (!(x >= 0.0 && x <= 1.0)) {
      throw std::domain_error("density evaluated outside [0,1]");
    }
    return pieces_[piece_index(x)].value(x);
  }

  /// Exact integral over [a, b] with 0 <= a <= b <= 1.
  double integral(double a, double b) const {
    double s = 0.0;
    for (const auto& p : pieces_) {
      const double lo = std::max(a, p.lo);
      const double hi = std::min(b, p.hi);
      if (hi > lo) s += p.integral(lo, hi);
    }
    return s;
  }

  RawAgent raw() const {
    RawAgent a{name_, {}};
    for (const auto& p : pieces_) a.pieces.push_back({p.lo, p.hi, p.coeffs});
    return a;
  }

  /// Same shape, coefficients multiplied by `factor`.
  DensityFunction scaled(double factor) const {
    std::vector<RawPiece> raw_pieces;
    for (const auto& p : pieces_) {
      RawPiece r{p.lo, p.hi, p.coeffs};
      for (double& c : r.coeffs) c *= factor;
      raw_pieces.push_back(std::move(r));
    }
    return DensityFunction(std::move(raw_pieces), name_);
  }

 private:
  void build(std::vector<RawPiece> pieces) {
    pieces_.reserve(pieces.size());
    for (std::size_t k = 0; k < pieces.size(); ++k) {
      auto& r = pieces[k];
      PolynomialPiece p;
      // Snap shared endpoints so the pieces tile [0,1] exactly.
      p.lo = k == 0 ? 0.0 : pieces_.back().hi;
      p.hi = k + 1 == pieces.size() ? 1.0 : r.hi;
      p.primitive = poly::antiderivative<double>(r.coeffs);
      p.coeffs = std::move(r.coeffs);
      pieces_.push_back(std::move(p));
    }
    total_mass_ = integral(0.0, 1.0);
  }

  std::string name_;
  std::vector<PolynomialPiece> pieces_;
  double total_mass_ = 0.0;
};

inline double eval_density(const DensityFunction& f, double x) { return f(x); }

inline double measure_of(const DensityFunction& f, const IntervalSet& s) {
  double total = 0.0;
  for (const auto& iv : s.parts()) total += f.integral(iv.lo, iv.hi);
  return total;
}

inline double total_mass(const DensityFunction& f) { return f.total_mass(); }

/// n >= 2 agents with validated densities and an interior claim vector.
class Instance {
 public:
  Instance(std::vector<DensityFunction> densities, std::vector<double> claims)
      : densities_(std::move(densities)), claims_(std::move(claims)) {
    auto bad = check_claims(claims_, densities_.size());
    if (!bad.empty()) throw InstanceError(std::move(bad));
  }

  std::size_t n() const noexcept { return densities_.size(); }
  const std::vector<DensityFunction>& densities() const noexcept { return densities_; }
  const DensityFunction& density(std::size_t i) const { return densities_.at(i); }
  const std::vector<double>& claims() const noexcept { return claims_; }

  std::vector<double> masses() const {
    std::vector<double> m;
    m.reserve(n());
    for (const auto& f : densities_) m.push_back(f.total_mass());
    return m;
  }

  /// True when every measure is a probability measure (to 1e-9).
  bool is_normalized(double tol = 1e-9) const {
    return std::all_of(densities_.begin(), densities_.end(), [&](const auto& f) {
      return std::abs(f.total_mass() - 1.0) <= tol;
    });
  }

  Instance normalized() const {
    std::vector<DensityFunction> out;
    for (const auto& f : densities_) out.push_back(f.scaled(1.0 / f.total_mass()));
    return Instance(std::move(out), claims_);
  }

  Instance with_claims(std::vector<double> claims) const {
    return Instance(densities_, std::move(claims));
  }

  RawInstance raw() const {
    RawInstance r{claims_, {}};
    for (const auto& f : densities_) r.agents.push_back(f.raw());
    return r;
  }

  static std::vector<Violation> check_claims(const std::vector<double>& claims,
                                             std::size_t n) {
    std::vector<Violation> out;
    if (n < 2) out.push_back({std::nullopt, std::nullopt, "need at least two agents"});
    if (claims.size() != n) {
      out.push_back({std::nullopt, std::nullopt, "claim vector length differs from agent count"});
      return out;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < claims.size(); ++i) {
      if (!(claims[i] > 0.0) || !std::isfinite(claims[i])) {
        out.push_back({i, std::nullopt, "claim is not strictly positive (alpha must be interior)"});
      }
      sum += claims[i];
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      out.push_back({std::nullopt, std::nullopt, "claims do not sum to 1"});
    }
    return out;
  }

 private:
  std::vector<DensityFunction> densities_;
  std::vector<double> claims_;
};

/// Checks a raw description and returns a usable Instance, or throws
/// InstanceError with one entry per violation (agent / piece indexed).
inline Instance validate_instance(const RawInstance& raw) {
  std::vector<Violation> bad = Instance::check_claims(raw.claims, raw.agents.size());
  for (std::size_t i = 0; i < raw.agents.size(); ++i) {
    auto v = detail::check_pieces(raw.agents[i].pieces, i);
    bad.insert(bad.end(), v.begin(), v.end());
  }
  if (!bad.empty()) throw InstanceError(std::move(bad));

  std::vector<DensityFunction> densities;
  for (std::size_t i = 0; i < raw.agents.size(); ++i) {
    try {
      densities.emplace_back(raw.agents[i].pieces, raw.agents[i].name);
    } catch (const InstanceError&) {
      bad.push_back({i, std::nullopt, "total mass is not positive"});
    }
  }
  if (!bad.empty()) throw InstanceError(std::move(bad));
  return Instance(std::move(densities), raw.claims);
}

}  // namespace fairbound

#endif  // FAIRBOUND_MEASURE_MODEL_HPP
