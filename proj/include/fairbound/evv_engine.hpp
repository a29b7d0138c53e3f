/**
 * @file evv_engine.hpp
 * @brief Weighted maxsum partitions and their efficient value vectors.
 *
 * For a weight vector beta on the simplex, the partition that gives each
 * point x to an agent maximizing beta_k f_k(x) maximizes
 * sum_i beta_i mu_i(A_i). Its value vector u_i = mu_i(A_i) is the EVV for
 * beta: the point where the hyperplane with normal beta supports the
 * partition range.
 */

#ifndef FAIRBOUND_EVV_ENGINE_HPP
#define FAIRBOUND_EVV_ENGINE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

#include "measure_model.hpp"
#include "polynomial.hpp"

namespace fairbound {

/// A point of the closed simplex: beta_i >= 0, sum beta_i = 1.
class WeightVector {
 public:
  WeightVector() = default;

  explicit WeightVector(std::vector<double> beta) : beta_(std::move(beta)) {
    if (beta_.empty()) throw std::invalid_argument("WeightVector: empty");
    double s = 0.0;
    for (double b : beta_) {
      if (!(b >= 0.0) || !std::isfinite(b)) {
        throw std::invalid_argument("WeightVector: components must be finite and >= 0");
      }
      s += b;
    }
    if (std::abs(s - 1.0) > 1e-9) {
      throw std::invalid_argument("WeightVector: components must sum to 1");
    }
  }

  /// Rescales a nonnegative, nonzero vector onto the simplex.
  static WeightVector normalize(std::vector<double> v) {
    double s = 0.0;
    for (double b : v) {
      if (!(b >= 0.0) || !std::isfinite(b)) {
        throw std::invalid_argument("WeightVector::normalize: negative or non-finite entry");
      }
      s += b;
    }
    if (!(s > 0.0)) throw std::invalid_argument("WeightVector::normalize: zero vector");
    for (double& b : v) b /= s;
    return WeightVector(std::move(v));
  }

  static WeightVector uniform(std::size_t n) {
    return WeightVector(std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  static WeightVector corner(std::size_t n, std::size_t i) {
    std::vector<double> v(n, 0.0);
    v.at(i) = 1.0;
    return WeightVector(std::move(v));
  }

  std::size_t size() const noexcept { return beta_.size(); }
  double operator[](std::size_t i) const { return beta_[i]; }
  const std::vector<double>& values() const noexcept { return beta_; }

  bool operator==(const WeightVector&) const = default;

 private:
  std::vector<double> beta_;
};

/// Scan resolution for locating crossings of the weighted densities.
struct EngineConfig {
  std::size_t n_scan = 4096;
  double tol_x = 1e-12;
};

/// Cells [breakpoints[c], breakpoints[c+1]] with owner owners[c]; adjacent
/// cells always have different owners.
class LabeledPartition {
 public:
  LabeledPartition() = default;
  LabeledPartition(std::size_t agents, std::vector<double> breakpoints,
                   std::vector<std::size_t> owners)
      : agents_(agents), breakpoints_(std::move(breakpoints)), owners_(std::move(owners)) {
    if (breakpoints_.size() != owners_.size() + 1) {
      throw std::invalid_argument("LabeledPartition: breakpoints/owners size mismatch");
    }
  }

  /// Whole cake to one agent.
  static LabeledPartition single_owner(std::size_t agents, std::size_t owner) {
    return LabeledPartition(agents, {0.0, 1.0}, {owner});
  }

  std::size_t agents() const noexcept { return agents_; }
  std::size_t cell_count() const noexcept { return owners_.size(); }
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  const std::vector<std::size_t>& owners() const noexcept { return owners_; }
  bool empty() const noexcept { return owners_.empty(); }

  IntervalSet agent_set(std::size_t agent) const {
    std::vector<Interval> parts;
    for (std::size_t c = 0; c < owners_.size(); ++c) {
      if (owners_[c] == agent) parts.push_back({breakpoints_[c], breakpoints_[c + 1]});
    }
    return IntervalSet(std::move(parts));
  }

  bool operator==(const LabeledPartition&) const = default;

 private:
  std::size_t agents_ = 0;
  std::vector<double> breakpoints_;
  std::vector<std::size_t> owners_;
};

/// An efficient value vector together with the weights and partition that
/// produced it. Records built from bare values (from_values) carry an
/// empty partition.
struct EvvRecord {
  WeightVector beta;
  LabeledPartition partition;
  std::vector<double> u;
  double maxsum = 0.0;

  static EvvRecord from_values(WeightVector beta, std::vector<double> u) {
    if (beta.size() != u.size()) {
      throw std::invalid_argument("EvvRecord: beta and u differ in length");
    }
    const double ms = std::inner_product(u.begin(), u.end(), beta.values().begin(), 0.0);
    return EvvRecord{std::move(beta), {}, std::move(u), ms};
  }
};

inline double maxsum_value(const EvvRecord& rec) {
  double s = 0.0;
  for (std::size_t i = 0; i < rec.u.size(); ++i) s += rec.beta[i] * rec.u[i];
  return s;
}

namespace detail {

// Arg max of beta_k p_k(x) over the given per-agent pieces; ties go to the
// lowest index.
inline std::size_t argmax_label(const WeightVector& beta,
                                const std::vector<const PolynomialPiece*>& pieces,
                                double x) {
  std::size_t best = 0;
  double best_v = beta[0] * pieces[0]->value(x);
  for (std::size_t k = 1; k < pieces.size(); ++k) {
    const double v = beta[k] * pieces[k]->value(x);
    if (v > best_v) {
      best_v = v;
      best = k;
    }
  }
  return best;
}

struct Cell {
  double lo;
  double hi;
  std::size_t owner;
};

// Splits [a, b] between label k (winning at a) and label h (winning at b)
// by bisecting beta_k p_k - beta_h p_h. If a third agent wins at the
// crossing, both halves are split again.
inline void emit_cells(const WeightVector& beta,
                       const std::vector<const PolynomialPiece*>& pieces, double a,
                       double b, std::size_t k, std::size_t h, double tol_x, int depth,
                       std::vector<Cell>& out) {
  if (k == h) {
    out.push_back({a, b, k});
    return;
  }
  const PolynomialPiece& pk = *pieces[k];
  const PolynomialPiece& ph = *pieces[h];
  const double bk = beta[k];
  const double bh = beta[h];
  auto k_wins = [&](double x) {
    const double g = bk * pk.value(x) - bh * ph.value(x);
    return k < h ? g >= 0.0 : g > 0.0;
  };
  const double c = poly::bisect_transition(k_wins, a, b, tol_x);
  const std::size_t l = argmax_label(beta, pieces, c);
  if (l == k || l == h || depth >= 16) {
    out.push_back({a, c, k});
    out.push_back({c, b, h});
    return;
  }
  emit_cells(beta, pieces, a, c, k, l, tol_x, depth + 1, out);
  emit_cells(beta, pieces, c, b, l, h, tol_x, depth + 1, out);
}

}  // namespace detail

/// Partition assigning each point to arg max_k beta_k f_k(x), lowest index
/// on ties. Crossings are found between the probes of a uniform scan grid
/// refined by every piece endpoint, then bisected to cfg.tol_x.
inline LabeledPartition weighted_argmax_partition(const Instance& inst,
                                                  const WeightVector& beta,
                                                  const EngineConfig& cfg = {}) {
  const std::size_t n = inst.n();
  if (beta.size() != n) {
    throw std::invalid_argument("weighted_argmax_partition: beta has wrong length");
  }
  if (cfg.n_scan == 0) throw std::invalid_argument("EngineConfig: n_scan must be >= 1");

  std::vector<double> knots;
  knots.reserve(cfg.n_scan + 1);
  for (std::size_t g = 0; g <= cfg.n_scan; ++g) {
    knots.push_back(static_cast<double>(g) / static_cast<double>(cfg.n_scan));
  }
  for (const auto& f : inst.densities()) {
    for (const auto& p : f.pieces()) {
      knots.push_back(p.lo);
      knots.push_back(p.hi);
    }
  }
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  std::vector<detail::Cell> cells;
  std::vector<const PolynomialPiece*> pieces(n);
  for (std::size_t s = 0; s + 1 < knots.size(); ++s) {
    const double a = knots[s];
    const double b = knots[s + 1];
    const double mid = a + (b - a) / 2;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& f = inst.density(i);
      pieces[i] = &f.pieces()[f.piece_index(mid)];
    }
    const std::size_t la = detail::argmax_label(beta, pieces, a);
    const std::size_t lb = detail::argmax_label(beta, pieces, b);
    detail::emit_cells(beta, pieces, a, b, la, lb, cfg.tol_x, 0, cells);
  }

  std::vector<double> breaks{0.0};
  std::vector<std::size_t> owners;
  for (const auto& c : cells) {
    if (!(c.hi > c.lo)) continue;
    if (!owners.empty() && owners.back() == c.owner) {
      breaks.back() = c.hi;
    } else {
      owners.push_back(c.owner);
      breaks.push_back(c.hi);
    }
  }
  breaks.back() = 1.0;
  return LabeledPartition(n, std::move(breaks), std::move(owners));
}

inline EvvRecord compute_evv(const Instance& inst, const WeightVector& beta,
                             const EngineConfig& cfg = {}) {
  EvvRecord rec;
  rec.beta = beta;
  rec.partition = weighted_argmax_partition(inst, beta, cfg);
  rec.u.resize(inst.n());
  for (std::size_t i = 0; i < inst.n(); ++i) {
    rec.u[i] = measure_of(inst.density(i), rec.partition.agent_set(i));
  }
  rec.maxsum = maxsum_value(rec);
  return rec;
}

/// EVV for beta = e^i: the whole cake to agent i, u = mu_i(C) e_i.
inline EvvRecord corner_evv(const Instance& inst, std::size_t i) {
  EvvRecord rec;
  rec.beta = WeightVector::corner(inst.n(), i);
  rec.partition = LabeledPartition::single_owner(inst.n(), i);
  rec.u.assign(inst.n(), 0.0);
  rec.u[i] = inst.density(i).total_mass();
  rec.maxsum = rec.u[i];
  return rec;
}

/// Evaluates several EVVs, splitting the work over at most `threads`
/// threads. Results are in input order regardless of thread count.
inline std::vector<EvvRecord> compute_evvs(const Instance& inst,
                                           const std::vector<WeightVector>& betas,
                                           const EngineConfig& cfg = {},
                                           std::size_t threads = 1) {
  std::vector<EvvRecord> out(betas.size());
  threads = std::max<std::size_t>(1, std::min(threads, betas.size()));
  if (threads == 1) {
    for (std::size_t k = 0; k < betas.size(); ++k) out[k] = compute_evv(inst, betas[k], cfg);
    return out;
  }
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        for (std::size_t k = t; k < betas.size(); k += threads) {
          out[k] = compute_evv(inst, betas[k], cfg);
        }
      });
    }
  }
  return out;
}

}  // namespace fairbound

#endif  // FAIRBOUND_EVV_ENGINE_HPP
