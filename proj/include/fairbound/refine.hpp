/**
 * @file refine.hpp
 * @brief Iterative improvement of the bounds with a set of supporting EVVs.
 *
 * The upper bound improves with every EVV ever computed (minimum of the
 * hyperplane ratios). The lower bound is carried by m supporting EVVs
 * whose cone contains alpha; a new EVV u* replaces supporting EVV u^j when
 *
 *   det(alpha, Ubar_{*j-k}) * det(u^j, Ubar_{*j-k}) <= 0   for all k != j,
 *
 * where Ubar_{*j-k} is Ubar with column j replaced by u* and column k
 * deleted. That test certifies u* in cone(U) and alpha in the cone of the
 * swapped set, so the lower bound can only go up.
 */

#ifndef FAIRBOUND_REFINE_HPP
#define FAIRBOUND_REFINE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bound_core.hpp"
#include "evv_engine.hpp"
#include "linalg.hpp"
#include "measure_model.hpp"

namespace fairbound {

/// Supporting EVVs for the lower bound plus the append-only pool feeding
/// the upper bound.
class SupportSet {
 public:
  SupportSet(EvvBasis basis, std::vector<EvvRecord> pool, std::span<const double> alpha)
      : basis_(std::move(basis)), pool_(std::move(pool)), alpha_(alpha.begin(), alpha.end()) {
    auto sol = lower_bound(basis_, alpha_);
    current_.lower = sol.r_star;
    current_.cone_status = sol.status;
    current_.certificate = std::move(sol);
    current_.basis = basis_.evvs();
    if (!pool_.empty()) {
      const auto ub = upper_bound(pool_, alpha_);
      current_.upper = ub.value;
      current_.argmin_upper = ub.argmin;
    }
  }

  /// Corner points e^i = mu_i(C) e_i as the initial basis and pool; their
  /// cone is the whole orthant, so it contains every interior alpha.
  static SupportSet corners(const Instance& inst, std::span<const double> alpha) {
    std::vector<EvvRecord> evvs;
    for (std::size_t i = 0; i < inst.n(); ++i) evvs.push_back(corner_evv(inst, i));
    auto basis = EvvBasis::make(evvs);
    if (!basis) throw NumericalInconsistency("corner basis is singular");
    return SupportSet(std::move(*basis), std::move(evvs), alpha);
  }

  const EvvBasis& basis() const noexcept { return basis_; }
  const std::vector<EvvRecord>& pool() const noexcept { return pool_; }
  const BoundsResult& current() const noexcept { return current_; }
  const std::vector<double>& alpha() const noexcept { return alpha_; }

  /// Appends to the upper-bound pool; the upper bound never increases.
  void add_to_pool(EvvRecord rec) {
    const double r = hyperplane_ratio(rec, alpha_);
    pool_.push_back(std::move(rec));
    if (r < current_.upper) {
      current_.upper = r;
      current_.argmin_upper = pool_.size() - 1;
    }
  }

  /// Same pool, new supporting basis with its already-computed solution.
  SupportSet with_basis(EvvBasis basis, ConeSolution sol) const {
    SupportSet out = *this;
    out.basis_ = std::move(basis);
    out.current_.lower = sol.r_star;
    out.current_.cone_status = sol.status;
    out.current_.certificate = std::move(sol);
    out.current_.basis = out.basis_.evvs();
    return out;
  }

 private:
  EvvBasis basis_;
  std::vector<EvvRecord> pool_;
  std::vector<double> alpha_;
  BoundsResult current_;
};

/// Outcome of the replacement test for one candidate.
struct SwapDecision {
  std::optional<std::size_t> j;
  /// Every inequality for the chosen j was strict.
  bool strict = false;
  /// k with det(alpha, Ubar_{*j-k}) = 0 for the chosen j: u^k can go.
  std::vector<std::size_t> equality_ks;
  /// signs[j][k] of det(alpha, .) * det(u^j, .); 0 on the diagonal and for
  /// products within tolerance of zero.
  std::vector<std::vector<int>> signs;
};

/// Scans j = 1..m and returns the first j satisfying the replacement
/// condition for every k != j. With m = 1 there is no k; the candidate
/// then qualifies only if alpha lies on its ray.
inline SwapDecision swap_test(const SupportSet& support, const EvvRecord& candidate) {
  const EvvBasis& basis = support.basis();
  const auto& alpha = support.alpha();
  const std::size_t m = basis.m();
  SwapDecision out;
  out.signs.assign(m, std::vector<int>(m, 0));

  if (m == 1) {
    auto swapped = basis.replaced(0, candidate);
    if (swapped) {
      const auto rep = cone_membership(*swapped, alpha);
      if (rep.status != ConeStatus::outside) {
        out.j = 0;
        out.strict = rep.status == ConeStatus::interior;
      }
    }
    return out;
  }

  const auto abar = basis.restrict(alpha);
  const auto ustar = basis.restrict(candidate.u);
  const double abar_norm = norm2<double>(abar);
  const double ustar_norm = norm2<double>(ustar);
  if (!(ustar_norm > 0.0)) return out;

  for (std::size_t j = 0; j < m; ++j) {
    Matrix with_star = basis.ubar();
    with_star.set_column(j, ustar);
    // Nonsingular after the swap, else u* is coplanar with the others.
    {
      double scale = 1.0;
      for (std::size_t c = 0; c < m; ++c) scale *= norm2<double>(with_star.column(c));
      if (!(std::abs(determinant(with_star)) > kEpsDet * scale)) continue;
    }
    const auto uj = basis.ubar().column(j);
    const double uj_norm = norm2<double>(uj);
    bool ok = true;
    bool strict = true;
    std::vector<std::size_t> eq;
    for (std::size_t k = 0; k < m; ++k) {
      if (k == j) continue;
      const Matrix rest = with_star.drop_column(k);
      double rest_scale = 1.0;
      for (std::size_t c = 0; c < rest.cols(); ++c) rest_scale *= norm2<double>(rest.column(c));
      Matrix a(m, m);
      Matrix b(m, m);
      a.set_column(0, abar);
      b.set_column(0, uj);
      for (std::size_t c = 0; c < rest.cols(); ++c) {
        const auto col = rest.column(c);
        a.set_column(c + 1, col);
        b.set_column(c + 1, col);
      }
      const double da = determinant(a) / (abar_norm * rest_scale);
      const double db = determinant(b) / (uj_norm * rest_scale);
      if (std::abs(da) <= kEpsDet || std::abs(db) <= kEpsDet) {
        out.signs[j][k] = 0;
        strict = false;
        if (std::abs(da) <= kEpsDet) eq.push_back(k);
      } else if (da * db > 0.0) {
        out.signs[j][k] = 1;
        ok = false;
      } else {
        out.signs[j][k] = -1;
      }
    }
    if (ok && !out.j) {
      out.j = j;
      out.strict = strict;
      out.equality_ks = std::move(eq);
    }
  }
  return out;
}

struct SwapResult {
  SupportSet support;
  bool applied = false;
  std::string diagnostic;
};

/// Puts the candidate in position j, dropping any u^k flagged by an
/// equality, and re-verifies the cone. If verification fails or the lower
/// bound would drop (possible only through rounding) the original set is
/// returned with applied = false and a diagnostic.
inline SwapResult apply_swap(const SupportSet& support, const SwapDecision& decision,
                             const EvvRecord& candidate) {
  auto rollback = [&](std::string why) { return SwapResult{support, false, std::move(why)}; };
  if (!decision.j) return rollback("no replacement index");

  auto next = support.basis().replaced(*decision.j, candidate);
  if (!next) return rollback("post-swap basis is singular");
  if (!decision.equality_ks.empty()) {
    next = next->without(decision.equality_ks);
    if (!next) return rollback("basis singular after discarding coplanar EVVs");
  }
  const auto& alpha = support.alpha();
  if (cone_membership(*next, alpha).status == ConeStatus::outside) {
    return rollback("alpha left the cone after the swap");
  }
  next = discard_zero_weight(*next, alpha);
  if (!next) return rollback("no EVV left with positive weight");

  ConeSolution sol;
  try {
    sol = lower_bound(*next, alpha);
  } catch (const std::exception& e) {
    return rollback(e.what());
  }
  const double previous = *support.current().lower;
  if (sol.r_star < previous) {
    std::ostringstream os;
    os << "lower bound would decrease from " << previous << " to " << sol.r_star;
    return rollback(os.str());
  }

  return SwapResult{support.with_basis(std::move(*next), std::move(sol)), true, {}};
}

enum class RefineMode { random, subgradient };

inline std::string_view to_string(RefineMode m) {
  return m == RefineMode::random ? "random" : "subgradient";
}

struct RefineConfig {
  RefineMode mode = RefineMode::subgradient;
  std::size_t max_iter = 200;
  std::uint64_t seed = 42;
  /// gamma_t = step / sqrt(t); zero freezes beta.
  double step = 0.5;
  /// Lower bound on each beta_i after projection.
  double floor = 1e-6;
  double gap_tol = 1e-3;
  EngineConfig engine{};

  void validate(std::size_t n) const {
    if (max_iter < 1) throw std::invalid_argument("RefineConfig: max_iter must be >= 1");
    if (!(floor > 0.0 && floor < 1.0 / static_cast<double>(n))) {
      throw std::invalid_argument("RefineConfig: floor must lie in (0, 1/n)");
    }
    if (!(step >= 0.0) || !std::isfinite(step)) {
      throw std::invalid_argument("RefineConfig: step must be finite and >= 0");
    }
    if (!(gap_tol >= 0.0)) throw std::invalid_argument("RefineConfig: gap_tol must be >= 0");
  }
};

struct RefineStep {
  std::size_t iteration = 0;
  std::vector<double> beta;
  std::vector<double> u;
  long swap_index = -1;
  double lower = 0.0;
  double upper = 0.0;

  bool operator==(const RefineStep&) const = default;
};

struct RefineTrace {
  std::vector<RefineStep> steps;

  std::size_t accepted_swaps() const {
    return static_cast<std::size_t>(std::count_if(
        steps.begin(), steps.end(), [](const RefineStep& s) { return s.swap_index >= 0; }));
  }

  double acceptance_rate() const {
    return steps.empty() ? 0.0
                         : static_cast<double>(accepted_swaps()) /
                               static_cast<double>(steps.size());
  }

  /// iteration, beta_1..beta_n, u_1..u_n, swap_index, lower, upper
  void write_csv(std::ostream& os) const {
    const std::size_t n = steps.empty() ? 0 : steps.front().beta.size();
    os << "iteration";
    for (std::size_t i = 1; i <= n; ++i) os << ",beta_" << i;
    for (std::size_t i = 1; i <= n; ++i) os << ",u_" << i;
    os << ",swap_index,lower,upper\n";
    const auto old_prec = os.precision(17);
    for (const auto& s : steps) {
      os << s.iteration;
      for (double b : s.beta) os << ',' << b;
      for (double v : s.u) os << ',' << v;
      os << ',' << s.swap_index << ',' << s.lower << ',' << s.upper << '\n';
    }
    os.precision(old_prec);
  }

  static RefineTrace read_csv(std::istream& is) {
    RefineTrace tr;
    std::string line;
    if (!std::getline(is, line)) return tr;
    const auto header_fields = std::count(line.begin(), line.end(), ',') + 1;
    if (header_fields < 4 || (header_fields - 4) % 2 != 0) {
      throw std::invalid_argument("trace CSV: malformed header");
    }
    const auto n = static_cast<std::size_t>((header_fields - 4) / 2);
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      std::vector<std::string> f;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) f.push_back(cell);
      if (f.size() != static_cast<std::size_t>(header_fields)) {
        throw std::invalid_argument("trace CSV: wrong field count");
      }
      RefineStep s;
      s.iteration = std::stoul(f[0]);
      for (std::size_t i = 0; i < n; ++i) s.beta.push_back(std::stod(f[1 + i]));
      for (std::size_t i = 0; i < n; ++i) s.u.push_back(std::stod(f[1 + n + i]));
      s.swap_index = std::stol(f[1 + 2 * n]);
      s.lower = std::stod(f[2 + 2 * n]);
      s.upper = std::stod(f[3 + 2 * n]);
      tr.steps.push_back(std::move(s));
    }
    return tr;
  }
};

struct RefineOutcome {
  BoundsResult bounds;
  RefineTrace trace;
  bool gap_met = false;
  std::size_t iterations = 0;
};

/// Euclidean projection onto {x : x_i >= floor, sum x_i = 1}.
inline std::vector<double> project_to_simplex(std::span<const double> v, double floor = 0.0) {
  const std::size_t n = v.size();
  const double radius = 1.0 - floor * static_cast<double>(n);
  if (n == 0 || radius < 0.0) throw std::invalid_argument("project_to_simplex: bad floor");
  std::vector<double> w(v.begin(), v.end());
  for (double& x : w) x -= floor;
  std::vector<double> sorted = w;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    cumsum += sorted[k];
    const double t = (cumsum - radius) / static_cast<double>(k + 1);
    if (sorted[k] - t > 0.0) theta = t;
  }
  for (double& x : w) x = std::max(x - theta, 0.0) + floor;
  return w;
}

namespace detail {

// Adds the EVV to the pool and tries it as a replacement; returns the
// swap index or -1.
inline long process_candidate(SupportSet& support, const EvvRecord& rec) {
  support.add_to_pool(rec);
  const auto decision = swap_test(support, rec);
  if (!decision.j) return -1;
  auto result = apply_swap(support, decision, rec);
  if (!result.applied) return -1;
  support = std::move(result.support);
  return static_cast<long>(*decision.j);
}

inline RefineStep make_step(std::size_t it, const EvvRecord& rec, long swap,
                            const SupportSet& s) {
  return RefineStep{it, rec.beta.values(), rec.u, swap, *s.current().lower, s.current().upper};
}

/// Uniform sample on the simplex: normalized Exp(1) variates built from the
/// raw 64-bit stream so results do not depend on the library's
/// distribution implementations.
inline WeightVector sample_simplex(std::mt19937_64& gen, std::size_t n) {
  std::vector<double> e(n);
  double s = 0.0;
  do {
    s = 0.0;
    for (double& x : e) {
      const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
      x = -std::log1p(-u);
      s += x;
    }
  } while (!(s > 0.0));
  return WeightVector::normalize(std::move(e));
}

inline RefineOutcome finish(const SupportSet& s, RefineTrace trace, std::size_t iterations,
                            double gap_tol) {
  RefineOutcome out;
  out.bounds = s.current();
  out.trace = std::move(trace);
  out.iterations = iterations;
  out.gap_met = out.bounds.gap() <= gap_tol;
  return out;
}

}  // namespace detail

/// Random search: starts from the corner basis, offers the EVV of the
/// uniform weights (iteration 0, which yields Legut's basis), then `count`
/// EVVs of uniformly sampled weights. count = 0 evaluates nothing and
/// returns the corner-basis bounds.
inline RefineOutcome refine_random(const Instance& inst, std::span<const double> alpha,
                                   std::size_t count, std::uint64_t seed,
                                   const EngineConfig& engine = {}) {
  auto support = SupportSet::corners(inst, alpha);
  RefineTrace trace;
  if (count == 0) return detail::finish(support, std::move(trace), 0, 0.0);
  {
    const auto rec = compute_evv(inst, WeightVector::uniform(inst.n()), engine);
    const long sw = detail::process_candidate(support, rec);
    trace.steps.push_back(detail::make_step(0, rec, sw, support));
  }
  std::mt19937_64 gen(seed);
  for (std::size_t it = 1; it <= count; ++it) {
    const auto rec = compute_evv(inst, detail::sample_simplex(gen, inst.n()), engine);
    const long sw = detail::process_candidate(support, rec);
    trace.steps.push_back(detail::make_step(it, rec, sw, support));
  }
  return detail::finish(support, std::move(trace), count, 0.0);
}

/// Projected subgradient descent on the hyperplane ratio
/// rbar(beta) = (beta . u^beta) / (beta . alpha), starting at uniform
/// weights:
///   g = (u - rbar alpha) / (beta . alpha),
///   beta <- P(beta - step / sqrt(t) g)
/// with P the projection onto the simplex with floor. Each iterate's EVV
/// feeds both bounds. Stops once upper - lower <= gap_tol.
inline RefineOutcome refine_subgradient(const Instance& inst, std::span<const double> alpha,
                                        const RefineConfig& cfg) {
  cfg.validate(inst.n());
  auto support = SupportSet::corners(inst, alpha);
  RefineTrace trace;
  auto beta = WeightVector::uniform(inst.n());
  std::size_t it = 1;
  for (; it <= cfg.max_iter; ++it) {
    const auto rec = compute_evv(inst, beta, cfg.engine);
    const long sw = detail::process_candidate(support, rec);
    trace.steps.push_back(detail::make_step(it, rec, sw, support));
    if (support.current().gap() <= cfg.gap_tol) break;

    const double ba = dot<double>(beta.values(), alpha);
    const double rbar = hyperplane_ratio(rec, alpha);
    const double gamma = cfg.step / std::sqrt(static_cast<double>(it));
    std::vector<double> next(inst.n());
    for (std::size_t i = 0; i < inst.n(); ++i) {
      next[i] = beta[i] - gamma * (rec.u[i] - rbar * alpha[i]) / ba;
    }
    beta = WeightVector::normalize(project_to_simplex(next, cfg.floor));
  }
  return detail::finish(support, std::move(trace), std::min(it, cfg.max_iter), cfg.gap_tol);
}

}  // namespace fairbound

#endif  // FAIRBOUND_REFINE_HPP
