/**
 * @file bound_core.hpp
 * @brief Two-sided bounds on the alpha-optimal value from a set of EVVs.
 *
 * Given m <= n linearly independent EVVs u^1..u^m (columns of U) and a
 * nonsingular m x m row-submatrix Ubar:
 *
 *  - alpha lies in cone(u^1..u^m) iff det(Ubar) det(Ubar_{alpha i}) >= 0
 *    for every i, where Ubar_{alpha i} has column i replaced by alpha
 *    restricted to the same rows;
 *  - in that case r* = 1 / sum_{i,j} alpha_j [Ubar^{-1}]_{ij} is a lower
 *    bound (the ray r alpha meets conv(u^1..u^m) at r*);
 *  - every EVV, independent or not, gives the upper bound
 *    (beta . u) / (beta . alpha) through its supporting hyperplane.
 */

#ifndef FAIRBOUND_BOUND_CORE_HPP
#define FAIRBOUND_BOUND_CORE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "evv_engine.hpp"
#include "linalg.hpp"
#include "measure_model.hpp"

namespace fairbound {

/// Relative threshold on column-norm-scaled determinants.
inline constexpr double kEpsDet = 1e-9;
/// Relative pivot threshold for the rank test in select_basis_rows.
inline constexpr double kEpsRank = 1e-10;
/// Absolute residual allowed in U t = r alpha over all n rows.
inline constexpr double kSpanTol = 1e-8;

enum class ConeStatus { interior, boundary, outside };

inline std::string_view to_string(ConeStatus s) {
  switch (s) {
    case ConeStatus::interior: return "interior";
    case ConeStatus::boundary: return "boundary";
    case ConeStatus::outside: return "outside";
  }
  return "outside";
}

inline ConeStatus cone_status_from_string(std::string_view s) {
  if (s == "interior") return ConeStatus::interior;
  if (s == "boundary") return ConeStatus::boundary;
  if (s == "outside") return ConeStatus::outside;
  throw std::invalid_argument("unknown cone status: " + std::string(s));
}

/// The requested basis cannot certify a lower bound (alpha outside its cone).
class NoLowerBound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two computation routes that must agree did not.
class NumericalInconsistency : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Picks m rows of the n x m matrix U greedily maximizing |det(Ubar)|:
/// Gaussian elimination column by column, pivoting on the largest
/// remaining entry. Returns nullopt when a pivot falls below eps_rank times
/// the column's magnitude (numerical rank < m). Rows come back ascending.
inline std::optional<std::vector<std::size_t>> select_basis_rows(const Matrix& U,
                                                                 double eps_rank = kEpsRank) {
  const std::size_t n = U.rows();
  const std::size_t m = U.cols();
  if (m == 0 || m > n) return std::nullopt;
  Matrix work = U;
  std::vector<bool> used(n, false);
  std::vector<std::size_t> rows;
  for (std::size_t c = 0; c < m; ++c) {
    double scale = 0.0;
    for (std::size_t r = 0; r < n; ++r) scale = std::max(scale, std::abs(U(r, c)));
    std::size_t p = n;
    double best = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      if (!used[r] && std::abs(work(r, c)) > best) {
        best = std::abs(work(r, c));
        p = r;
      }
    }
    if (p == n || !(best > eps_rank * scale) || scale == 0.0) return std::nullopt;
    used[p] = true;
    rows.push_back(p);
    for (std::size_t r = 0; r < n; ++r) {
      if (used[r]) continue;
      const double f = work(r, c) / work(p, c);
      if (f == 0.0) continue;
      for (std::size_t k = c; k < m; ++k) work(r, k) -= f * work(p, k);
    }
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

/// An ordered set of m <= n linearly independent EVVs with the row set
/// selecting the nonsingular submatrix Ubar.
class EvvBasis {
 public:
  /// nullopt when the value vectors are not linearly independent.
  static std::optional<EvvBasis> make(std::vector<EvvRecord> evvs) {
    if (evvs.empty()) throw std::invalid_argument("EvvBasis: no EVVs");
    const std::size_t n = evvs.front().u.size();
    if (evvs.size() > n) throw std::invalid_argument("EvvBasis: more EVVs than agents");
    std::vector<std::vector<double>> cols;
    for (const auto& e : evvs) {
      if (e.u.size() != n) throw std::invalid_argument("EvvBasis: EVVs of unequal length");
      cols.push_back(e.u);
    }
    EvvBasis b;
    b.U_ = Matrix::from_columns(cols);
    auto rows = select_basis_rows(b.U_);
    if (!rows) return std::nullopt;
    b.rows_ = std::move(*rows);
    b.ubar_ = b.U_.select_rows(b.rows_);
    b.det_ubar_ = determinant(b.ubar_);
    double norms = 1.0;
    for (std::size_t c = 0; c < b.ubar_.cols(); ++c) norms *= norm2<double>(b.ubar_.column(c));
    if (!(std::abs(b.det_ubar_) > kEpsDet * norms)) return std::nullopt;
    b.evvs_ = std::move(evvs);
    return b;
  }

  std::size_t m() const noexcept { return evvs_.size(); }
  std::size_t n() const noexcept { return U_.rows(); }
  const std::vector<EvvRecord>& evvs() const noexcept { return evvs_; }
  const Matrix& U() const noexcept { return U_; }
  const Matrix& ubar() const noexcept { return ubar_; }
  const std::vector<std::size_t>& rows() const noexcept { return rows_; }
  double det_ubar() const noexcept { return det_ubar_; }

  /// v restricted to the basis rows.
  std::vector<double> restrict(std::span<const double> v) const {
    std::vector<double> out;
    out.reserve(rows_.size());
    for (std::size_t r : rows_) out.push_back(v[r]);
    return out;
  }

  std::optional<EvvBasis> replaced(std::size_t j, EvvRecord rec) const {
    auto e = evvs_;
    e.at(j) = std::move(rec);
    return make(std::move(e));
  }

  std::optional<EvvBasis> without(std::span<const std::size_t> drop) const {
    std::vector<EvvRecord> e;
    for (std::size_t k = 0; k < evvs_.size(); ++k) {
      if (std::find(drop.begin(), drop.end(), k) == drop.end()) e.push_back(evvs_[k]);
    }
    if (e.empty()) return std::nullopt;
    return make(std::move(e));
  }

 private:
  EvvBasis() = default;
  std::vector<EvvRecord> evvs_;
  Matrix U_;
  std::vector<std::size_t> rows_;
  Matrix ubar_;
  double det_ubar_ = 0.0;
};

namespace detail {

inline double column_norm_product(const Matrix& a, std::optional<std::size_t> skip) {
  double p = 1.0;
  for (std::size_t c = 0; c < a.cols(); ++c) {
    if (skip && *skip == c) continue;
    p *= norm2<double>(a.column(c));
  }
  return p;
}

/// det of a with column i replaced by v, divided by the product of the
/// column norms of the resulting matrix (so the value lies in [-1, 1]).
inline std::pair<double, double> replaced_det(const Matrix& a, std::size_t i,
                                              std::span<const double> v) {
  Matrix b = a;
  b.set_column(i, v);
  const double d = determinant(b);
  const double scale = column_norm_product(a, i) * norm2<double>(v);
  return {d, scale > 0.0 ? d / scale : 0.0};
}

}  // namespace detail

/// Determinant report for one cone-membership query.
struct ConeReport {
  ConeStatus status = ConeStatus::outside;
  double det_ubar = 0.0;
  std::vector<double> det_alpha;  ///< det(Ubar_{alpha i})
  std::vector<double> scaled;     ///< sign(det Ubar) * normalized det(Ubar_{alpha i})
  bool in_span = true;
  double span_residual = 0.0;
};

/// Classifies alpha against cone(basis): interior when every scaled product
/// exceeds kEpsDet, boundary when none is below -kEpsDet, else outside.
/// For m < n, alpha must also lie in span(U) on all n rows.
inline ConeReport cone_membership(const EvvBasis& basis, std::span<const double> alpha) {
  if (alpha.size() != basis.n()) {
    throw std::invalid_argument("cone_membership: alpha has wrong length");
  }
  ConeReport rep;
  rep.det_ubar = basis.det_ubar();
  const double sgn = rep.det_ubar > 0.0 ? 1.0 : -1.0;
  const auto abar = basis.restrict(alpha);
  bool all_pos = true;
  bool any_neg = false;
  for (std::size_t i = 0; i < basis.m(); ++i) {
    const auto [d, dn] = detail::replaced_det(basis.ubar(), i, abar);
    rep.det_alpha.push_back(d);
    rep.scaled.push_back(sgn * dn);
    all_pos = all_pos && sgn * dn > kEpsDet;
    any_neg = any_neg || sgn * dn < -kEpsDet;
  }
  rep.status = any_neg ? ConeStatus::outside
               : all_pos ? ConeStatus::interior
                         : ConeStatus::boundary;

  if (rep.status != ConeStatus::outside && basis.m() < basis.n()) {
    double denom = 0.0;
    for (double d : rep.det_alpha) denom += d;
    if (denom == 0.0) {
      rep.in_span = false;
      rep.status = ConeStatus::outside;
      return rep;
    }
    const double r = rep.det_ubar / denom;
    std::vector<double> t;
    for (double d : rep.det_alpha) t.push_back(d / denom);
    const auto ut = basis.U() * std::span<const double>(t);
    double scale = 1.0;
    for (std::size_t row = 0; row < basis.n(); ++row) {
      rep.span_residual = std::max(rep.span_residual, std::abs(ut[row] - r * alpha[row]));
      scale = std::max(scale, std::abs(r * alpha[row]));
    }
    if (rep.span_residual > kSpanTol * scale) {
      rep.in_span = false;
      rep.status = ConeStatus::outside;
    }
  }
  return rep;
}

/// Solution (r*, t) of U t = r alpha, sum t = 1.
struct ConeSolution {
  double r_star = 0.0;
  std::vector<double> t;
  std::vector<double> det_alpha;
  ConeStatus status = ConeStatus::outside;
};

/// Lower bound r* <= v^alpha from a basis whose cone contains alpha.
/// r* is computed through Ubar^{-1} alpha (LU) and independently through
/// Cramer's rule; disagreement beyond 1e-9 relative throws
/// NumericalInconsistency. Columns with a zero determinant get t_i = 0.
inline ConeSolution lower_bound(const EvvBasis& basis, std::span<const double> alpha) {
  const auto rep = cone_membership(basis, alpha);
  if (rep.status == ConeStatus::outside) {
    throw NoLowerBound("alpha is not in the cone of the basis");
  }
  const auto abar = basis.restrict(alpha);
  const LuDecomposition<double> lu(basis.ubar());
  const auto y = lu.solve(abar);
  double ysum = 0.0;
  for (double v : y) ysum += v;
  const double r_inverse = 1.0 / ysum;

  double denom = 0.0;
  for (double d : rep.det_alpha) denom += d;
  const double r_cramer = basis.det_ubar() / denom;
  if (!(std::abs(r_inverse - r_cramer) <= 1e-9 * std::abs(r_inverse))) {
    throw NumericalInconsistency("lower_bound: inverse and Cramer routes disagree");
  }

  ConeSolution sol;
  sol.r_star = r_inverse;
  sol.det_alpha = rep.det_alpha;
  sol.status = rep.status;
  double tsum = 0.0;
  for (std::size_t i = 0; i < basis.m(); ++i) {
    double ti = rep.det_alpha[i] / denom;
    if (std::abs(rep.scaled[i]) <= kEpsDet) ti = 0.0;
    sol.t.push_back(ti);
    tsum += ti;
  }
  for (double& ti : sol.t) ti /= tsum;
  return sol;
}

struct UpperBound {
  double value = std::numeric_limits<double>::infinity();
  std::size_t argmin = 0;
};

/// The supporting-hyperplane ratio (beta . u) / (beta . alpha) of one EVV.
inline double hyperplane_ratio(const EvvRecord& e, std::span<const double> alpha) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < e.u.size(); ++j) {
    num += e.beta[j] * e.u[j];
    den += e.beta[j] * alpha[j];
  }
  return num / den;
}

inline UpperBound upper_bound(std::span<const EvvRecord> evvs, std::span<const double> alpha) {
  if (evvs.empty()) throw std::invalid_argument("upper_bound: no EVVs");
  UpperBound ub;
  for (std::size_t i = 0; i < evvs.size(); ++i) {
    if (evvs[i].u.size() != alpha.size()) {
      throw std::invalid_argument("upper_bound: EVV length differs from alpha");
    }
    const double r = hyperplane_ratio(evvs[i], alpha);
    if (r < ub.value) {
      ub.value = r;
      ub.argmin = i;
    }
  }
  return ub;
}

struct BoundsResult {
  std::optional<double> lower;
  double upper = std::numeric_limits<double>::infinity();
  std::size_t argmin_upper = 0;
  ConeStatus cone_status = ConeStatus::outside;
  std::optional<ConeSolution> certificate;
  std::vector<EvvRecord> basis;

  double gap() const {
    return lower ? upper - *lower : std::numeric_limits<double>::infinity();
  }
};

/// Drops the columns whose determinant against alpha vanishes (t_i = 0):
/// they do not contribute to the lower bound.
inline std::optional<EvvBasis> discard_zero_weight(const EvvBasis& basis,
                                                   std::span<const double> alpha) {
  const auto rep = cone_membership(basis, alpha);
  if (rep.status != ConeStatus::boundary) return basis;
  std::vector<std::size_t> drop;
  for (std::size_t i = 0; i < rep.scaled.size(); ++i) {
    if (std::abs(rep.scaled[i]) <= kEpsDet) drop.push_back(i);
  }
  if (drop.size() == basis.m()) return std::nullopt;
  return basis.without(drop);
}

/// General bounds from a list of EVVs. All of them feed the upper bound;
/// the lower bound uses the first linearly independent subset (at most n,
/// in input order) if its cone contains alpha.
inline BoundsResult cone_bounds(std::span<const EvvRecord> evvs, std::span<const double> alpha) {
  BoundsResult res;
  const auto ub = upper_bound(evvs, alpha);
  res.upper = ub.value;
  res.argmin_upper = ub.argmin;

  std::optional<EvvBasis> basis;
  std::vector<EvvRecord> chosen;
  for (const auto& e : evvs) {
    if (chosen.size() == alpha.size()) break;
    auto trial = chosen;
    trial.push_back(e);
    if (auto b = EvvBasis::make(trial)) {
      chosen = std::move(trial);
      basis = std::move(b);
    }
  }
  if (!basis) return res;
  res.basis = basis->evvs();
  auto rep = cone_membership(*basis, alpha);
  res.cone_status = rep.status;
  if (rep.status == ConeStatus::outside) return res;
  if (rep.status == ConeStatus::boundary) {
    basis = discard_zero_weight(*basis, alpha);
    if (!basis) return res;
  }
  auto sol = lower_bound(*basis, alpha);
  res.lower = sol.r_star;
  res.certificate = std::move(sol);
  res.basis = basis->evvs();
  return res;
}

namespace detail {

/// j with alpha_j^{-1} u_j = max_i alpha_i^{-1} u_i (first on ties).
inline std::size_t max_claim_ratio_index(std::span<const double> u, std::span<const double> alpha) {
  std::size_t j = 0;
  for (std::size_t i = 1; i < u.size(); ++i) {
    if (u[i] / alpha[i] > u[j] / alpha[j]) j = i;
  }
  return j;
}

inline void check_single_evv(const EvvRecord& rec, std::span<const double> alpha,
                             std::span<const double> masses) {
  if (rec.u.size() != alpha.size() || masses.size() != alpha.size()) {
    throw std::invalid_argument("single EVV bounds: length mismatch");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) s += alpha[i] * rec.u[i];
  if (!(s > 0.0)) throw std::invalid_argument("single EVV bounds: degenerate EVV (u = 0)");
}

/// Basis (e^1, .., e^{j-1}, u, e^{j+1}, .., e^n) with e^i = mu_i(C) e_i.
inline EvvBasis corner_basis(const EvvRecord& rec, std::size_t j,
                             std::span<const double> masses) {
  const std::size_t n = masses.size();
  std::vector<EvvRecord> cols;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == j) {
      cols.push_back(rec);
    } else {
      std::vector<double> e(n, 0.0);
      e[i] = masses[i];
      cols.push_back(EvvRecord::from_values(WeightVector::corner(n, i), std::move(e)));
    }
  }
  auto basis = EvvBasis::make(std::move(cols));
  if (!basis) throw NumericalInconsistency("corner basis is singular");
  return std::move(*basis);
}

}  // namespace detail

/// Bounds from one EVV plus the corner points e^i = mu_i(C) e_i:
///   u_j / (alpha_j + sum_{i != j} (alpha_i u_j - alpha_j u_i) / mu_i(C))
///     <= v^alpha <= (beta . u) / (beta . alpha).
/// Cross-checked against lower_bound on the basis (e^1..u..e^n).
inline BoundsResult single_evv_bounds(const EvvRecord& rec, std::span<const double> alpha,
                                      std::span<const double> masses) {
  detail::check_single_evv(rec, alpha, masses);
  const std::size_t n = alpha.size();
  const std::size_t j = detail::max_claim_ratio_index(rec.u, alpha);
  const double uj = rec.u[j];
  double denom = alpha[j];
  for (std::size_t i = 0; i < n; ++i) {
    if (i != j) denom += (alpha[i] * uj - alpha[j] * rec.u[i]) / masses[i];
  }
  const double closed_form = uj / denom;

  const auto basis = detail::corner_basis(rec, j, masses);
  auto sol = lower_bound(basis, alpha);
  if (!(std::abs(sol.r_star - closed_form) <= 1e-9 * std::max(1.0, std::abs(closed_form)))) {
    throw NumericalInconsistency("single_evv_bounds: closed form and generic route disagree");
  }

  BoundsResult res;
  res.lower = closed_form;
  res.upper = hyperplane_ratio(rec, alpha);
  res.argmin_upper = 0;
  res.cone_status = sol.status;
  res.certificate = std::move(sol);
  res.basis = basis.evvs();
  return res;
}

inline BoundsResult single_evv_bounds(const Instance& inst, const EvvRecord& rec,
                                      std::span<const double> alpha) {
  const auto masses = inst.masses();
  return single_evv_bounds(rec, alpha, masses);
}

/// Legut's bounds for probability measures and the EVV of beta = (1/n..1/n):
///   u_j / (u_j - alpha_j (K - 1)) <= v^alpha <= K,  K = sum_i u_i.
inline BoundsResult legut_bounds(const EvvRecord& rec, std::span<const double> alpha,
                                 std::span<const double> masses) {
  for (double mu : masses) {
    if (std::abs(mu - 1.0) > 1e-9) {
      throw std::invalid_argument(
          "legut_bounds: measures are not normalized; use single_evv_bounds");
    }
  }
  detail::check_single_evv(rec, alpha, masses);
  const double inv_n = 1.0 / static_cast<double>(alpha.size());
  for (std::size_t i = 0; i < rec.beta.size(); ++i) {
    if (std::abs(rec.beta[i] - inv_n) > 1e-12) {
      throw std::invalid_argument("legut_bounds: EVV weights are not uniform");
    }
  }
  double k_sum = 0.0;
  for (double v : rec.u) k_sum += v;
  const std::size_t j = detail::max_claim_ratio_index(rec.u, alpha);

  BoundsResult res;
  res.lower = rec.u[j] / (rec.u[j] - alpha[j] * (k_sum - 1.0));
  res.upper = k_sum;
  const auto basis = detail::corner_basis(rec, j, masses);
  res.cone_status = cone_membership(basis, alpha).status;
  res.basis = basis.evvs();
  return res;
}

inline BoundsResult legut_bounds(const Instance& inst, const EvvRecord& rec,
                                 std::span<const double> alpha) {
  const auto masses = inst.masses();
  return legut_bounds(rec, alpha, masses);
}

}  // namespace fairbound

#endif  // FAIRBOUND_BOUND_CORE_HPP
