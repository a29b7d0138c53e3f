/**
 * @file oracle.hpp
 * @brief Ground truth on a discretized cake by linear programming.
 *
 * The cake is cut into cells on which every density is a single
 * polynomial. Cells may be shared fractionally (a nonatomic measure can
 * always realize any split of a cell), so the alpha-optimal value of the
 * discretized problem is the LP
 *
 *   max r  s.t.  sum_c x_ic m_ic >= alpha_i r,  sum_i x_ic = 1,  x >= 0,
 *
 * solved here with a dense tableau simplex. It shares nothing with the
 * EVV / determinant machinery it is meant to check.
 */

#ifndef FAIRBOUND_ORACLE_HPP
#define FAIRBOUND_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "evv_engine.hpp"
#include "linalg.hpp"
#include "measure_model.hpp"

namespace fairbound {

struct DiscretizedInstance {
  std::vector<double> knots;  ///< cell c is [knots[c], knots[c+1]]
  Matrix masses;              ///< masses(i, c) = mu_i(cell c)
  std::vector<double> claims;

  std::size_t n() const noexcept { return masses.rows(); }
  std::size_t cells() const noexcept { return masses.cols(); }
};

/// Uniform grid of `cells` cells, refined by every density piece endpoint.
inline DiscretizedInstance discretize(const Instance& inst, std::size_t cells) {
  if (cells < inst.n()) throw std::invalid_argument("discretize: need at least n cells");
  std::vector<double> knots;
  for (std::size_t c = 0; c <= cells; ++c) {
    knots.push_back(static_cast<double>(c) / static_cast<double>(cells));
  }
  for (const auto& f : inst.densities()) {
    for (const auto& p : f.pieces()) knots.push_back(p.hi);
  }
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  DiscretizedInstance d;
  d.claims = inst.claims();
  d.masses = Matrix(inst.n(), knots.size() - 1);
  for (std::size_t i = 0; i < inst.n(); ++i) {
    const auto& f = inst.density(i);
    for (std::size_t c = 0; c + 1 < knots.size(); ++c) {
      d.masses(i, c) = f.integral(knots[c], knots[c + 1]);
    }
  }
  d.knots = std::move(knots);
  return d;
}

/// One-cell resolution slack 2 max_{i,c} m_ic / alpha_i used when comparing
/// continuous bounds against the discretized value.
inline double resolution_slack(const DiscretizedInstance& d) {
  double s = 0.0;
  for (std::size_t i = 0; i < d.n(); ++i) {
    for (std::size_t c = 0; c < d.cells(); ++c) s = std::max(s, d.masses(i, c) / d.claims[i]);
  }
  return 2.0 * s;
}

struct OracleResult {
  double value = 0.0;
  Matrix assignment;          ///< x(i, c), fractional share of cell c to agent i
  std::vector<double> duals;  ///< lambda_i >= 0 on the claim constraints
  double dual_value = 0.0;    ///< sum_c max_i lambda_i m_ic
  double max_violation = 0.0; ///< worst primal constraint violation
  std::size_t pivots = 0;
};

namespace detail {

class OracleTableau {
 public:
  explicit OracleTableau(const DiscretizedInstance& d)
      : n_(d.n()), k_(d.cells()), vars_(1 + n_ * k_ + n_), width_(vars_ + 1),
        rows_(n_ + k_), t_((rows_ + 1) * width_, 0.0), basis_(rows_) {
    // Claim rows: alpha_i r - sum_c m_ic x_ic + s_i = 0.
    for (std::size_t i = 0; i < n_; ++i) {
      at(i, 0) = d.claims[i];
      for (std::size_t c = 0; c < k_; ++c) at(i, x_var(i, c)) = -d.masses(i, c);
      at(i, slack_var(i)) = 1.0;
      basis_[i] = slack_var(i);
    }
    // Cell rows: sum_i x_ic = 1, with agent 0 holding every cell initially.
    for (std::size_t c = 0; c < k_; ++c) {
      const std::size_t row = n_ + c;
      for (std::size_t i = 0; i < n_; ++i) at(row, x_var(i, c)) = 1.0;
      at(row, vars_) = 1.0;
      basis_[row] = x_var(0, c);
    }
    // Eliminate x_0c from claim row 0 so the starting basis is canonical.
    for (std::size_t c = 0; c < k_; ++c) {
      const double f = d.masses(0, c);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) at(0, j) += f * at(n_ + c, j);
    }
    // Objective row holds reduced costs for max r.
    at(rows_, 0) = -1.0;
  }

  std::size_t solve(std::size_t max_pivots) {
    constexpr double kTol = 1e-11;
    std::size_t pivots = 0;
    std::size_t stalled = 0;
    bool bland = false;
    std::vector<std::size_t> nz;
    for (;;) {
      std::size_t enter = vars_;
      double most_negative = -kTol;
      for (std::size_t j = 0; j < vars_; ++j) {
        const double dj = at(rows_, j);
        if (dj < most_negative) {
          enter = j;
          if (bland) break;
          most_negative = dj;
        }
      }
      if (enter == vars_) return pivots;

      std::size_t leave = rows_;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < rows_; ++r) {
        const double a = at(r, enter);
        if (a <= kTol) continue;
        const double ratio = at(r, vars_) / a;
        if (ratio < best_ratio - 1e-13 ||
            (ratio <= best_ratio + 1e-13 && leave < rows_ && basis_[r] < basis_[leave])) {
          best_ratio = std::min(best_ratio, ratio);
          leave = r;
        }
      }
      if (leave == rows_) throw std::runtime_error("oracle LP is unbounded");

      const double before = at(rows_, vars_);
      pivot(leave, enter, nz);
      ++pivots;
      if (at(rows_, vars_) <= before + 1e-14) {
        if (++stalled > 50) bland = true;
      } else {
        stalled = 0;
      }
      if (pivots >= max_pivots) throw std::runtime_error("oracle LP: pivot limit reached");
    }
  }

  double objective() const { return at(rows_, vars_); }

  double value_of(std::size_t var) const {
    for (std::size_t r = 0; r < rows_; ++r) {
      if (basis_[r] == var) return at(r, vars_);
    }
    return 0.0;
  }

  double reduced_cost(std::size_t var) const { return at(rows_, var); }

  std::size_t x_var(std::size_t i, std::size_t c) const { return 1 + i * k_ + c; }
  std::size_t slack_var(std::size_t i) const { return 1 + n_ * k_ + i; }
  std::size_t row_count() const { return rows_; }
  std::size_t var_count() const { return vars_; }

 private:
  double& at(std::size_t r, std::size_t c) { return t_[r * width_ + c]; }
  double at(std::size_t r, std::size_t c) const { return t_[r * width_ + c]; }

  void pivot(std::size_t prow, std::size_t pcol, std::vector<std::size_t>& nz) {
    const double p = at(prow, pcol);
    nz.clear();
    for (std::size_t j = 0; j < width_; ++j) {
      double& v = at(prow, j);
      if (v != 0.0) {
        v /= p;
        nz.push_back(j);
      }
    }
    at(prow, pcol) = 1.0;
    for (std::size_t r = 0; r <= rows_; ++r) {
      if (r == prow) continue;
      const double f = at(r, pcol);
      if (f == 0.0) continue;
      double* row = &t_[r * width_];
      const double* src = &t_[prow * width_];
      for (std::size_t j : nz) row[j] -= f * src[j];
      row[pcol] = 0.0;
    }
    basis_[prow] = pcol;
  }

  std::size_t n_;
  std::size_t k_;
  std::size_t vars_;
  std::size_t width_;
  std::size_t rows_;
  std::vector<double> t_;
  std::vector<std::size_t> basis_;
};

}  // namespace detail

/// Exact alpha-optimal value of the discretized instance, with the optimal
/// fractional assignment and a dual certificate.
inline OracleResult oracle_value(const DiscretizedInstance& d) {
  detail::OracleTableau tab(d);
  OracleResult res;
  res.pivots = tab.solve(50 * (tab.row_count() + tab.var_count()));
  res.value = tab.objective();

  res.assignment = Matrix(d.n(), d.cells());
  for (std::size_t i = 0; i < d.n(); ++i) {
    for (std::size_t c = 0; c < d.cells(); ++c) {
      res.assignment(i, c) = std::max(0.0, tab.value_of(tab.x_var(i, c)));
    }
  }
  for (std::size_t c = 0; c < d.cells(); ++c) {
    double s = 0.0;
    for (std::size_t i = 0; i < d.n(); ++i) s += res.assignment(i, c);
    res.max_violation = std::max(res.max_violation, std::abs(s - 1.0));
  }
  for (std::size_t i = 0; i < d.n(); ++i) {
    double got = 0.0;
    for (std::size_t c = 0; c < d.cells(); ++c) got += res.assignment(i, c) * d.masses(i, c);
    res.max_violation = std::max(res.max_violation, d.claims[i] * res.value - got);
  }

  for (std::size_t i = 0; i < d.n(); ++i) res.duals.push_back(tab.reduced_cost(tab.slack_var(i)));
  for (std::size_t c = 0; c < d.cells(); ++c) {
    double w = 0.0;
    for (std::size_t i = 0; i < d.n(); ++i) w = std::max(w, res.duals[i] * d.masses(i, c));
    res.dual_value += w;
  }
  return res;
}

struct MaxsumResult {
  double value = 0.0;
  std::vector<std::size_t> owners;
};

/// Weighted maxsum on the discretized cake: each cell to arg max_i
/// beta_i m_ic (lowest index on ties), which is optimal cell by cell.
inline MaxsumResult oracle_maxsum(const DiscretizedInstance& d, const WeightVector& beta) {
  if (beta.size() != d.n()) throw std::invalid_argument("oracle_maxsum: beta has wrong length");
  MaxsumResult res;
  res.owners.resize(d.cells());
  for (std::size_t c = 0; c < d.cells(); ++c) {
    std::size_t best = 0;
    double best_v = beta[0] * d.masses(0, c);
    for (std::size_t i = 1; i < d.n(); ++i) {
      const double v = beta[i] * d.masses(i, c);
      if (v > best_v) {
        best_v = v;
        best = i;
      }
    }
    res.owners[c] = best;
    res.value += best_v;
  }
  return res;
}

}  // namespace fairbound

#endif  // FAIRBOUND_ORACLE_HPP
