#ifndef FAIRBOUND_POLYNOMIAL_HPP
#define FAIRBOUND_POLYNOMIAL_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace fairbound::poly {

/// Horner evaluation of sum c[k] x^k (ascending-degree coefficients).
template <typename T>
T eval(std::span<const T> coeffs, T x) {
  T acc{0};
  for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * x + coeffs[k];
  return acc;
}

/// Antiderivative vanishing at zero.
template <typename T>
std::vector<T> antiderivative(std::span<const T> coeffs) {
  std::vector<T> out(coeffs.size() + 1, T{0});
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    out[k + 1] = coeffs[k] / static_cast<T>(k + 1);
  }
  return out;
}

/// Bisection on [lo, hi] for the last point where `holds` is still true,
/// assuming holds(lo) and !holds(hi). Returns the midpoint of the final
/// bracket, whose width is at most tol.
template <typename T, typename Pred>
T bisect_transition(Pred&& holds, T lo, T hi, T tol) {
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const T mid = lo + (hi - lo) / 2;
    if (mid <= lo || mid >= hi) break;
    if (holds(mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo + (hi - lo) / 2;
}

}  // namespace fairbound::poly

#endif  // FAIRBOUND_POLYNOMIAL_HPP
