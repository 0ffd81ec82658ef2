#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hmf/errors.hpp"

namespace hmf::elliptic {

inline constexpr int bessel_max_order = 10;

namespace detail {

inline double bessel_i_series(int n, double z) {
  const double h = 0.5 * z;
  double term = 1.0;
  for (int j = 1; j <= n; ++j) term *= h / j;
  double sum = term;
  const double h2 = h * h;
  for (int k = 1; k < 1000; ++k) {
    term *= h2 / (static_cast<double>(k) * (k + n));
    sum += term;
    if (term <= 1e-17 * sum) break;
  }
  return sum;
}

inline double bessel_i_asymptotic(int n, double z) {
  const double mu = 4.0 * n * n;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = -term * (mu - odd * odd) / (8.0 * k * z);
    if (std::abs(next) >= std::abs(term) && k > 1) break;
    term = next;
    sum += term;
    if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
  }
  return std::exp(z) / std::sqrt(2.0 * std::numbers::pi * z) * sum;
}

// The asymptotic series reaches full precision once z exceeds both 15 and n^2.
inline double bessel_crossover(int n) { return std::max(15.0, static_cast<double>(n) * n); }

inline double bessel_i_unchecked(int n, double z) {
  if (n < 0) n = -n;
  if (z == 0.0) return n == 0 ? 1.0 : 0.0;
  if (z > 700.0) throw RangeError("bessel_i: exp(z) overflows for z > 700");
  return z <= bessel_crossover(n) ? bessel_i_series(n, z) : bessel_i_asymptotic(n, z);
}

}  // namespace detail

// Modified Bessel function of the first kind I_n(z), 0 <= n <= 10, z >= 0.
inline double bessel_i(int n, double z) {
  if (n < 0 || n > bessel_max_order) throw DomainError("bessel_i: order outside 0..10");
  if (!(z >= 0.0)) throw DomainError("bessel_i: argument must be nonnegative");
  return detail::bessel_i_unchecked(n, z);
}

inline double bessel_i_derivative(int n, double z) {
  if (n < 0 || n > bessel_max_order) throw DomainError("bessel_i_derivative: order outside 0..10");
  if (!(z >= 0.0)) throw DomainError("bessel_i_derivative: argument must be nonnegative");
  if (n == 0) return detail::bessel_i_unchecked(1, z);
  return 0.5 * (detail::bessel_i_unchecked(n - 1, z) + detail::bessel_i_unchecked(n + 1, z));
}

}  // namespace hmf::elliptic
