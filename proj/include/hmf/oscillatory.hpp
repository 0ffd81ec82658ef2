#pragma once

#include <array>
#include <cmath>
#include <complex>

#include <boost/math/quadrature/gauss.hpp>

namespace hmf::osc {

using cplx = std::complex<double>;

// Five equispaced nodes per panel on the reference interval [-1, 1].
inline constexpr int panel_nodes = 5;
inline constexpr std::array<double, 5> ref_nodes{-1.0, -0.5, 0.0, 0.5, 1.0};

namespace detail {

// Rows: monomial coefficients of the Lagrange basis polynomials.
inline const std::array<std::array<double, 5>, 5>& lagrange_monomials() {
  static const auto table = [] {
    std::array<std::array<double, 5>, 5> out{};
    for (int i = 0; i < 5; ++i) {
      std::array<double, 5> poly{1.0, 0.0, 0.0, 0.0, 0.0};
      double denom = 1.0;
      int deg = 0;
      for (int j = 0; j < 5; ++j) {
        if (j == i) continue;
        std::array<double, 5> next{};
        for (int d = 0; d <= deg; ++d) {
          next[d + 1] += poly[d];
          next[d] -= ref_nodes[j] * poly[d];
        }
        poly = next;
        ++deg;
        denom *= ref_nodes[i] - ref_nodes[j];
      }
      for (int d = 0; d < 5; ++d) out[i][d] = poly[d] / denom;
    }
    return out;
  }();
  return table;
}

}  // namespace detail

// Interpolating polynomial p(x) = sum c_j x^j through values at ref_nodes.
template <class T>
std::array<T, 5> monomial_coeffs(const T* y) {
  const auto& L = detail::lagrange_monomials();
  std::array<T, 5> c{};
  for (int i = 0; i < 5; ++i)
    for (int d = 0; d < 5; ++d) c[d] += L[i][d] * y[i];
  return c;
}

// M_j(mu) = int_{-1}^{1} x^j e^{i mu x} dx, j = 0..4.
inline std::array<cplx, 5> filon_moments(double mu) {
  std::array<cplx, 5> M{};
  if (std::abs(mu) <= 1.0) {
    // even j: real series over even n, odd j: imaginary series over odd n
    std::array<double, 24> r{};
    r[0] = 1.0;
    for (int n = 1; n < 24; ++n) r[n] = r[n - 1] * mu / n;
    for (int j = 0; j < 5; ++j) {
      double sum = 0.0;
      for (int n = j % 2; n < 24; n += 2) {
        const double sgn = (n / 2) % 2 == 0 ? 1.0 : -1.0;
        sum += sgn * r[n] * (2.0 / (j + n + 1));
      }
      M[j] = j % 2 == 0 ? cplx(sum, 0.0) : cplx(0.0, sum);
    }
    return M;
  }
  const double s = std::sin(mu), c = std::cos(mu);
  const cplx ep(c, s), em(c, -s);
  const cplx inv(0.0, -1.0 / mu);
  M[0] = 2.0 * s / mu;
  double sign = -1.0;
  for (int j = 1; j < 5; ++j) {
    M[j] = (ep - sign * em) * inv - double(j) * inv * M[j - 1];
    sign = -sign;
  }
  return M;
}

// int over [c-h, c+h] of p((w-c)/h) e^{i lambda w} dw.
template <class T>
cplx filon_panel(const std::array<T, 5>& coef, double center, double half, double lambda) {
  const auto M = filon_moments(lambda * half);
  cplx s = 0.0;
  for (int j = 0; j < 5; ++j) s += coef[j] * M[j];
  return half * std::polar(1.0, lambda * center) * s;
}

template <class T>
T plain_panel(const std::array<T, 5>& coef, double half) {
  return half * (2.0 * coef[0] + coef[2] * (2.0 / 3.0) + coef[4] * 0.4);
}

template <class T>
cplx horner(const std::array<T, 5>& c, cplx x) {
  cplx r = c[4];
  for (int j = 3; j >= 0; --j) r = r * x + cplx(c[j]);
  return r;
}

// int over [c-h, c+h] of p((w-c)/h) / (zeta - w) dw, zeta off the panel.
template <class T>
cplx cauchy_panel(const std::array<T, 5>& coef, double center, double half, cplx zeta) {
  const cplx z = (zeta - center) / half;
  if (std::abs(z) >= 2.0) {
    using GL = boost::math::quadrature::gauss<double, 16>;
    const auto& xs = GL::abscissa();
    const auto& ws = GL::weights();
    cplx s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double x = xs[i];
      s += ws[i] * (horner(coef, cplx(x)) / (z - x));
      if (x != 0.0) s += ws[i] * (horner(coef, cplx(-x)) / (z + x));
    }
    return s;
  }
  // p(x) = p(z) + (x - z) q(x)
  std::array<cplx, 4> q{};
  cplx acc = coef[4];
  for (int j = 3; j >= 0; --j) {
    q[j] = acc;
    acc = acc * z + cplx(coef[j]);
  }
  const cplx pz = acc;
  const cplx intq = 2.0 * q[0] + q[2] * (2.0 / 3.0);
  return pz * (std::log(z + 1.0) - std::log(z - 1.0)) - intq;
}

}  // namespace hmf::osc
