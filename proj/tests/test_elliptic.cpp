#include <cmath>
#include <numbers>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/tools/roots.hpp>
#include <gtest/gtest.h>

#include "hmf/checks.hpp"
#include "hmf/elliptic.hpp"
#include "oracles.hpp"

using namespace hmf;
using namespace hmf::elliptic;
using hmf::elliptic::pi;

namespace {


double f_oracle(double phi, double k) {
  return oracle::integrate([k](double t) { return 1.0 / std::sqrt(1.0 - k * k * std::sin(t) * std::sin(t)); }, 0.0, phi);
}

double e_oracle(double phi, double k) {
  return oracle::integrate([k](double t) { return std::sqrt(1.0 - k * k * std::sin(t) * std::sin(t)); }, 0.0, phi);
}

// am by bisection on F(., k) = u, independent of the library's Newton path.
double am_oracle(double u, double k) {
  const double K = f_oracle(pi / 2, k);
  const double n = std::round(u / (2.0 * K));
  const double r = u - 2.0 * n * K;
  auto g = [&](double phi) { return f_oracle(phi, k) - r; };
  boost::uintmax_t it = 200;
  const auto b = boost::math::tools::bisect(g, -pi / 2, pi / 2, boost::math::tools::eps_tolerance<double>(50), it);
  return 0.5 * (b.first + b.second) + n * pi;
}

// sum_k (z/2)^{2k+n} / (k! (k+n)!) until the remainder bound drops below 1e-17 of the sum.
double bessel_series_oracle(int n, double z) {
  double term = std::pow(0.5 * z, n) / std::tgamma(n + 1.0), sum = 0.0;
  for (int k = 0; k < 200; ++k) {
    sum += term;
    const double ratio = 0.25 * z * z / ((k + 1.0) * (k + 1.0 + n));
    term *= ratio;
    if (ratio < 0.5 && term / (1.0 - ratio) < 1e-17 * sum) break;
  }
  return sum;
}

}  // namespace

TEST(CompleteIntegrals, ValuesAtZero) {
  EXPECT_DOUBLE_EQ(complete_elliptic_k(0.0), pi / 2);
  EXPECT_DOUBLE_EQ(complete_elliptic_e(0.0), pi / 2);
}

TEST(CompleteIntegrals, EAtOneIsOne) { EXPECT_NEAR(complete_elliptic_e(1.0), 1.0, 1e-15); }

TEST(CompleteIntegrals, QuadratureOracleAtHalf) {
  EXPECT_NEAR(complete_elliptic_k(0.5), f_oracle(pi / 2, 0.5), 1e-12);
  EXPECT_NEAR(complete_elliptic_e(0.5), e_oracle(pi / 2, 0.5), 1e-12);
}

TEST(CompleteIntegrals, LogarithmicSingularityIsBounded) {
  double lo = 1e300, hi = -1e300;
  for (int i = 0; i <= 200; ++i) {
    const double om = 0.1 * std::pow(1e-11, i / 200.0);  // 1 - k down to 1e-12
    const double v = complete_k(Modulus::from_complement(std::sqrt(om * (2.0 - om)))) + 0.5 * std::log(om);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  EXPECT_TRUE(std::isfinite(lo) && std::isfinite(hi));
  EXPECT_LT(hi - lo, 0.2);
  // limit value log 4 - log(2)/2
  const double om = 1e-12;
  EXPECT_NEAR(complete_k(Modulus::from_complement(std::sqrt(om * (2.0 - om)))) + 0.5 * std::log(om),
              std::log(4.0) - 0.5 * std::log(2.0), 1e-9);
}

TEST(CompleteIntegrals, Monotonicity) {
  double pk = complete_elliptic_k(0.0), pe = complete_elliptic_e(0.0);
  for (int i = 1; i < 100; ++i) {
    const double k = i / 100.0;
    const double K = complete_elliptic_k(k), E = complete_elliptic_e(k);
    EXPECT_GT(K, pk);
    EXPECT_LT(E, pe);
    EXPECT_LT(E, K);
    pk = K;
    pe = E;
  }
}

TEST(CompleteIntegrals, DomainErrors) {
  EXPECT_THROW(complete_elliptic_k(1.0), DomainError);
  EXPECT_THROW(complete_elliptic_k(-0.1), DomainError);
  EXPECT_THROW(complete_elliptic_e(1.5), DomainError);
}

TEST(IncompleteIntegrals, Examples) {
  EXPECT_NEAR(incomplete_f(0.7, 0.0), 0.7, 1e-15);
  EXPECT_NEAR(incomplete_f(pi / 2, 0.6), complete_elliptic_k(0.6), 1e-14);
  EXPECT_NEAR(incomplete_f(pi / 4, 0.3), f_oracle(pi / 4, 0.3), 1e-12);
  EXPECT_NEAR(incomplete_e(pi / 4, 0.3), e_oracle(pi / 4, 0.3), 1e-12);
}

TEST(IncompleteIntegrals, OddInPhi) {
  for (double phi : {0.1, 0.5, 1.2})
    for (double k : {0.2, 0.9}) {
      EXPECT_NEAR(incomplete_f(-phi, k), -incomplete_f(phi, k), 1e-15);
      EXPECT_NEAR(incomplete_e(-phi, k), -incomplete_e(phi, k), 1e-15);
    }
}

TEST(Nome, SmallModulusAsymptotic) {
  for (double k : {1e-2, 1e-3}) EXPECT_NEAR(nome(k) / (k * k / 16.0), 1.0, 1e-4);
  EXPECT_LT(nome(1e-8), 1e-16);
}

TEST(Nome, ComposedFromQuadrature) {
  const double k = 0.8, kc = std::sqrt(1 - k * k);
  EXPECT_NEAR(nome(0.8), std::exp(-pi * f_oracle(pi / 2, kc) / f_oracle(pi / 2, k)), 1e-12);
}

TEST(Nome, MonotoneInK) {
  double prev = 0.0;
  for (int i = 1; i < 100; ++i) {
    const double q = nome(i / 100.0);
    EXPECT_GT(q, prev);
    EXPECT_LT(q, 1.0);
    prev = q;
  }
}

TEST(Amplitude, Examples) {
  EXPECT_EQ(jacobi_am(0.0, 0.6), 0.0);
  EXPECT_NEAR(jacobi_am(complete_elliptic_k(0.6), 0.6), pi / 2, 1e-14);
  const FourierSeries fs(Modulus::from_k(0.6));
  EXPECT_NEAR(fs.am(1.0), am_oracle(1.0, 0.6), 1e-10);
  EXPECT_NEAR(jacobi_am(1.0, 0.6), am_oracle(1.0, 0.6), 1e-10);
}

TEST(Amplitude, InvertsF) {
  for (double k : {0.1, 0.5, 0.9, 0.99})
    for (double u : {-3.0, -0.4, 0.2, 1.7, 5.0}) {
      const double a = jacobi_am(u, k);
      const double K = complete_elliptic_k(k);
      const double n = std::round(a / pi);
      EXPECT_NEAR(incomplete_f(a - n * pi, k) + 2.0 * n * K, u, 1e-12) << k << " " << u;
    }
}

TEST(Amplitude, StrictlyIncreasing) {
  double prev = -1e300;
  for (int i = 0; i <= 400; ++i) {
    const double a = jacobi_am(-6.0 + 12.0 * i / 400, 0.95);
    EXPECT_GT(a, prev);
    prev = a;
  }
}

TEST(JacobiFunctions, Examples) {
  EXPECT_NEAR(jacobi_sn_cn_dn(1.2, 1e-9).sn, std::sin(1.2), 1e-12);
  const auto e = jacobi_sn_cn_dn(0.9, 0.7);
  EXPECT_NEAR(e.sn * e.sn + e.cn * e.cn, 1.0, 1e-12);
  EXPECT_NEAR(e.dn * e.dn + 0.49 * e.sn * e.sn, 1.0, 1e-12);
  EXPECT_NEAR(jacobi_sn_cn_dn(1.0, 0.7).sn, std::sin(am_oracle(1.0, 0.7)), 1e-10);
}

TEST(JacobiFunctions, IdentitiesOnWideGrid) {
  for (int i = 1; i <= 40; ++i) {
    const double k = std::min(1.0 - 1e-9, i / 40.0);
    const Modulus md = Modulus::from_k(k);
    const double K = complete_k(md);
    for (int j = 0; j <= 60; ++j) {
      const double u = -3.0 * K + 6.0 * K * j / 60;
      const auto e = jacobi_sn_cn_dn(u, md);
      ASSERT_LT(std::abs(e.sn * e.sn + e.cn * e.cn - 1.0), 1e-11);
      ASSERT_LT(std::abs(e.dn * e.dn + md.m * e.sn * e.sn - 1.0), 1e-11);
      ASSERT_NEAR(e.sn, std::sin(e.am), 1e-12);
    }
  }
}

TEST(JacobiFunctions, ShiftIdentities) {
  for (double k : {0.3, 0.7, 0.95}) {
    const double K = complete_elliptic_k(k);
    for (int j = 0; j <= 30; ++j) {
      const double u = -2.0 + 4.0 * j / 30;
      const auto a = jacobi_sn_cn_dn(u + K, k), b = jacobi_sn_cn_dn(u - K, k);
      EXPECT_NEAR(a.sn, -b.sn, 1e-10);
      EXPECT_NEAR(a.cn, -b.cn, 1e-10);
    }
  }
}

TEST(JacobiFunctions, ProductSeriesMatchPointwise) {
  for (double k : {0.2, 0.6, 0.9}) {
    const Modulus md = Modulus::from_k(k);
    const FourierSeries fs(md);
    for (int j = 0; j <= 20; ++j) {
      const double u = -2.0 + 4.0 * j / 20;
      const auto e = jacobi_sn_cn_dn(u, md);
      EXPECT_NEAR(fs.sn2(u), e.sn * e.sn, 1e-10);
      EXPECT_NEAR(fs.sncn(u), e.sn * e.cn, 1e-10);
      EXPECT_NEAR(fs.sndn(u), e.sn * e.dn, 1e-10);
    }
  }
}

TEST(JacobiFunctions, SuiteOnFiftyByFiftyGrid) {
  const auto s = elliptic_suite(50, 50, 0.95);
  EXPECT_LT(s.identity_sn_cn, 1e-11);
  EXPECT_LT(s.identity_dn, 1e-11);
  EXPECT_LT(s.series_gap, 1e-9);
  EXPECT_TRUE(s.pass);
}

TEST(Bessel, ValuesAtZero) {
  EXPECT_EQ(bessel_i(0, 0.0), 1.0);
  EXPECT_EQ(bessel_i(1, 0.0), 0.0);
}

TEST(Bessel, SmallArgument) { EXPECT_NEAR(bessel_i(1, 1e-2) / 5e-3, 1.0, 1e-4); }

TEST(Bessel, SeriesOracle) { EXPECT_NEAR(bessel_i(1, 2.0), bessel_series_oracle(1, 2.0), 1e-12); }

TEST(Bessel, AgreesWithBoostAcrossCrossover) {
  for (int n = 0; n <= 10; ++n)
    for (double z : {1e-3, 0.5, 3.0, 14.9, 15.1, 24.0, 26.0, 40.0, 99.0, 101.0, 300.0}) {
      const double ref = boost::math::cyl_bessel_i(n, z);
      EXPECT_NEAR(bessel_i(n, z) / ref, 1.0, 1e-13) << n << " " << z;
    }
}

TEST(Bessel, DerivativeRecurrence) {
  for (int n = 0; n <= 5; ++n)
    for (double z : {0.1, 2.0, 20.0}) {
      const double h = 1e-5 * z;
      EXPECT_NEAR(bessel_i_derivative(n, z), (bessel_i(n, z + h) - bessel_i(n, z - h)) / (2 * h),
                  1e-8 * bessel_i(n, z) + 1e-12);
    }
}

TEST(Bessel, Errors) {
  EXPECT_THROW(bessel_i(11, 1.0), DomainError);
  EXPECT_THROW(bessel_i(0, -1.0), DomainError);
  EXPECT_THROW(bessel_i(0, 800.0), RangeError);
}

TEST(Bessel, InequalitySuite) {
  const auto b = bessel_inequalities(5, 500, 1e-3, 50.0);
  EXPECT_EQ(b.violations, 0);
  EXPECT_GT(b.min_margin_log_derivative, 0.0);
  EXPECT_GT(b.min_margin_ratio, 0.0);
}
