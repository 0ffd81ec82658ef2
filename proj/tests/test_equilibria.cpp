#include <cmath>

#include <boost/math/special_functions/bessel.hpp>
#include <gtest/gtest.h>

#include "hmf/equilibria.hpp"
#include "hmf/spectral.hpp"
#include "hmf/volterra.hpp"
#include "oracles.hpp"

using namespace hmf;
using hmf::elliptic::pi;

namespace {

double closed_map(double alpha, double beta, double z) {
  return alpha * std::sqrt(2 * pi / beta) * boost::math::cyl_bessel_i(1, beta * z);
}

const StationaryState& preset() {
  static const StationaryState st = solve_magnetization(Profile::gaussian(0.3, 4.0));
  return st;
}

const SpectralTable& preset_table() {
  static const SpectralTable T = build_spectral_table(preset(), {}, GridConfig{});
  return T;
}

}  // namespace

TEST(MagnetizationMap, VanishesAtZero) {
  EXPECT_EQ(magnetization_map(Profile::gaussian(0.3, 4.0), 0.0), 0.0);
  EXPECT_EQ(gaussian_map_closed(Profile::gaussian(0.3, 4.0), 0.0), 0.0);
}

TEST(MagnetizationMap, QuadratureMatchesBessel) {
  const auto G = Profile::gaussian(0.3, 4.0);
  EXPECT_NEAR(magnetization_map(G, 0.5), closed_map(0.3, 4.0, 0.5), 1e-9);
  EXPECT_NEAR(gaussian_map_closed(G, 0.5), closed_map(0.3, 4.0, 0.5), 1e-14);
}

TEST(MagnetizationMap, IndependentPhaseQuadrature) {
  const auto G = Profile::gaussian(0.3, 4.0);
  const double z = 0.5;
  const double q = oracle::phase_quadrature([&](double x, double v) { return G.G(0.5 * v * v - z * std::cos(x)) * std::cos(x); },
                                            -10.0, 10.0);
  EXPECT_NEAR(q, closed_map(0.3, 4.0, z), 1e-10);
}

TEST(MagnetizationMap, SmallArgument) {
  const double a = 0.3, b = 4.0, z = 1e-3;
  const double lin = a * std::sqrt(2 * pi / b) * b * z / 2;
  EXPECT_NEAR(magnetization_map(Profile::gaussian(a, b), z) / lin, 1.0, 1e-5);
}

TEST(MagnetizationMap, ClosedPathAcrossRange) {
  const auto G = Profile::gaussian(0.3, 4.0);
  for (int i = 0; i <= 20; ++i) {
    const double z = 10.0 * i / 20;
    const double c = gaussian_map_closed(G, z);
    EXPECT_LE(std::abs(magnetization_map(G, z) - c), 1e-9 * std::max(1.0, std::abs(c))) << z;
  }
}

TEST(Solve, GaussianPreset) {
  const auto& st = preset();
  EXPECT_GT(st.M0, 0.0);
  EXPECT_LT(std::abs(st.residual), 1e-10 * std::max(1.0, st.M0));
  EXPECT_LT(std::abs(magnetization_map(st.profile, st.M0) - st.M0), 1e-9);
  EXPECT_NEAR(st.M0, closed_map(0.3, 4.0, st.M0), 1e-12);
  EXPECT_TRUE(st.conditions.first);
  EXPECT_TRUE(st.conditions.second);
}

TEST(Solve, SmallestPositiveRoot) {
  const auto& st = preset();
  const auto G = Profile::gaussian(0.3, 4.0);
  for (int i = 1; i < 200; ++i) {
    const double z = st.M0 * i / 200;
    EXPECT_LT(gaussian_map_closed(G, z), z);
  }
}

TEST(Solve, FermiProfile) {
  const auto st = solve_magnetization(Profile::fermi(2.0, 10.0, -0.2));
  EXPECT_GT(st.M0, 0.0);
  EXPECT_TRUE(st.conditions.second);
  EXPECT_LT(std::abs(st.residual), 1e-10 * std::max(1.0, st.M0));
  EXPECT_NEAR(sine_moment(st), -1.0, 1e-9);
}

TEST(Solve, BoundedProfileWithoutRoot) {
  EXPECT_THROW(solve_magnetization(Profile::fermi(0.2, 4.0, 0.5), 1.0), NoPositiveRoot);
}

TEST(Solve, AboveThresholdReportsSecondCondition) {
  const double beta = 4.0, alpha = 0.85 / std::sqrt(beta);
  const auto G = Profile::gaussian(alpha, beta);
  EXPECT_FALSE(existence_conditions(G, 1.0).second);
  try {
    solve_magnetization(G);
    FAIL() << "expected NoPositiveRoot";
  } catch (const NoPositiveRoot& e) {
    EXPECT_FALSE(e.report.second);
  }
}

TEST(Conditions, Examples) {
  const auto G = Profile::gaussian(0.3, 4.0);
  const auto r = existence_conditions(G, 5.0);
  EXPECT_NEAR(r.second_value, 1.0 - 0.6 * std::sqrt(2 * pi) / 2, 1e-15);
  EXPECT_TRUE(r.second);
  EXPECT_TRUE(r.first);
  EXPECT_GT(closed_map(0.3, 4.0, 5.0) - 5.0, 0.0);
  const auto Z = Profile::gaussian(0.0, 1.0);
  for (double zeta : {0.1, 1.0, 10.0}) EXPECT_FALSE(existence_conditions(Z, zeta).first);
}

TEST(Conditions, SecondValueIsLinearUpToThreshold) {
  const double beta = 2.0, thr = 2.0 / std::sqrt(2 * pi);
  for (double s : {0.2, 0.5, 0.7, 0.79}) {
    const double alpha = s / std::sqrt(beta);
    const auto G = Profile::gaussian(alpha, beta);
    const double q = 1.0 + phase_integral([&](double x, double v) { return G.dG(0.5 * v * v) * std::cos(x) * std::cos(x); });
    EXPECT_NEAR(q, 1.0 - s / thr, 1e-12);
    EXPECT_NEAR(existence_conditions(G, 1.0).second_value, q, 1e-12);
  }
}

TEST(Stability, SineMomentIsMinusOne) { EXPECT_NEAR(sine_moment(preset()), -1.0, 1e-12); }

TEST(Stability, SufficientClosedForm) {
  const double a = stability_sufficient(preset()), b = gaussian_sufficient_closed(preset());
  EXPECT_GT(b, 0.0);
  EXPECT_NEAR(a, b, 1e-9);
}

TEST(Stability, IndicatorPositiveAndAboveSufficient) {
  const double ind = stability_indicator(preset(), preset_table());
  EXPECT_GT(ind, 0.0);
  EXPECT_GE(ind, stability_sufficient(preset()));
}

TEST(Stability, DroppingTheMeanTermDecreases) {
  EXPECT_LT(stability_bare(preset()), stability_indicator(preset(), preset_table()));
}

TEST(Stability, IndicatorMatchesKernelAtZero) {
  const auto op = kernel_operators(preset_table());
  EXPECT_NEAR(stability_indicator(preset(), preset_table()), 1.0 + op.Q_C(0.0), 1e-6);
}

TEST(Stability, TableMismatchIsMisuse) {
  auto other = preset();
  other.M0 *= 1.01;
  EXPECT_THROW(stability_indicator(other, preset_table()), MisuseError);
}

TEST(Stability, CauchySchwarzSubtractionSign) {
  const auto& st = preset();
  const double b = phase_integral([&](double x, double v) { return st.dG(0.5 * v * v - st.M0 * std::cos(x)) * std::cos(x); });
  const double c = phase_integral([&](double x, double v) { return st.dG(0.5 * v * v - st.M0 * std::cos(x)); });
  EXPECT_LT(c, 0.0);
  EXPECT_LT(b * b / c, 0.0);
  EXPECT_GT(stability_sufficient(st), stability_bare(st));
}

TEST(Stability, ChainOnBetaSweep) {
  GridConfig cfg;
  for (double beta : {1.0, 2.0, 5.0, 8.0}) {
    const auto st = solve_magnetization(Profile::gaussian(0.6 / std::sqrt(beta), beta));
    const double suff = stability_sufficient(st);
    const auto T = build_spectral_table(st, {}, cfg);
    const double ind = stability_indicator(st, T);
    if (suff > 0.0) {
      EXPECT_GT(ind, 0.0) << beta;
    }
    EXPECT_GE(ind, suff - 1e-9) << beta;
    EXPECT_NEAR(suff, gaussian_sufficient_closed(st), 1e-9);
  }
}
