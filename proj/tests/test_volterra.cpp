#include <cmath>

#include <gtest/gtest.h>

#include "hmf/damping.hpp"
#include "hmf/equilibria.hpp"
#include "hmf/spectral.hpp"
#include "hmf/volterra.hpp"
#include "oracles.hpp"

using namespace hmf;
using hmf::elliptic::pi;

namespace {

struct Preset {
  StationaryState st;
  SpectralTable T;
  KernelOperators op;
};

const Preset& preset() {
  static const Preset p = [] {
    Preset q;
    q.st = solve_magnetization(Profile::gaussian(0.3, 4.0));
    q.T = build_spectral_table(q.st, {named_observable("bump", q.st.M0)}, GridConfig{});
    q.op = kernel_operators(q.T);
    return q;
  }();
  return p;
}

double direct_pairing(const std::function<double(double, double)>& f, double vmax = 9.0) {
  return oracle::phase_quadrature(f, -vmax, vmax, 128, 36);
}

std::vector<double> exp_kernel(double dt, double T) {
  const TimeGrid g(dt, T);
  std::vector<double> k(g.size());
  for (std::size_t i = 0; i < k.size(); ++i) k[i] = std::exp(-g.t(i));
  return k;
}

// max over [0, 10] of |y - (1 + t)| / (1 + t); the absolute error grows like t dt^2
double max_error_linear(double dt) {
  const auto K = exp_kernel(dt, 10.0);
  const auto sol = solve_volterra(K, std::vector<double>(K.size(), 1.0), dt);
  double e = 0.0;
  for (std::size_t i = 0; i < K.size(); ++i) e = std::max(e, std::abs(sol.y[i] - (1.0 + i * dt)) / (1.0 + i * dt));
  return e;
}

}  // namespace

TEST(Solver, ZeroKernelReturnsSource) {
  std::vector<double> F{1.0, -2.0, 0.5, 3.0, 0.0};
  const auto sol = solve_volterra(std::vector<double>(5, 0.0), F, 0.1);
  EXPECT_EQ(sol.y, F);
}

TEST(Solver, ExponentialKernelClosedForm) { EXPECT_LT(max_error_linear(1e-3), 1e-6); }

TEST(Solver, SecondOrderConvergence) {
  const double r = max_error_linear(2e-3) / max_error_linear(1e-3);
  EXPECT_GT(r, 3.6);
  EXPECT_LT(r, 4.4);
}

TEST(Solver, StepResidual) {
  const auto K = exp_kernel(1e-2, 20.0);
  std::vector<double> F(K.size());
  for (std::size_t i = 0; i < F.size(); ++i) F[i] = std::cos(0.3 * i * 1e-2);
  EXPECT_LT(solve_volterra(K, F, 1e-2).max_residual, 1e-12);
}

TEST(Solver, Errors) {
  EXPECT_THROW(solve_volterra({1.0, 2.0}, {1.0}, 0.1), MisuseError);
  EXPECT_THROW(solve_volterra({20.0, 1.0}, {1.0, 1.0}, 0.1), StabilityError);
}

TEST(Resolvent, ZeroKernel) {
  for (double r : resolvent_kernel(std::vector<double>(8, 0.0), 0.1)) EXPECT_EQ(r, 0.0);
}

TEST(Resolvent, ExponentialKernel) {
  const double dt = 1e-3;
  const auto K = exp_kernel(dt, 10.0);
  const auto R = resolvent_kernel(K, dt);
  for (double r : R) ASSERT_NEAR(r, -1.0, 1e-6);  // R^ = -K^/(1-K^) = -1/s
  const auto y = solve_with_resolvent(R, std::vector<double>(K.size(), 1.0), dt);
  for (std::size_t i = 0; i < y.size(); ++i) ASSERT_LT(std::abs(y[i] / (1.0 + i * dt) - 1.0), 1e-6);
  for (std::size_t i = 0; i <= 1000; ++i) ASSERT_NEAR(y[i], 1.0 + i * dt, 1e-6);
}

TEST(Resolvent, PhysicalKernelReconstruction) {
  const auto& p = preset();
  const TimeGrid g(0.05, 60.0);
  const auto ks = kernel_series(p.T, g);
  const auto src = source_series(p.T, "bump", g);
  for (int c = 0; c < 2; ++c) {
    const auto& K = c ? ks.K_S : ks.K_C;
    const auto& F = c ? src.F_S : src.F_C;
    const auto direct = solve_volterra(K, F, g.dt);
    const auto via = solve_with_resolvent(resolvent_kernel(K, g.dt), F, g.dt);
    double e = 0.0;
    for (std::size_t i = 0; i < F.size(); ++i) e = std::max(e, std::abs(direct.y[i] - via[i]));
    EXPECT_LT(e, 1e-6) << c;
    EXPECT_LT(direct.max_residual, 1e-12);
  }
}

TEST(Kernels, VanishAtZero) {
  const auto& p = preset();
  const auto ks = kernel_series(p.T, TimeGrid(0.05, 1.0));
  EXPECT_EQ(ks.K_C[0], 0.0);
  EXPECT_EQ(ks.K_S[0], 0.0);
  EXPECT_NEAR(p.op.K_C(0.0), 0.0, 1e-14);
  EXPECT_NEAR(p.op.K_S(0.0), 0.0, 1e-14);
}

TEST(Kernels, DerivativeOfCompanion) {
  const auto& p = preset();
  for (double d : {1e-2, 5e-3}) {
    const double fd = (p.op.Q_C(1.0 + d) - p.op.Q_C(1.0 - d)) / (2 * d);
    EXPECT_NEAR(fd, p.op.K_C(1.0), 2e-4 * d * d / 1e-4);
  }
  const double fs = (p.op.Q_S(1.0 + 1e-3) - p.op.Q_S(1.0 - 1e-3)) / 2e-3;
  EXPECT_NEAR(fs, p.op.K_S(1.0), 1e-5);
}

TEST(Kernels, CompanionIsEven) {
  const auto& p = preset();
  for (double t : {0.3, 2.0, 17.0}) {
    EXPECT_NEAR(p.op.Q_C(-t), p.op.Q_C(t), 1e-14);
    EXPECT_NEAR(p.op.Q_S(-t), p.op.Q_S(t), 1e-14);
  }
}

TEST(Kernels, SeriesMatchesPointEvaluation) {
  const auto& p = preset();
  const auto ks = kernel_series(p.T, TimeGrid(0.5, 20.0));
  for (std::size_t i = 1; i < ks.t.size(); i += 7) {
    EXPECT_NEAR(ks.K_C[i], p.op.K_C(ks.t[i]), 1e-13);
    EXPECT_NEAR(ks.K_S[i], p.op.K_S(ks.t[i]), 1e-13);
  }
}

// K_C(t) = int G'(h0) v sin x cos x(t), K_S(t) = int G'(h0) v cos x sin x(t),
// with x(t) the pendulum flow started at (x, v).
TEST(Kernels, DirectPhaseSpaceOracle) {
  const auto& p = preset();
  const double M0 = p.st.M0;
  for (double t : {0.1, 0.2}) {
    auto kc = [&](double x, double v) {
      const auto q = oracle::pendulum_flow({x, v}, M0, t, 2e-3);
      return p.st.dG(0.5 * v * v - M0 * std::cos(x)) * v * std::sin(x) * std::cos(q.x);
    };
    auto ks = [&](double x, double v) {
      const auto q = oracle::pendulum_flow({x, v}, M0, t, 2e-3);
      return p.st.dG(0.5 * v * v - M0 * std::cos(x)) * v * std::cos(x) * std::sin(q.x);
    };
    EXPECT_NEAR(p.op.K_C(t), direct_pairing(kc), 1e-7) << t;
    EXPECT_NEAR(p.op.K_S(t), direct_pairing(ks), 1e-7) << t;
  }
}

TEST(Sources, InitialValues) {
  const auto& p = preset();
  const auto r0 = named_observable("bump", p.st.M0);
  const auto s = source_series(p.T, "bump", TimeGrid(0.5, 1.0));
  EXPECT_NEAR(s.F_C[0], direct_pairing([&](double x, double v) { return std::cos(x) * r0(x, v); }), 1e-6);
  EXPECT_NEAR(s.F_S[0], direct_pairing([&](double x, double v) { return std::sin(x) * r0(x, v); }), 1e-6);
}

TEST(Sources, FlowOracleAtOne) {
  const auto& p = preset();
  const double M0 = p.st.M0;
  const auto r0 = named_observable("bump", M0);
  const auto s = source_series(p.T, "bump", TimeGrid(0.5, 1.0));
  const double fc = direct_pairing([&](double x, double v) {
    return std::cos(oracle::pendulum_flow({x, v}, M0, 1.0, 5e-3).x) * r0(x, v);
  });
  const double fs = direct_pairing([&](double x, double v) {
    return std::sin(oracle::pendulum_flow({x, v}, M0, 1.0, 5e-3).x) * r0(x, v);
  });
  EXPECT_NEAR(s.F_C[2], fc, 1e-6);
  EXPECT_NEAR(s.F_S[2], fs, 1e-6);
}

TEST(Transform, ZeroFrequencyIdentity) {
  const auto& p = preset();
  EXPECT_NEAR(std::real(1.0 - hat_kernel_C(p.op, 0.0)), 1.0 + p.op.Q_C(0.0), 1e-8);
  EXPECT_NEAR(std::real(1.0 - hat_kernel_S(p.op, 0.0)), 1.0 + p.op.Q_S(0.0), 1e-8);
}

TEST(Transform, LargeArgumentBound) {
  const auto& p = preset();
  EXPECT_LT(std::abs(hat_kernel_C(p.op, cplx(0.0, -1e4))), 1e-2);
  // |xi K^(xi)| stays bounded (K_C(0) = 0 makes it decay further)
  double prev = 1e300;
  for (double tau : {1e1, 1e2, 1e3, 1e4}) {
    const double m = tau * std::abs(hat_kernel_C(p.op, cplx(0.0, -tau)));
    EXPECT_LE(m, prev);
    prev = m;
  }
}

TEST(Transform, RealOnNegativeImaginaryAxis) {
  const auto& p = preset();
  for (double tau : {1e-3, 0.1, 1.0, 30.0}) {
    const cplx c = hat_kernel_C(p.op, cplx(0.0, -tau)), s = hat_kernel_S(p.op, cplx(0.0, -tau));
    EXPECT_LT(std::abs(c.imag()), 1e-12 * std::max(1.0, std::abs(c)));
    EXPECT_LT(std::abs(s.imag()), 1e-12 * std::max(1.0, std::abs(s)));
  }
}

TEST(Transform, TimeDomainQuadrature) {
  const auto& p = preset();
  const auto r = hat_time_domain_check(p.T, p.op, cplx(1.0, -0.5));
  EXPECT_LT(r.gap, 1e-4);
}

TEST(Transform, UpperHalfPlaneIsRejected) {
  EXPECT_THROW(hat_kernel_C(preset().op, cplx(0.5, 0.1)), DomainError);
}

TEST(Transform, RealAxisResonance) {
  const auto& p = preset();
  const double w = p.T.chart(Chart::Eye).omega[40];
  EXPECT_THROW(hat_kernel_C(p.op, cplx(w, 0.0)), ResonanceError);
}

TEST(Penrose, FourthQuadrantSign) { EXPECT_TRUE(fourth_quadrant_check(preset().op).pass); }

TEST(Penrose, StablePresetAndRefinement) {
  const auto& p = preset();
  PenroseConfig coarse;
  coarse.n_gamma = 61;
  coarse.n_tau = 15;
  PenroseConfig fine = coarse;
  fine.n_gamma = 121;
  fine.n_tau = 30;
  const auto a = penrose_scan(p.op, coarse), b = penrose_scan(p.op, fine);
  EXPECT_GT(b.one_minus_kc0, 0.0);
  EXPECT_GT(b.one_minus_ks0, 0.0);
  EXPECT_TRUE(b.outer_bound);
  EXPECT_TRUE(b.pass);
  EXPECT_GT(b.min_c, 0.0);
  EXPECT_GT(b.min_s, 0.0);
  EXPECT_LT(std::abs(a.min_c - b.min_c), 0.05 * b.min_c);
  EXPECT_LT(std::abs(a.min_s - b.min_s), 0.05 * b.min_s);
}

TEST(Penrose, TranslationModeOfSineKernel) {
  // 1 - K^_S(0) = 1 + Q_S(0) = 1 - (int G' sin^2 summed over l != 0) = 2 on a self-consistent state
  const auto& p = preset();
  EXPECT_NEAR(sine_moment(p.st), -1.0, 1e-12);
  EXPECT_NEAR(std::real(1.0 - hat_kernel_S(p.op, 0.0)), 2.0, 1e-6);
}
