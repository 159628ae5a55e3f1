#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kslab/bounds.hpp"
#include "ode_oracle.hpp"

using namespace kslab;

namespace {

ModelParams blowup_params() {
  ModelParams p;
  p.dim = 3;
  p.alpha = 0.1;
  p.k = 1.1;
  p.mu = 0.1;
  return p;
}

}  // namespace

TEST(Odi, Examples) {
  EXPECT_DOUBLE_EQ(odi_blowup_bound(1.0, 1.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(odi_blowup_bound(2.0, 0.5, 2.0), 0.25);
}

TEST(Odi, MatchesAdaptiveIntegration) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> beta(0.2, 5.0), delta(0.1, 10.0), gamma(0.1, 3.0);
  for (int i = 0; i < 20; ++i) {
    const double b = beta(rng), d = delta(rng), g = gamma(rng);
    const double exact = odi_blowup_bound(b, d, g);
    EXPECT_NEAR(oracle::blowup_time(b, d, 1.0 + g), exact, 1e-6 * exact);
  }
}

TEST(GnConstant, ConstantTrialClosedForm) {
  for (const auto& cfg : gn_configs(2.0, 1.0 / 6.0, 3)) {
    const double vol = ball_volume(3, 1.5);
    const double expected = std::pow(vol, cfg.power / cfg.norm_exp - 0.5 * cfg.power);
    EXPECT_NEAR(gn_trial_quotient(0, cfg, 3, 1.5), expected, 1e-10 * expected);
  }
}

TEST(GnConstant, DominatesEveryMember) {
  const auto cfg = gn_configs(2.0, 1.0 / 6.0, 3).front();
  const double c = estimate_gn_constant(cfg, 3, 1.0, 200, 2.0);
  for (std::size_t i = 0; i < 200; ++i) EXPECT_LE(gn_trial_quotient(i, cfg, 3, 1.0), c / 2.0);
}

TEST(GnConstant, NondecreasingUnderFamilyGrowth) {
  for (const auto& cfg : gn_configs(2.5, 0.3, 4)) {
    double prev = 0.0;
    for (std::size_t size : {32u, 64u, 128u, 256u}) {
      const double c = estimate_gn_constant(cfg, 4, 1.0, size);
      EXPECT_GE(c, prev);
      prev = c;
    }
  }
}

TEST(Epsilon, Example) {
  EXPECT_NEAR(epsilon_for(2.0, 3), 1.0 / 6.0, 1e-15);
  EXPECT_THROW(epsilon_for(1.5, 3), Error);
}

TEST(Epsilon, ConstraintsAndBudget) {
  std::mt19937_64 rng(29);
  std::uniform_int_distribution<int> dim(3, 8);
  std::uniform_real_distribution<double> extra(0.05, 4.0), cgn(0.1, 10.0);
  for (int i = 0; i < 200; ++i) {
    ModelParams params = blowup_params();
    params.dim = dim(rng);
    const double p = 0.5 * params.dim + extra(rng);
    const double c_gn = cgn(rng);
    const auto e = select_epsilon(p, params, c_gn);
    EXPECT_GT(e.eps, 0.0);
    EXPECT_LT(e.eps, 2.0 * p / params.dim - 1.0);
    EXPECT_GT(2.0 * p - params.dim * (1.0 + e.eps), 0.0);

    const auto r = lower_bound_constants(p, params, 2.0 * params.volume(), c_gn, e);
    const double first = r.c2 * (params.dim / (2.0 * p)) * e.eps1 * c_gn;
    const double total = first + r.c_grad;
    EXPECT_NEAR(total, 4.0 * (p - 1.0) / (p * p), 1e-12);
  }
}

TEST(Gamma, Examples) {
  const auto g = gamma_exponents(3.0, 3, epsilon_for(3.0, 3));
  EXPECT_NEAR(g.gamma1, 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(g.gamma2, 5.0 / 3.0, 1e-15);
}

TEST(Gamma, OrderingOnRandomTuples) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> dim(3, 10);
  std::uniform_real_distribution<double> extra(1e-3, 6.0), frac(1e-3, 1.0 - 1e-3);
  for (int i = 0; i < 1000; ++i) {
    const int n = dim(rng);
    const double p = 0.5 * n + extra(rng);
    const double eps = frac(rng) * (2.0 * p / n - 1.0);
    const auto g = gamma_exponents(p, n, eps);
    EXPECT_GT(g.gamma1, 1.0);
    EXPECT_LT(g.gamma1, g.gamma2);
    EXPECT_LT(g.gamma2, g.gamma);
  }
}

TEST(LowerBound, ChainIsPositive) {
  const auto params = blowup_params();
  const auto r = lower_bound_report(2.0, params, 2.0 * params.volume(), 10.0);
  for (double c : {r.c_gn, r.c_holder, r.c1, r.c2, r.c3, r.c4, r.c5, r.c1_tilde, r.b1, r.b2, r.b3, r.b4}) {
    EXPECT_GT(c, 0.0);
  }
  EXPECT_DOUBLE_EQ(r.b1, params.lambda * 2.0);
}

TEST(LowerBound, B1Example) {
  ModelParams params = blowup_params();
  params.lambda = 2.0;
  const auto e = select_epsilon(3.0, params, 1.0);
  EXPECT_DOUBLE_EQ(lower_bound_constants(3.0, params, 10.0, 1.0, e).b1, 6.0);
}

TEST(LowerBound, ScalingWithGnConstant) {
  const auto params = blowup_params();
  const double p = 2.0, mbar = 20.0, c_gn = 0.8;
  const auto e = select_epsilon(p, params, c_gn);
  const auto r1 = lower_bound_constants(p, params, mbar, c_gn, e);
  const auto r2 = lower_bound_constants(p, params, mbar, 2.0 * c_gn, e);
  EXPECT_NEAR(r2.b2, std::pow(p, 1.0 / p) * (p * 2.0 * c_gn + r1.c1), 1e-12 * r2.b2);
  EXPECT_NEAR(r2.b3, 2.0 * r1.b3, 1e-12 * r2.b3);
  EXPECT_NEAR(r2.b4, 2.0 * r1.b4, 1e-12 * r2.b4);
  EXPECT_DOUBLE_EQ(r2.b1, r1.b1);
}

TEST(LowerBound, PureTopPowerCase) {
  const auto t = lower_bound_T(1.0, 0.0, 0.0, 0.0, 1.0, 1.2, 1.5, 2.0);
  EXPECT_NEAR(t.quadrature, 1.0, 1e-12);
  EXPECT_NEAR(t.closed_form, 1.0, 1e-12);
}

TEST(LowerBound, ClosedFormBelowQuadrature) {
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> b(0.01, 100.0), psi0(0.01, 1e4);
  for (int i = 0; i < 100; ++i) {
    const auto t = lower_bound_T(psi0(rng), b(rng), b(rng), b(rng), b(rng), 1.3, 1.8, 2.6);
    EXPECT_LE(t.closed_form, t.quadrature * (1.0 + 1e-12));
  }
}

TEST(LowerBound, QuadratureStableUnderTightening) {
  const auto loose = lower_bound_T(3.0, 2.0, 5.0, 0.7, 0.2, 1.5, 3.0, 3.9, 1e-9);
  const auto tight = lower_bound_T(3.0, 2.0, 5.0, 0.7, 0.2, 1.5, 3.0, 3.9, 1e-14);
  EXPECT_NEAR(loose.quadrature, tight.quadrature, 1e-8 * tight.quadrature);
}

TEST(LowerBound, QuadratureMatchesOdeOracleForTopPower) {
  // Only B4 present: the integral is the ODI blow-up time with exponent gamma.
  const auto t = lower_bound_T(2.0, 0.0, 0.0, 0.0, 0.5, 1.2, 1.5, 2.7);
  EXPECT_NEAR(t.quadrature, oracle::blowup_time(2.0, 0.5, 2.7), 1e-8 * t.quadrature);
}

TEST(LowerBound, DivergentTail) {
  EXPECT_THROW(lower_bound_T(1.0, 1.0, 1.0, 1.0, 1.0, 0.5, 0.7, 1.0), Error);
}

TEST(UpperBound, DriftFreeClosedForm) {
  const auto params = blowup_params();
  const auto ab = select_ab(params);
  const double mbar = 2.0 * params.volume();
  const auto r = upper_bound_apparatus(params, mbar, ab, 3.0);
  EXPECT_NEAR(r.t_upper, ab.b / (r.delta * std::pow(3.0, 1.0 / ab.b)), 1e-14 * r.t_upper);
  EXPECT_NEAR(r.t_upper, odi_blowup_bound(3.0, r.delta, 1.0 / ab.b), 1e-12 * r.t_upper);
  EXPECT_NEAR(moment_blowup_time(3.0, 2.0 * r.delta, ab.b, 0.0), 0.5 * r.t_upper, 1e-14 * r.t_upper);
}

TEST(UpperBound, DriftConvergesFromAbove) {
  const double beta = 2.0, delta = 0.7, b = 0.4;
  const double base = moment_blowup_time(beta, delta, b, 0.0);
  double prev = std::numeric_limits<double>::infinity();
  for (double c : {0.5, 0.1, 0.01, 1e-4, 1e-6}) {
    const double mine = moment_blowup_time(beta, delta, b, c);
    const double ode = oracle::blowup_time(beta, delta, (b + 1.0) / b, c);
    EXPECT_NEAR(mine, ode, 1e-8 * ode);
    EXPECT_GT(mine, base);
    EXPECT_LT(mine, prev);
    prev = mine;
  }
  EXPECT_NEAR(prev, base, 1e-5 * base);
}

TEST(UpperBound, InsufficientInitialMass) {
  const auto params = blowup_params();
  const auto ab = select_ab(params);
  try {
    upper_bound_apparatus(params, 10.0, ab, 1e-6, 1.0);
    FAIL() << "expected InsufficientInitialMass";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientInitialMass);
  }
}
