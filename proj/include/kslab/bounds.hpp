#pragma once

// Analytic bound machinery: the ODI blow-up time, a working Gagliardo-Nirenberg
// constant, the constant chain of the L^p lower bound on the blow-up time and
// the upper-bound apparatus built on the moment functional.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "kslab/diagnostics.hpp"
#include "kslab/error.hpp"
#include "kslab/grid.hpp"
#include "kslab/model.hpp"

namespace kslab {

/// Blow-up time of y' = delta y^{1+gamma}, y(0) = beta: 1 / (gamma delta beta^gamma).
inline double odi_blowup_bound(double beta, double delta, double gamma) {
  if (!(beta > 0.0 && delta > 0.0 && gamma > 0.0)) {
    throw Error(ErrorCode::InvalidParams, "odi_blowup_bound needs positive arguments");
  }
  return 1.0 / (gamma * delta * std::pow(beta, gamma));
}

// ---------------------------------------------------------------------------
// Gagliardo-Nirenberg constant
// ---------------------------------------------------------------------------

/// ||f||_q^P <= C (||grad f||_2^{P a} ||f||_2^{P (1-a)} + ||f||_2^P).
struct GnConfig {
  double norm_exp;  // q
  double power;     // P
  double a;
};

/// The two configurations needed for exponent p: (q = P = 2(p+1)/p, a = theta_0)
/// and (q = 2(p+1+eps)/p, P = 2(p+1)/p, a = theta_eps).
inline std::vector<GnConfig> gn_configs(double p, double eps, int dim) {
  const double power = 2.0 * (p + 1.0) / p;
  const double theta0 = dim / (2.0 * (p + 1.0));
  const double theta_eps = dim * (1.0 + eps) / (2.0 * (p + 1.0 + eps));
  return {{power, power, theta0}, {2.0 * (p + 1.0 + eps) / p, power, theta_eps}};
}

inline constexpr int kGnSafetyFactor = 2;
inline constexpr std::size_t kGnDefaultFamily = 256;

namespace detail {

/// Van der Corput sequence in base 2; keeps the trial family nested.
inline double van_der_corput(std::size_t i) {
  double x = 0.0, f = 0.5;
  for (; i > 0; i >>= 1, f *= 0.5) {
    if (i & 1U) x += f;
  }
  return x;
}

struct Trial {
  int kind;  // 0 constant, 1 bump, 2 power, 3 oscillatory
  double param;

  double value(double x) const {
    switch (kind) {
      case 1: return std::exp(-param * x * x);
      case 2: return std::pow(1.0 - x, param);
      case 3: return 1.0 + 0.9 * std::cos(param * std::numbers::pi * x);
      default: return 1.0;
    }
  }
  /// d/dx; divide by R for d/dr.
  double slope(double x) const {
    switch (kind) {
      case 1: return -2.0 * param * x * std::exp(-param * x * x);
      case 2: return -param * std::pow(1.0 - x, param - 1.0);
      case 3: return -0.9 * param * std::numbers::pi * std::sin(param * std::numbers::pi * x);
      default: return 0.0;
    }
  }
};

inline Trial trial_member(std::size_t i) {
  if (i == 0) return {0, 0.0};
  const double t = van_der_corput((i - 1) / 3 + 1);
  switch ((i - 1) % 3) {
    case 0: return {1, 0.5 * std::pow(1000.0, t)};
    case 1: return {2, 1.0 + 30.0 * t};
    default: return {3, 1.0 + 39.0 * t};
  }
}

}  // namespace detail

/// GN quotient of trial member i on B_R in R^N.
inline double gn_trial_quotient(std::size_t i, const GnConfig& cfg, int dim, double radius) {
  const detail::Trial f = detail::trial_member(i);
  using Gauss = boost::math::quadrature::gauss<double, 20>;
  constexpr int kPanels = 256;
  double iq = 0.0, i2 = 0.0, ig = 0.0;
  for (int j = 0; j < kPanels; ++j) {
    const double x0 = static_cast<double>(j) / kPanels;
    const double x1 = static_cast<double>(j + 1) / kPanels;
    iq += Gauss::integrate([&](double x) { return std::pow(std::abs(f.value(x)), cfg.norm_exp) * std::pow(x, dim - 1); }, x0, x1);
    i2 += Gauss::integrate([&](double x) { const double v = f.value(x); return v * v * std::pow(x, dim - 1); }, x0, x1);
    ig += Gauss::integrate([&](double x) { const double v = f.slope(x); return v * v * std::pow(x, dim - 1); }, x0, x1);
  }
  // Back to B_R: dx -> R^N dx, |grad f|^2 -> R^{-2}.
  const double scale = unit_sphere_area(dim) * std::pow(radius, dim);
  iq *= scale;
  i2 *= scale;
  ig *= scale / (radius * radius);
  const double lhs = std::pow(iq, cfg.power / cfg.norm_exp);
  const double rhs = std::pow(ig, 0.5 * cfg.power * cfg.a) * std::pow(i2, 0.5 * cfg.power * (1.0 - cfg.a)) +
                     std::pow(i2, 0.5 * cfg.power);
  return lhs / rhs;
}

/// Largest quotient over the first `family_size` trial profiles (constant,
/// Gaussian bumps, powers of 1 - r/R, cosine oscillations) times `safety`.
/// A heuristic working value, not a certified constant.
inline double estimate_gn_constant(const GnConfig& cfg, int dim, double radius,
                                   std::size_t family_size = kGnDefaultFamily,
                                   double safety = kGnSafetyFactor) {
  double best = 0.0;
  for (std::size_t i = 0; i < family_size; ++i) {
    best = std::max(best, gn_trial_quotient(i, cfg, dim, radius));
  }
  return safety * best;
}

/// Working constant valid for both configurations used with exponent p.
inline double estimate_gn_constant(double p, double eps, int dim, double radius,
                                   std::size_t family_size = kGnDefaultFamily,
                                   double safety = kGnSafetyFactor) {
  double best = 0.0;
  for (const auto& cfg : gn_configs(p, eps, dim)) {
    best = std::max(best, estimate_gn_constant(cfg, dim, radius, family_size, safety));
  }
  return best;
}

// ---------------------------------------------------------------------------
// Lower bound on the blow-up time
// ---------------------------------------------------------------------------

/// eps = (2p - N) / (2N), half of the admissible range (0, 2p/N - 1).
inline double epsilon_for(double p, int dim) {
  if (!(p > 0.5 * dim)) throw Error(ErrorCode::InvalidP, "lower bound needs p > N/2");
  return (2.0 * p - dim) / (2.0 * dim);
}

struct EpsilonChoice {
  double eps = 0.0;
  double eps1 = 0.0;
  double eps2 = 0.0;
};

/// Holder constant c(eps, N, p) bounding
/// omega_N int_0^R u^p r^{-1} (int_0^r rho^{N-1} u) dr by
/// c (int u^{p+1})^{1/(p+1)} (int u^{p+1+eps})^{p/(p+1+eps)}.
inline double holder_constant(double p, double eps, int dim, double radius) {
  const double nd = dim;
  const double omega = unit_sphere_area(dim);
  const double e = nd * p * eps / ((p + 1.0) * (1.0 + eps));
  return std::pow(omega / nd, p / (p + 1.0)) * std::pow(omega, -p / (p + 1.0 + eps)) *
         std::pow(std::pow(radius, e) / e, (1.0 + eps) / (p + 1.0 + eps));
}

struct BoundReport {
  double p = 0.0;
  double eps = 0.0, eps1 = 0.0, eps2 = 0.0;
  double c_gn = 0.0;
  double mbar = 0.0;
  double c_holder = 0.0;
  double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0, c5 = 0.0, c1_tilde = 0.0;
  /// Total gradient coefficient c3 * c4.
  double c_grad = 0.0;
  double b1 = 0.0, b2 = 0.0, b3 = 0.0, b4 = 0.0;
  double gamma1 = 0.0, gamma2 = 0.0, gamma = 0.0;
  double psi0 = std::numeric_limits<double>::quiet_NaN();
  double t_quadrature = std::numeric_limits<double>::quiet_NaN();
  double t_closed_form = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::string> notes;
};

namespace detail {

inline double gamma_top(double p, double eps, int dim) {
  const double nd = dim;
  const double q = nd * (p + 1.0) * (1.0 + eps) / (p + 1.0 + eps);
  return (2.0 * (p + 1.0) - q) / (2.0 * p - q);
}

/// theta' = N (p+1)(1+eps) / (2p (p+1+eps)): exponent of the gradient factor.
inline double theta_prime(double p, double eps, int dim) {
  return dim * (p + 1.0) * (1.0 + eps) / (2.0 * p * (p + 1.0 + eps));
}

struct Chain {
  double c_holder, c1, c2, c3;
};

inline Chain chain_head(double p, double eps, const ModelParams& params, double mbar) {
  const double nd = params.dim;
  Chain out;
  out.c_holder = holder_constant(p, eps, params.dim, params.radius);
  out.c1 = 2.0 * params.alpha * (mbar / params.volume()) * params.k_f * (p - 1.0);
  const double mixed = 2.0 * params.alpha * nd * (nd - 1.0) * out.c_holder * params.k_f;
  out.c2 = params.k_f * (p - 1.0) / p + mixed * (p - 1.0) / (p * (p + 1.0));
  out.c3 = mixed * (p - 1.0) / (p + 1.0);
  return out;
}

}  // namespace detail

/// (gamma1, gamma2, gamma) for exponent p, dimension N and eps.
struct GammaTriple {
  double gamma1, gamma2, gamma;
};

inline GammaTriple gamma_exponents(double p, int dim, double eps) {
  const double nd = dim;
  return {(p + 1.0) / p, (2.0 * (p + 1.0) - nd) / (2.0 * p - nd), detail::gamma_top(p, eps, dim)};
}

/// eps from epsilon_for; eps1 and eps2 split the gradient budget 4(p-1)/p^2
/// evenly between the two Young steps.
inline EpsilonChoice select_epsilon(double p, const ModelParams& params, double c_gn) {
  EpsilonChoice out;
  out.eps = epsilon_for(p, params.dim);
  const auto chain = detail::chain_head(p, out.eps, params, 0.0);
  const double budget = 2.0 * (p - 1.0) / (p * p);
  out.eps1 = budget / (chain.c2 * (params.dim / (2.0 * p)) * c_gn);
  out.eps2 = budget / (chain.c3 * detail::theta_prime(p, out.eps, params.dim) * c_gn);
  return out;
}

inline BoundReport lower_bound_constants(double p, const ModelParams& params, double mbar,
                                         double c_gn, const EpsilonChoice& e) {
  params.validate();
  const double nd = params.dim;
  if (!(p > 0.5 * nd)) throw Error(ErrorCode::InvalidP, "lower bound needs p > N/2");
  if (!(e.eps > 0.0 && 2.0 * p - nd * (1.0 + e.eps) > 0.0)) {
    throw Error(ErrorCode::InvalidP, "eps outside (0, 2p/N - 1)");
  }
  if (!(c_gn > 0.0 && e.eps1 > 0.0 && e.eps2 > 0.0)) {
    throw Error(ErrorCode::InvalidParams, "C_GN, eps1 and eps2 must be positive");
  }
  BoundReport r;
  r.p = p;
  r.eps = e.eps;
  r.eps1 = e.eps1;
  r.eps2 = e.eps2;
  r.c_gn = c_gn;
  r.mbar = mbar;

  const auto chain = detail::chain_head(p, e.eps, params, mbar);
  r.c_holder = chain.c_holder;
  r.c1 = chain.c1;
  r.c2 = chain.c2;
  r.c3 = chain.c3;
  const double th = detail::theta_prime(p, e.eps, params.dim);
  r.c4 = th * e.eps2 * c_gn;
  r.c5 = c_gn * (1.0 - th) * std::pow(e.eps2, -th / (1.0 - th));
  r.c_grad = r.c3 * r.c4;
  r.c1_tilde = c_gn * (2.0 * p - nd) / (2.0 * p * std::pow(e.eps1, nd / (2.0 * p - nd))) * r.c2;

  const auto g = gamma_exponents(p, params.dim, e.eps);
  r.gamma1 = g.gamma1;
  r.gamma2 = g.gamma2;
  r.gamma = g.gamma;
  r.b1 = params.lambda * p;
  r.b2 = std::pow(p, 1.0 / p) * (p * c_gn + r.c1);
  r.b3 = r.c1_tilde * std::pow(p, r.gamma2);
  r.b4 = r.c5 * std::pow(p, r.gamma);

  r.notes = {
      "C_GN: max of trial-family quotients times a safety factor (heuristic)",
      "c: omega^{p/(p+1)} N^{-p/(p+1)} omega^{-p/(p+1+eps)} (R^E/E)^{(1+eps)/(p+1+eps)}, "
      "E = N p eps / ((p+1)(1+eps))",
      "c5: Young with exponents 1/theta', 1/(1-theta'), theta' = N(p+1)(1+eps)/(2p(p+1+eps))",
      "eps1, eps2: gradient budget 4(p-1)/p^2 split evenly",
  };
  return r;
}

struct LowerBoundTimes {
  double quadrature;
  double closed_form;
};

/// T = int_{Psi0}^inf d eta / (B1 eta + B2 eta^g1 + B3 eta^g2 + B4 eta^g) and its
/// closed-form minorant 1 / (A (g - 1) Psi0^{g-1}).
///
/// With eta = Psi0 t^{-1/(g-1)} the integral becomes
/// int_0^1 eta^g / D(eta) * Psi0^{1-g} / (g-1) dt, whose integrand is bounded
/// (it tends to 1 / B4 as t -> 0).
inline LowerBoundTimes lower_bound_T(double psi0, double b1, double b2, double b3, double b4,
                                     double gamma1, double gamma2, double gamma,
                                     double tolerance = 1e-12) {
  if (!(psi0 > 0.0)) throw Error(ErrorCode::InvalidParams, "Psi0 must be positive");
  if (!(gamma > 1.0) || !(b4 > 0.0)) {
    throw Error(ErrorCode::DivergentTail, "tail integral needs gamma > 1 and B4 > 0");
  }
  const double scale = std::pow(psi0, 1.0 - gamma) / (gamma - 1.0);
  auto integrand = [&](double t) {
    if (t <= 0.0) return scale / b4;
    const double eta = psi0 * std::pow(t, -1.0 / (gamma - 1.0));
    // eta^g / D(eta) written to avoid overflow for large eta.
    const double ratio = b1 * std::pow(eta, 1.0 - gamma) + b2 * std::pow(eta, gamma1 - gamma) +
                         b3 * std::pow(eta, gamma2 - gamma) + b4;
    return scale / ratio;
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  const double quad = GK::integrate(integrand, 0.0, 1.0, 20, tolerance);
  const double a = b1 * std::pow(psi0, 1.0 - gamma) + b2 * std::pow(psi0, gamma1 - gamma) +
                   b3 * std::pow(psi0, gamma2 - gamma) + b4;
  return {quad, 1.0 / (a * (gamma - 1.0) * std::pow(psi0, gamma - 1.0))};
}

inline LowerBoundTimes lower_bound_T(double psi0, BoundReport& r, double tolerance = 1e-12) {
  const auto t = lower_bound_T(psi0, r.b1, r.b2, r.b3, r.b4, r.gamma1, r.gamma2, r.gamma, tolerance);
  r.psi0 = psi0;
  r.t_quadrature = t.quadrature;
  r.t_closed_form = t.closed_form;
  return t;
}

/// Full chain for exponent p and initial value Psi0 = ||u0||_p^p / p.
inline BoundReport lower_bound_report(double p, const ModelParams& params, double mbar, double psi0,
                                      std::size_t family_size = kGnDefaultFamily,
                                      double safety = kGnSafetyFactor) {
  const double eps = epsilon_for(p, params.dim);
  const double c_gn = estimate_gn_constant(p, eps, params.dim, params.radius, family_size, safety);
  BoundReport r = lower_bound_constants(p, params, mbar, c_gn, select_epsilon(p, params, c_gn));
  lower_bound_T(psi0, r);
  return r;
}

// ---------------------------------------------------------------------------
// Upper bound from the moment functional
// ---------------------------------------------------------------------------

struct UpperBoundReport {
  double a = 0.0, b = 0.0;
  double mbar = 0.0;
  double mbar_sq = 0.0;  // Mbar^2
  double c_bar = 0.0;
  double c1 = 0.0;
  double c4_bar = 0.0;
  double delta = 0.0;
  /// Drift constant C of y' >= delta y^{(b+1)/b} - C.
  double drift = 0.0;
  double beta = 0.0;
  double t_upper = std::numeric_limits<double>::quiet_NaN();
  std::string note;
};

/// Blow-up time of y' = delta y^q - C, y(0) = beta, q = (b+1)/b, i.e.
/// int_beta^inf dy / (delta y^q - C). Requires delta beta^q > C.
inline double moment_blowup_time(double beta, double delta, double b, double drift,
                                 double tolerance = 1e-12) {
  const double q = (b + 1.0) / b;
  if (drift == 0.0) return b / (delta * std::pow(beta, 1.0 / b));
  if (!(delta * std::pow(beta, q) > drift)) {
    throw Error(ErrorCode::InsufficientInitialMass, "y does not grow initially");
  }
  // y = beta t^{-1/(q-1)} maps [beta, inf) onto (0, 1].
  const double scale = std::pow(beta, 1.0 - q) / (q - 1.0);
  auto integrand = [&](double t) {
    if (t <= 0.0) return scale / delta;
    const double y = beta * std::pow(t, -1.0 / (q - 1.0));
    return scale / (delta - drift * std::pow(y, -q));
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  return GK::integrate(integrand, 0.0, 1.0, 20, tolerance);
}

inline UpperBoundReport upper_bound_apparatus(const ModelParams& params, double mbar,
                                              const MomentExponents& ab, double beta,
                                              double drift = 0.0) {
  params.validate();
  const double nd = params.dim;
  if (!(ab.b > 0.0 && ab.b < 1.0 && ab.a > 0.0 && ab.b + 1.0 - ab.a > 0.0)) {
    throw Error(ErrorCode::EmptyInterval, "(a, b) outside the admissible range");
  }
  if (!(drift >= 0.0)) throw Error(ErrorCode::InvalidParams, "drift constant must be >= 0");
  UpperBoundReport r;
  r.a = ab.a;
  r.b = ab.b;
  r.mbar = mbar;
  r.mbar_sq = drift_bound_sq(params, mbar);
  r.c_bar = limiter_floor(params, mbar);
  r.c1 = moment_coercivity(params, r.c_bar, ab.a, ab.b);
  const double e = ab.b + 1.0 - ab.a;
  r.c4_bar = std::pow(e / std::pow(params.radius, nd * e), 1.0 / ab.b);
  r.delta = 0.25 * ab.b * r.c1 * r.c4_bar;
  r.drift = drift;
  r.beta = beta;
  r.note = "Mbar^2 = 2 mbar^2 R^{2N} / (N^2 |Omega|^2), Cbar = (1 + Mbar^2)^{-alpha}";
  const double q = (ab.b + 1.0) / ab.b;
  if (!(beta > 0.0) || !(r.delta * std::pow(beta, q) > 2.0 * drift)) {
    throw Error(ErrorCode::InsufficientInitialMass,
                "delta beta^{(b+1)/b} <= 2C; upper bound not asserted");
  }
  r.t_upper = moment_blowup_time(beta, r.delta, ab.b, drift);
  return r;
}

}  // namespace kslab
