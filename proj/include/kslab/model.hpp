#pragma once

// Model parameters, the nonlinearities of the flux-limited Keller-Segel system
//
//   u_t = Lap u - div(u f(|grad v|^2) grad v) + g(u),
//   0   = Lap v - m(t) + u,   int v = 0,
//
// with f(xi) = k_f (1 + xi)^{-alpha} and g(u) = lambda u - mu u^k on a ball,
// the regime classifier, the mass bound and the initial-data families.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "kslab/error.hpp"
#include "kslab/grid.hpp"

namespace kslab {

struct ModelParams {
  int dim = 3;
  double radius = 1.0;
  double k_f = 1.0;
  double alpha = 0.1;
  double lambda = 1.0;
  double mu = 1.0;
  double k = 1.5;

  void validate() const {
    if (dim < 3) throw Error(ErrorCode::InvalidParams, "dim must be >= 3");
    if (!(radius > 0.0)) throw Error(ErrorCode::InvalidParams, "radius must be positive");
    if (!(k_f > 0.0)) throw Error(ErrorCode::InvalidParams, "k_f must be positive");
    if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidParams, "alpha must be positive");
    if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidParams, "lambda must be positive");
    if (!(mu > 0.0)) throw Error(ErrorCode::InvalidParams, "mu must be positive");
    if (!(k > 1.0)) throw Error(ErrorCode::InvalidParams, "k must be > 1");
  }

  double volume() const { return ball_volume(dim, radius); }
};

/// f(grad_sq) = k_f (1 + grad_sq)^{-alpha}.
inline double flux_limiter(double grad_sq, const ModelParams& p) {
  return p.k_f * std::pow(1.0 + grad_sq, -p.alpha);
}

/// g(u) = lambda u - mu u^k.
inline double source(double u, const ModelParams& p) {
  return p.lambda * u - p.mu * std::pow(u, p.k);
}

/// Positive root of g, (lambda / mu)^{1/(k-1)}; the constant steady state.
inline double source_root(const ModelParams& p) {
  return std::pow(p.lambda / p.mu, 1.0 / (p.k - 1.0));
}

/// Maximizer of g on [0, inf): (lambda / (mu k))^{1/(k-1)}.
inline double source_maximizer(const ModelParams& p) {
  return std::pow(p.lambda / (p.mu * p.k), 1.0 / (p.k - 1.0));
}

inline double source_max(const ModelParams& p) { return source(source_maximizer(p), p); }

// ---------------------------------------------------------------------------
// Mass bound
// ---------------------------------------------------------------------------

/// max{ int u0, ((lambda/mu) |Omega|^{k-1})^{1/(k-1)} }.
inline double mass_bound(double u0_integral, double lambda, double mu, double k, double volume) {
  const double logistic = std::pow(lambda / mu * std::pow(volume, k - 1.0), 1.0 / (k - 1.0));
  return std::max(u0_integral, logistic);
}

inline double mass_bound(double u0_integral, const ModelParams& p) {
  return mass_bound(u0_integral, p.lambda, p.mu, p.k, p.volume());
}

// ---------------------------------------------------------------------------
// Upper-bound apparatus pieces needed by the classifier
// ---------------------------------------------------------------------------

/// Squared bound on |w - m s / N| with the mean bounded by mbar/|Omega|:
/// 2 mbar^2 R^{2N} / (N^2 |Omega|^2).
inline double drift_bound_sq(const ModelParams& p, double mbar) {
  const double vol = p.volume();
  const double n = p.dim;
  return 2.0 * mbar * mbar * std::pow(p.radius, 2.0 * n) / (n * n * vol * vol);
}

/// Lower bound of f / k_f along solutions: (1 + Mbar^2)^{-alpha}.
inline double limiter_floor(const ModelParams& p, double mbar) {
  return std::pow(1.0 + drift_bound_sq(p, mbar), -p.alpha);
}

/// c1(a, b) = min{ N^2 (1-b), a N k_f Cbar / (2 (b+1)) }.
inline double moment_coercivity(const ModelParams& p, double c_bar, double a, double b) {
  const double n = p.dim;
  return std::min(n * n * (1.0 - b), a * n * p.k_f * c_bar / (2.0 * (b + 1.0)));
}

/// Supremum over admissible (a, b) of (a-1) c1(a,b) / (4N) for k = 2, N >= 5.
///
/// Admissible: b in (2/(N-2), 1), 1 < a < (N-2)(b+1)/N. For fixed b both
/// factors grow with a, so the supremum in a sits at the right end of its
/// interval; the remaining one-dimensional problem in b is scanned and then
/// refined by golden-section search.
inline double mu0_estimate(const ModelParams& p, double mbar, int scan_points = 4096) {
  if (p.dim < 5 || p.k != 2.0) {
    throw Error(ErrorCode::InvalidRegime, "mu0 is defined only for k = 2 and N >= 5");
  }
  const double n = p.dim;
  const double c_bar = limiter_floor(p, mbar);
  const double b_lo = 2.0 / (n - 2.0);
  const double b_hi = 1.0;
  auto value = [&](double b) {
    const double a = (n - 2.0) * (b + 1.0) / n;
    return (a - 1.0) * moment_coercivity(p, c_bar, a, b) / (4.0 * n);
  };

  double best_b = b_lo;
  double best = 0.0;
  for (int i = 1; i < scan_points; ++i) {
    const double b = b_lo + (b_hi - b_lo) * i / scan_points;
    const double v = value(b);
    if (v > best) {
      best = v;
      best_b = b;
    }
  }
  const double h = (b_hi - b_lo) / scan_points;
  double lo = std::max(b_lo, best_b - h);
  double hi = std::min(b_hi, best_b + h);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - phi * (hi - lo);
  double x2 = lo + phi * (hi - lo);
  double f1 = value(x1);
  double f2 = value(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = value(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = value(x1);
    }
  }
  return std::max({best, f1, f2});
}

// ---------------------------------------------------------------------------
// Regime classification
// ---------------------------------------------------------------------------

enum class Regime { BlowupPossible, GlobalBounded, Undetermined };

constexpr std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::BlowupPossible: return "BlowupPossible";
    case Regime::GlobalBounded: return "GlobalBounded";
    case Regime::Undetermined: return "Undetermined";
  }
  return "Undetermined";
}

struct RegimeVerdict {
  Regime verdict = Regime::Undetermined;
  /// Which clause fired, e.g. "blowup:subquadratic".
  std::string clause;
  /// (N-2) / (2(N-1)).
  double alpha_critical = 0.0;
  /// min{2, 1 + (N-2)^2/4}.
  double k_upper = 0.0;
  std::optional<double> mu0;
  double mass_bound = 0.0;
};

inline double critical_alpha(int dim) { return (dim - 2.0) / (2.0 * (dim - 1.0)); }

inline double subquadratic_k_limit(int dim) {
  return std::min(2.0, 1.0 + (dim - 2.0) * (dim - 2.0) / 4.0);
}

/// `initial_mass` is int_Omega u0; when absent the logistic branch of the mass
/// bound is used on its own. It only matters for the (N >= 5, k = 2) clause.
inline RegimeVerdict classify_regime(const ModelParams& p,
                                     std::optional<double> initial_mass = std::nullopt) {
  p.validate();
  RegimeVerdict out;
  out.alpha_critical = critical_alpha(p.dim);
  out.k_upper = subquadratic_k_limit(p.dim);
  out.mass_bound = mass_bound(initial_mass.value_or(0.0), p);

  const bool alpha_small = p.alpha < out.alpha_critical;
  const bool alpha_large = p.alpha > out.alpha_critical;

  if (p.dim >= 5 && p.k == 2.0) out.mu0 = mu0_estimate(p, out.mass_bound);

  if (alpha_small && p.k > 1.0 && p.k < out.k_upper) {
    out.verdict = Regime::BlowupPossible;
    out.clause = "blowup:subquadratic";
  } else if (alpha_small && p.dim >= 5 && p.k == 2.0 && p.mu <= *out.mu0) {
    out.verdict = Regime::BlowupPossible;
    out.clause = "blowup:quadratic-small-mu";
  } else if (alpha_large) {
    out.verdict = Regime::GlobalBounded;
    out.clause = "bounded:alpha-supercritical";
  } else if (p.k > 2.0) {
    out.verdict = Regime::GlobalBounded;
    out.clause = "bounded:superquadratic";
  } else if (p.alpha == out.alpha_critical) {
    out.verdict = Regime::Undetermined;
    out.clause = "undetermined:critical-alpha";
  } else if (p.k == 2.0 && p.dim >= 5) {
    out.verdict = Regime::Undetermined;
    out.clause = "undetermined:quadratic-large-mu";
  } else {
    out.verdict = Regime::Undetermined;
    out.clause = "undetermined:uncovered-k";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Initial data
// ---------------------------------------------------------------------------

enum class ProfileKind { Constant, PeakedPower, PeakedExponential };

constexpr std::string_view to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::Constant: return "constant";
    case ProfileKind::PeakedPower: return "peaked-power";
    case ProfileKind::PeakedExponential: return "peaked-exponential";
  }
  return "constant";
}

inline std::optional<ProfileKind> parse_profile(std::string_view name) {
  if (name == "constant") return ProfileKind::Constant;
  if (name == "peaked-power") return ProfileKind::PeakedPower;
  if (name == "peaked-exponential") return ProfileKind::PeakedExponential;
  return std::nullopt;
}

struct InitialDataSpec {
  ProfileKind kind = ProfileKind::PeakedExponential;
  /// Target spatial mean.
  double m0 = 1.0;
  /// Exponent q for peaked-power, decay rate c for peaked-exponential.
  double concentration = 20.0;

  void validate() const {
    if (!(m0 > 0.0)) throw Error(ErrorCode::InvalidParams, "m0 must be positive");
    if (!(concentration > 0.0)) {
      throw Error(ErrorCode::InvalidParams, "concentration must be positive");
    }
  }
};

/// Floor added to the peaked-power profile, relative to its peak.
inline constexpr double kPowerProfileFloor = 1e-2;

/// Samples `profile` on the grid, rejects negative values, then rescales
/// multiplicatively so that the discrete spatial mean equals m0.
template <typename Fn>
RadialField make_initial_data(const GridPtr& grid, double m0, Fn&& profile) {
  RadialField u = sample(grid, std::forward<Fn>(profile));
  for (double x : u.values) {
    if (!(x >= 0.0)) throw Error(ErrorCode::NegativeProfile, "initial profile is negative");
  }
  const double mean = spatial_mean(u);
  if (!(mean > 0.0)) throw Error(ErrorCode::NegativeProfile, "initial profile vanishes");
  const double scale = m0 / mean;
  for (double& x : u.values) x *= scale;
  return u;
}

inline RadialField make_initial_data(const InitialDataSpec& spec, const GridPtr& grid) {
  spec.validate();
  const double radius = grid->radius();
  switch (spec.kind) {
    case ProfileKind::Constant:
      return RadialField(grid, spec.m0);
    case ProfileKind::PeakedPower:
      return make_initial_data(grid, spec.m0, [&](double r) {
        return std::pow(std::max(0.0, 1.0 - r / radius), spec.concentration) + kPowerProfileFloor;
      });
    case ProfileKind::PeakedExponential:
      return make_initial_data(grid, spec.m0, [&](double r) {
        const double x = r / radius;
        return std::exp(-spec.concentration * x * x);
      });
  }
  return RadialField(grid, spec.m0);
}

}  // namespace kslab
