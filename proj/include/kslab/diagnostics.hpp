#pragma once

// Tracked functionals of a run and the power-law blow-up extrapolation.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "kslab/error.hpp"
#include "kslab/grid.hpp"
#include "kslab/mass_profile.hpp"
#include "kslab/model.hpp"

namespace kslab {

// ---------------------------------------------------------------------------
// Norms
// ---------------------------------------------------------------------------

/// int_Omega |u|^p dx, same lumped quadrature as the mass.
inline double lp_integral(const RadialField& u, double p) {
  const auto w = u.grid->weights();
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) sum += w[i] * std::pow(std::abs(u.values[i]), p);
  return unit_sphere_area(u.grid->dim()) * sum;
}

inline double lp_norm(const RadialField& u, double p) {
  if (!(p >= 1.0)) throw Error(ErrorCode::InvalidP, "lp_norm needs p >= 1");
  return std::pow(lp_integral(u, p), 1.0 / p);
}

/// Psi = ||u||_p^p / p.
inline double psi(const RadialField& u, double p) {
  if (!(p >= 1.0)) throw Error(ErrorCode::InvalidP, "psi needs p >= 1");
  return lp_integral(u, p) / p;
}

inline double max_norm(const RadialField& u) {
  double m = 0.0;
  for (double x : u.values) m = std::max(m, std::abs(x));
  return m;
}

/// {1, N/2 + 0.5, N, 2N}.
inline std::vector<double> default_p_list(int dim) {
  return {1.0, 0.5 * dim + 0.5, static_cast<double>(dim), 2.0 * dim};
}

// ---------------------------------------------------------------------------
// Moment functional y(t) = int_0^{R^N} s^{-a} w^b ds
// ---------------------------------------------------------------------------

struct MomentExponents {
  double a = 0.5;
  double b = 0.5;
};

/// Exponents for the moment functional.
///   k = 2:      b midway in (2/(N-2), 1), a midway in (1, (N-2)(b+1)/N);
///   1 < k < 2:  a = b midway in (sqrt(k-1), min{1, (N-2)/2}).
inline MomentExponents select_ab(const ModelParams& p) {
  const double n = p.dim;
  MomentExponents out;
  if (p.k == 2.0) {
    const double b_lo = 2.0 / (n - 2.0);
    if (!(b_lo < 1.0)) throw Error(ErrorCode::EmptyInterval, "k = 2 needs N >= 5");
    out.b = 0.5 * (b_lo + 1.0);
    out.a = 0.5 * (1.0 + (n - 2.0) * (out.b + 1.0) / n);
  } else if (p.k > 1.0 && p.k < 2.0) {
    const double lo = std::sqrt(p.k - 1.0);
    const double hi = std::min(1.0, 0.5 * (n - 2.0));
    if (!(lo < hi)) throw Error(ErrorCode::EmptyInterval, "k too large for a = b choice");
    out.a = out.b = 0.5 * (lo + hi);
  } else {
    throw Error(ErrorCode::EmptyInterval, "no admissible (a, b) for k > 2");
  }
  if (!(out.a > 0.0 && out.a < (n - 2.0) * (out.b + 1.0) / n)) {
    throw Error(ErrorCode::EmptyInterval, "selected (a, b) violate 0 < a < (N-2)(b+1)/N");
  }
  return out;
}

/// First cell integrated in closed form with w ~ (w_1 / s_1) s; remaining cells
/// by 8-point Gauss-Legendre on the piecewise-linear interpolant of w.
inline double moment_functional(const MassProfile& m, double a, double b) {
  if (!(b - a > -1.0)) {
    throw Error(ErrorCode::DivergentIntegrand, "s^{-a} w^b is not integrable at 0 (b - a <= -1)");
  }
  const auto s = m.grid->s();
  const double slope0 = std::max(0.0, m.w[1] / s[1]);
  double y = std::pow(slope0, b) * std::pow(s[1], b - a + 1.0) / (b - a + 1.0);
  using Gauss = boost::math::quadrature::gauss<double, 8>;
  for (std::size_t j = 1; j + 1 < m.size(); ++j) {
    const double s0 = s[j], s1 = s[j + 1];
    const double w0 = m.w[j], w1 = m.w[j + 1];
    auto f = [&](double x) {
      const double wx = std::max(0.0, w0 + (w1 - w0) * (x - s0) / (s1 - s0));
      return std::pow(x, -a) * std::pow(wx, b);
    };
    y += Gauss::integrate(f, s0, s1);
  }
  return y;
}

// ---------------------------------------------------------------------------
// Series
// ---------------------------------------------------------------------------

struct DiagnosticsRow {
  double t = 0.0;
  double dt = 0.0;
  double max_u = 0.0;
  double l1 = 0.0;
  std::vector<double> lp;
  std::vector<double> psi;
  double mass_mean = 0.0;
  double y_ab = 0.0;
  double monotone_violation = 0.0;
};

struct DiagnosticsSeries {
  std::vector<double> p_list;
  MomentExponents ab;
  /// True when the model has no admissible (a, b) and a = b = 1/2 is used.
  bool ab_fallback = false;
  std::vector<DiagnosticsRow> rows;

  double initial_max() const { return rows.empty() ? 0.0 : rows.front().max_u; }
};

inline DiagnosticsSeries make_series(const ModelParams& p, std::vector<double> p_list) {
  DiagnosticsSeries out;
  out.p_list = std::move(p_list);
  try {
    out.ab = select_ab(p);
  } catch (const Error&) {
    out.ab = MomentExponents{0.5, 0.5};
    out.ab_fallback = true;
  }
  return out;
}

inline DiagnosticsRow make_row(const DiagnosticsSeries& series, const RadialField& u,
                               const MassProfile& w, double t, double dt) {
  DiagnosticsRow row;
  row.t = t;
  row.dt = dt;
  row.max_u = max_norm(u);
  row.l1 = lp_integral(u, 1.0);
  for (double p : series.p_list) {
    const double integral = lp_integral(u, p);
    row.lp.push_back(std::pow(integral, 1.0 / p));
    row.psi.push_back(integral / p);
  }
  row.mass_mean = spatial_mean(u);
  row.y_ab = moment_functional(w, series.ab.a, series.ab.b);
  row.monotone_violation = check_monotone_bound(w);
  return row;
}

inline DiagnosticsRow make_row(const DiagnosticsSeries& series, const RadialField& u, double t,
                               double dt) {
  return make_row(series, u, transform_to_mass(u, t), t, dt);
}

/// Largest int_Omega u over the series relative to the mass bound; <= 1 + tol
/// when the a-priori mass estimate holds.
inline double worst_mass_ratio(const DiagnosticsSeries& series, double mbar) {
  double worst = 0.0;
  for (const auto& row : series.rows) worst = std::max(worst, row.l1 / mbar);
  return worst;
}

/// Largest (w_s - w/s) relative to max w_s = max u / N over the series.
inline double worst_monotone_violation(const DiagnosticsSeries& series, int dim) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& row : series.rows) {
    worst = std::max(worst, row.monotone_violation / (row.max_u / dim));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Blow-up extrapolation
// ---------------------------------------------------------------------------

struct BlowupDetectConfig {
  /// Terminal window: rows with max_u >= window_factor * first-row max_u.
  double window_factor = 100.0;
  std::size_t min_rows = 8;
  /// RMS of the log-residual below which the fit is trusted.
  double max_rms_residual = 0.1;
  /// Decades of max_u the window has to span for a confident fit.
  double min_decades = 2.0;
};

struct BlowupEstimate {
  double t_est = std::numeric_limits<double>::quiet_NaN();
  double beta_fit = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();
  bool confident = false;
  std::size_t window_rows = 0;
};

namespace detail {

struct PowerFit {
  double rss;
  double beta;
};

/// Least squares of ln M = c - beta ln(T - t).
inline PowerFit fit_power_law(const std::vector<double>& t, const std::vector<double>& log_m,
                              double t_blow) {
  const std::size_t n = t.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(t_blow - t[i]);
    sx += x;
    sy += log_m[i];
    sxx += x * x;
    sxy += x * log_m[i];
  }
  const double denom = n * sxx - sx * sx;
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = log_m[i] - intercept - slope * std::log(t_blow - t[i]);
    rss += r * r;
  }
  return {rss, -slope};
}

}  // namespace detail

inline BlowupEstimate detect_blowup(const DiagnosticsSeries& series,
                                    const BlowupDetectConfig& cfg = {}) {
  if (series.rows.empty()) throw Error(ErrorCode::InsufficientGrowth, "empty series");
  const double threshold = cfg.window_factor * series.initial_max();
  std::vector<double> t, log_m;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& row : series.rows) {
    if (row.max_u >= threshold && std::isfinite(row.max_u)) {
      if (!t.empty() && row.t <= t.back()) continue;
      t.push_back(row.t);
      log_m.push_back(std::log(row.max_u));
      lo = std::min(lo, row.max_u);
      hi = std::max(hi, row.max_u);
    }
  }
  if (t.size() < cfg.min_rows) {
    throw Error(ErrorCode::InsufficientGrowth, "no terminal growth window in the series");
  }

  const double span = t.back() - t.front();
  const double x_lo = std::log(span * 1e-9);
  const double x_hi = std::log(span * 1e3);
  auto rss_at = [&](double x) { return detail::fit_power_law(t, log_m, t.back() + std::exp(x)).rss; };

  constexpr int kScan = 400;
  int best_i = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= kScan; ++i) {
    const double v = rss_at(x_lo + (x_hi - x_lo) * i / kScan);
    if (v < best) {
      best = v;
      best_i = i;
    }
  }
  const double h = (x_hi - x_lo) / kScan;
  double a = x_lo + h * std::max(0, best_i - 1);
  double b = x_lo + h * std::min(kScan, best_i + 1);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = rss_at(x1), f2 = rss_at(x2);
  for (int it = 0; it < 100; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = rss_at(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = rss_at(x2);
    }
  }
  const double x_best = f1 < f2 ? x1 : x2;

  BlowupEstimate out;
  out.window_rows = t.size();
  out.t_est = t.back() + std::exp(x_best);
  const auto fit = detail::fit_power_law(t, log_m, out.t_est);
  out.beta_fit = fit.beta;
  out.residual = std::sqrt(fit.rss / t.size());
  const bool interior = best_i > 0 && best_i < kScan;
  const bool spans = std::log10(hi / lo) >= cfg.min_decades;
  out.confident = interior && spans && out.beta_fit > 0.0 && out.residual <= cfg.max_rms_residual;
  return out;
}

}  // namespace kslab
