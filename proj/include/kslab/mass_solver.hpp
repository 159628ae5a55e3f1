#pragma once

// Time integration of the nonlocal scalar equation for the mass accumulation
// function w(s, t), s = r^N:
//
//   w_t = N^2 s^{2-2/N} w_ss + N (w - m s/N) f(s^{2/N-2} (w - m s/N)^2) w_s
//         + lambda w - mu N^{k-1} int_0^s w_s^k,
//
// with w(0) = 0 pinned and w(R^N) driven by the boundary mass equation
// dw/dt = lambda w - mu N^{k-1} int_0^{R^N} w_s^k. Node finite differences on
// the s-grid; the advective term is upwinded, the diffusion is implicit.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "kslab/diagnostics.hpp"
#include "kslab/error.hpp"
#include "kslab/grid.hpp"
#include "kslab/mass_profile.hpp"
#include "kslab/model.hpp"
#include "kslab/stepping.hpp"
#include "kslab/tridiagonal.hpp"

namespace kslab {

struct MassState {
  double t = 0.0;
  MassProfile w;
  double dt = 0.0;
};

namespace detail {

struct MassTerms {
  /// Explicit part of dw/dt: advection, growth and the nonlocal decay.
  std::vector<double> rate;
  /// N^2 s^{2-2/N} at each node (zero at both ends, which are not diffused).
  std::vector<double> diffusivity;
  /// Advection speed c_i and the spacing of the one-sided difference used.
  std::vector<double> speed;
  std::vector<double> upwind_h;
  std::vector<double> slopes;
};

inline MassTerms mass_terms(const MassProfile& m, const ModelParams& params) {
  const RadialGrid& g = *m.grid;
  if (g.dim() != params.dim) {
    throw Error(ErrorCode::InvalidParams, "grid dimension differs from model dimension");
  }
  require_monotone(m);
  const std::size_t n = m.size();
  const auto s = g.s();
  const double nd = g.dim();
  const double mean = m.mean();

  MassTerms out;
  out.slopes = cell_slopes(m);
  out.rate.assign(n, 0.0);
  out.diffusivity.assign(n, 0.0);
  out.speed.assign(n, 0.0);
  out.upwind_h.assign(n, 0.0);

  // Cumulative int_0^{s_i} w_s^k, exact for the piecewise-linear interpolant.
  std::vector<double> nonlocal(n, 0.0);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double sigma = std::max(0.0, out.slopes[j]);
    nonlocal[j + 1] = nonlocal[j] + (s[j + 1] - s[j]) * std::pow(sigma, params.k);
  }
  const double decay = params.mu * std::pow(nd, params.k - 1.0);

  for (std::size_t i = 1; i < n; ++i) {
    out.rate[i] = params.lambda * m.w[i] - decay * nonlocal[i];
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    out.diffusivity[i] = nd * nd * std::pow(s[i], 2.0 - 2.0 / nd);
    const double q = m.w[i] - mean * s[i] / nd;
    const double grad_sq = std::pow(s[i], 2.0 / nd - 2.0) * q * q;
    const double c = nd * q * flux_limiter(grad_sq, params);
    // w_t = c w_s: information arrives from larger s when c > 0.
    const std::size_t cell = c > 0.0 ? i : i - 1;
    out.speed[i] = c;
    out.upwind_h[i] = s[cell + 1] - s[cell];
    out.rate[i] += c * out.slopes[cell];
  }
  return out;
}

}  // namespace detail

/// dw/dt at every node, all terms explicit. Zero at s = 0.
inline std::vector<double> rhs_mass(const MassProfile& m, const ModelParams& params) {
  auto terms = detail::mass_terms(m, params);
  const auto s = m.grid->s();
  for (std::size_t i = 1; i + 1 < m.size(); ++i) {
    const double hl = s[i] - s[i - 1];
    const double hr = s[i + 1] - s[i];
    const double wss = 2.0 * (terms.slopes[i] - terms.slopes[i - 1]) / (hl + hr);
    terms.rate[i] += terms.diffusivity[i] * wss;
  }
  return terms.rate;
}

/// Largest nodal N w_s, the blow-up proxy of the mass formulation.
inline double mass_max_density(const MassProfile& m) { return max_norm(transform_from_mass(m)); }

/// One IMEX step of length at most min(state.dt, dt_cap).
inline MassState step_mass(const MassState& st, const StepperConfig& cfg, const ModelParams& params,
                           double dt_cap = std::numeric_limits<double>::infinity()) {
  const MassProfile& m = st.w;
  const std::size_t n = m.size();
  const auto s = m.grid->s();
  const auto terms = detail::mass_terms(m, params);

  double dt_stable = cfg.dt_max;
  double max_u = 0.0;
  for (double sigma : terms.slopes) max_u = std::max(max_u, params.dim * sigma);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double c = std::abs(terms.speed[i]);
    if (c > 0.0) dt_stable = std::min(dt_stable, cfg.cfl * terms.upwind_h[i] / c);
  }
  const double stiff = params.mu * params.k * std::pow(max_u, params.k - 1.0);
  if (stiff > 0.0) dt_stable = std::min(dt_stable, cfg.cfl / stiff);
  const double max_before = mass_max_density(m);

  double dt_limit = std::min(st.dt, dt_stable);
  std::vector<double> lower(n - 2), diag(n - 2), upper(n - 2), rhs(n - 2);
  for (;;) {
    if (dt_limit < cfg.dt_min) {
      throw Error(ErrorCode::StepTooSmall, "required step below dt_min at t = " + std::to_string(st.t));
    }
    const bool capped = dt_cap < dt_limit;
    const double dt = capped ? dt_cap : dt_limit;

    std::vector<double> next(n, 0.0);
    next[n - 1] = m.w[n - 1] + dt * terms.rate[n - 1];
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double hl = s[i] - s[i - 1];
      const double hr = s[i + 1] - s[i];
      const double a = dt * terms.diffusivity[i] * 2.0 / (hl + hr);
      const std::size_t row = i - 1;
      lower[row] = -a / hl;
      upper[row] = -a / hr;
      diag[row] = 1.0 + a / hl + a / hr;
      rhs[row] = m.w[i] + dt * terms.rate[i];
    }
    // Dirichlet ends: w_0 = 0 and the freshly advanced boundary value.
    rhs[n - 3] -= upper[n - 3] * next[n - 1];
    lower[0] = 0.0;
    upper[n - 3] = 0.0;
    const std::vector<double> inner = solve_tridiagonal(lower, diag, upper, rhs);
    std::copy(inner.begin(), inner.end(), next.begin() + 1);

    MassProfile candidate{m.grid, std::move(next), st.t + dt};
    bool ok = true;
    try {
      require_monotone(candidate);
    } catch (const Error&) {
      ok = false;
    }
    if (ok && mass_max_density(candidate) <= (1.0 + cfg.max_growth) * max_before) {
      const double suggestion = capped ? dt_limit : std::min(1.5 * dt, cfg.dt_max);
      return MassState{candidate.t, std::move(candidate), suggestion};
    }
    dt_limit = 0.5 * dt;
  }
}

struct MassRun {
  MassState final_state;
  DiagnosticsSeries series;
  StopReason reason = StopReason::Horizon;
  /// Densities N w_s at the requested snapshot times.
  std::vector<Snapshot> snapshots;
  std::string message;
};

inline DiagnosticsRow make_mass_row(const DiagnosticsSeries& series, const MassProfile& m,
                                    double dt) {
  DiagnosticsRow row = make_row(series, transform_from_mass(m), m, m.t, dt);
  // In this formulation the mass is the boundary value itself.
  row.l1 = unit_sphere_area(m.grid->dim()) * m.w.back();
  row.mass_mean = m.mean();
  return row;
}

inline MassRun run_mass(const MassProfile& w0, const StepperConfig& cfg, const ModelParams& params,
                        std::vector<double> p_list = {},
                        const RowObserver& on_row = {}) {
  cfg.validate();
  params.validate();
  require_monotone(w0);
  if (p_list.empty()) p_list = default_p_list(params.dim);

  MassRun run;
  run.series = make_series(params, std::move(p_list));
  auto record = [&](DiagnosticsRow row) {
    if (on_row) on_row(row);
    run.series.rows.push_back(std::move(row));
  };
  MassState st{w0.t, w0, std::min(cfg.dt_initial, cfg.dt_max)};
  st.w.w.front() = 0.0;
  const double u_ref = mass_max_density(st.w);
  const double stop_level = cfg.u_stop * u_ref;

  std::size_t next_snapshot = 0;
  auto take_snapshots = [&] {
    while (next_snapshot < cfg.snapshot_times.size() && cfg.snapshot_times[next_snapshot] <= st.t) {
      run.snapshots.push_back({st.t, transform_from_mass(st.w)});
      ++next_snapshot;
    }
  };
  take_snapshots();
  record(make_mass_row(run.series, st.w, 0.0));
  detail::RecordPolicy policy{0, u_ref};

  std::size_t steps = 0;
  while (st.t < cfg.t_end) {
    if (steps++ == cfg.max_steps) {
      run.reason = StopReason::Stalled;
      run.message = "step budget of " + std::to_string(cfg.max_steps) + " steps exhausted at t = " +
                    std::to_string(st.t);
      break;
    }
    const double t_before = st.t;
    const double dt_cap = detail::clip_to_targets(st.t, std::numeric_limits<double>::infinity(),
                                                  cfg, next_snapshot);
    try {
      st = step_mass(st, cfg, params, dt_cap);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::StepTooSmall) throw;
      run.reason = StopReason::Stalled;
      run.message = e.what();
      break;
    }
    if (st.t - t_before == dt_cap || st.t > t_before + dt_cap) st.t = t_before + dt_cap;
    if (next_snapshot < cfg.snapshot_times.size() &&
        std::abs(st.t - cfg.snapshot_times[next_snapshot]) < 1e-14 * std::max(1.0, st.t)) {
      st.t = cfg.snapshot_times[next_snapshot];
    }
    if (std::abs(st.t - cfg.t_end) < 1e-14 * std::max(1.0, cfg.t_end)) st.t = cfg.t_end;
    st.w.t = st.t;
    take_snapshots();

    const double mx = mass_max_density(st.w);
    const double dt_taken = st.t - t_before;
    if (mx >= stop_level) {
      run.reason = StopReason::BlowupSuspected;
      record(make_mass_row(run.series, st.w, dt_taken));
      break;
    }
    if (policy.due(cfg, mx) || st.t >= cfg.t_end) {
      record(make_mass_row(run.series, st.w, dt_taken));
    }
  }
  if (run.reason == StopReason::Stalled && run.series.rows.back().t < st.t) {
    record(make_mass_row(run.series, st.w, 0.0));
  }
  run.final_state = std::move(st);
  return run;
}

}  // namespace kslab
