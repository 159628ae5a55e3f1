#pragma once

// Time integration of the density equation in radial coordinates.
//
// Finite volumes in the measure r^{N-1} dr on the nodes of a RadialGrid with
// lumped control volumes V_i and faces at the s-midpoints:
//
//   V_i du_i/dt = F_{i+1/2} - F_{i-1/2} + V_i g(u_i),
//   F = N s^{2-2/N} u_s - u_up f(v_r^2) (r^{N-1} v_r),
//
// zero flux at r = 0 and r = R. One step is IMEX Euler: chemotaxis (upwind)
// and the logistic source explicit, diffusion implicit.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "kslab/diagnostics.hpp"
#include "kslab/error.hpp"
#include "kslab/grid.hpp"
#include "kslab/mass_profile.hpp"
#include "kslab/model.hpp"
#include "kslab/radial_elliptic.hpp"
#include "kslab/stepping.hpp"
#include "kslab/tridiagonal.hpp"

namespace kslab {

struct PrimalState {
  double t = 0.0;
  RadialField u;
  PotentialSolution potential;
  /// Step length to attempt next.
  double dt = 0.0;
};

inline PrimalState make_primal_state(RadialField u, const ModelParams& params, double dt,
                                     double t = 0.0) {
  PrimalState st;
  st.t = t;
  st.potential = solve_potential(u, params);
  st.u = std::move(u);
  st.dt = dt;
  return st;
}

namespace detail {

/// N s_f^{2-2/N} / (s_{j+1} - s_j) for each face.
inline std::vector<double> diffusion_conductance(const RadialGrid& g) {
  const auto s = g.s();
  const auto fs = g.face_s();
  const double nd = g.dim();
  std::vector<double> out(fs.size());
  for (std::size_t j = 0; j < fs.size(); ++j) {
    out[j] = nd * std::pow(fs[j], 2.0 - 2.0 / nd) / (s[j + 1] - s[j]);
  }
  return out;
}

struct Chemotaxis {
  /// Per-node rate (F_{i+1/2} - F_{i-1/2}) / V_i of the chemotactic flux.
  std::vector<double> rate;
  /// Per-node sum of outgoing advective coefficients, for the CFL limit.
  std::vector<double> outflow;
};

inline Chemotaxis chemotaxis(const RadialField& u, const PotentialSolution& pot,
                             const ModelParams& params) {
  const RadialGrid& g = *u.grid;
  const std::size_t n = g.size();
  const auto weights = g.weights();
  Chemotaxis out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double q = pot.face_flux_potential[j];
    const double vr = pot.face_vr[j];
    const double speed = flux_limiter(vr * vr, params) * q;
    // q < 0: transport toward the origin, upwind value from the outer node.
    const std::size_t up = q < 0.0 ? j + 1 : j;
    const double flux = -u.values[up] * speed;
    out.rate[j] += flux;
    out.rate[j + 1] -= flux;
    out.outflow[up] += std::abs(speed);
  }
  for (std::size_t i = 0; i < n; ++i) out.rate[i] /= weights[i];
  return out;
}

inline void require_fresh(const PrimalState& st) {
  if (st.potential.source_density != st.u.values) {
    throw Error(ErrorCode::InconsistentCache, "potential was computed for a different density");
  }
}

}  // namespace detail

/// du/dt of the semi-discrete system (all terms explicit).
inline RadialField rhs_primal(const PrimalState& st, const ModelParams& params) {
  detail::require_fresh(st);
  const RadialGrid& g = *st.u.grid;
  const std::size_t n = g.size();
  const auto weights = g.weights();
  const auto kappa = detail::diffusion_conductance(g);
  auto chem = detail::chemotaxis(st.u, st.potential, params);
  std::vector<double> out = std::move(chem.rate);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double flux = kappa[j] * (st.u.values[j + 1] - st.u.values[j]);
    out[j] += flux / weights[j];
    out[j + 1] -= flux / weights[j + 1];
  }
  for (std::size_t i = 0; i < n; ++i) out[i] += source(st.u.values[i], params);
  return RadialField(st.u.grid, std::move(out));
}

/// Advances one IMEX step of length at most min(state.dt, dt_cap), shortened
/// further by the explicit stability limits and the growth limit.
inline PrimalState step(const PrimalState& st, const StepperConfig& cfg, const ModelParams& params,
                        double dt_cap = std::numeric_limits<double>::infinity()) {
  detail::require_fresh(st);
  const RadialGrid& g = *st.u.grid;
  const std::size_t n = g.size();
  const auto weights = g.weights();
  const auto& u = st.u.values;

  const auto chem = detail::chemotaxis(st.u, st.potential, params);
  std::vector<double> explicit_rate(n);
  double dt_stable = cfg.dt_max;
  double max_u = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    explicit_rate[i] = chem.rate[i] + source(u[i], params);
    if (chem.outflow[i] > 0.0) dt_stable = std::min(dt_stable, cfg.cfl * weights[i] / chem.outflow[i]);
    const double stiff = params.mu * params.k * std::pow(u[i], params.k - 1.0);
    if (stiff > 0.0) dt_stable = std::min(dt_stable, cfg.cfl / stiff);
    max_u = std::max(max_u, u[i]);
  }

  double dt_limit = std::min(st.dt, dt_stable);
  const auto kappa = detail::diffusion_conductance(g);
  std::vector<double> lower(n), diag(n), upper(n), rhs(n);
  for (;;) {
    if (dt_limit < cfg.dt_min) {
      throw Error(ErrorCode::StepTooSmall, "required step below dt_min at t = " + std::to_string(st.t));
    }
    const bool capped = dt_cap < dt_limit;
    const double dt = capped ? dt_cap : dt_limit;
    for (std::size_t i = 0; i < n; ++i) {
      const double kl = i > 0 ? kappa[i - 1] : 0.0;
      const double kr = i + 1 < n ? kappa[i] : 0.0;
      lower[i] = -dt * kl;
      upper[i] = -dt * kr;
      diag[i] = weights[i] + dt * (kl + kr);
      rhs[i] = weights[i] * (u[i] + dt * explicit_rate[i]);
    }
    std::vector<double> next = solve_tridiagonal(lower, diag, upper, rhs);
    bool ok = true;
    double next_max = 0.0;
    for (double& x : next) {
      if (!(x >= -kClipFloor)) {
        ok = false;
        break;
      }
      x = std::max(x, 0.0);
      next_max = std::max(next_max, x);
    }
    if (ok && next_max <= (1.0 + cfg.max_growth) * max_u) {
      const double suggestion = capped ? dt_limit : std::min(1.5 * dt, cfg.dt_max);
      return make_primal_state(RadialField(st.u.grid, std::move(next)), params, suggestion, st.t + dt);
    }
    dt_limit = 0.5 * dt;
  }
}

struct PrimalRun {
  PrimalState final_state;
  DiagnosticsSeries series;
  StopReason reason = StopReason::Horizon;
  std::vector<Snapshot> snapshots;
  /// Message of the error that stalled the run, if any.
  std::string message;
};

inline PrimalRun run_primal(const RadialField& u0, const StepperConfig& cfg,
                            const ModelParams& params, std::vector<double> p_list = {},
                            const RowObserver& on_row = {}) {
  cfg.validate();
  params.validate();
  if (p_list.empty()) p_list = default_p_list(params.dim);

  PrimalRun run;
  run.series = make_series(params, std::move(p_list));
  auto record = [&](DiagnosticsRow row) {
    if (on_row) on_row(row);
    run.series.rows.push_back(std::move(row));
  };
  PrimalState st = make_primal_state(u0, params, std::min(cfg.dt_initial, cfg.dt_max));
  const double u_ref = max_norm(st.u);
  const double stop_level = cfg.u_stop * u_ref;

  std::size_t next_snapshot = 0;
  auto take_snapshots = [&] {
    while (next_snapshot < cfg.snapshot_times.size() && cfg.snapshot_times[next_snapshot] <= st.t) {
      run.snapshots.push_back({st.t, st.u});
      ++next_snapshot;
    }
  };
  take_snapshots();
  record(make_row(run.series, st.u, st.t, 0.0));
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
      st = step(st, cfg, params, dt_cap);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::StepTooSmall) throw;
      run.reason = StopReason::Stalled;
      run.message = e.what();
      break;
    }
    // Land exactly on targets so snapshot and horizon comparisons are exact.
    if (st.t - t_before == dt_cap || st.t > t_before + dt_cap) st.t = t_before + dt_cap;
    if (next_snapshot < cfg.snapshot_times.size() &&
        std::abs(st.t - cfg.snapshot_times[next_snapshot]) < 1e-14 * std::max(1.0, st.t)) {
      st.t = cfg.snapshot_times[next_snapshot];
    }
    if (std::abs(st.t - cfg.t_end) < 1e-14 * std::max(1.0, cfg.t_end)) st.t = cfg.t_end;
    take_snapshots();

    const double m = max_norm(st.u);
    const double dt_taken = st.t - t_before;
    if (m >= stop_level) {
      run.reason = StopReason::BlowupSuspected;
      record(make_row(run.series, st.u, st.t, dt_taken));
      break;
    }
    if (policy.due(cfg, m) || st.t >= cfg.t_end) {
      record(make_row(run.series, st.u, st.t, dt_taken));
    }
  }
  if (run.reason == StopReason::Stalled && run.series.rows.back().t < st.t) {
    record(make_row(run.series, st.u, st.t, 0.0));
  }
  run.final_state = std::move(st);
  return run;
}

}  // namespace kslab
