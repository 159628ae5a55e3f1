#pragma once

// Radial solve of 0 = Lap v - m(t) + u with homogeneous Neumann data and
// int_Omega v = 0. Integrating once in the measure rho^{N-1} d rho gives
//
//   r^{N-1} v_r(r) = m r^N / N - int_0^r rho^{N-1} u d rho,
//
// which vanishes at r = R because m is the mean of u under the same quadrature.

#include <cmath>
#include <vector>

#include "kslab/error.hpp"
#include "kslab/grid.hpp"
#include "kslab/model.hpp"

namespace kslab {

inline constexpr double kClipFloor = 1e-12;

struct PotentialSolution {
  RadialField v;
  RadialField v_r;
  /// Discrete int_Omega v / |Omega| after normalization.
  double mean_residual = 0.0;
  /// m(t), the spatial mean of u.
  double mean = 0.0;
  /// r^{N-1} v_r at the faces, i.e. m s_f / N - W_f with W_f the lumped mass
  /// inside face f. These drive the chemotactic face fluxes.
  std::vector<double> face_flux_potential;
  std::vector<double> face_vr;
  /// Density the potential was computed for; used to detect stale caches.
  std::vector<double> source_density;
};

inline PotentialSolution solve_potential(const RadialField& u, const ModelParams& params) {
  const RadialGrid& g = *u.grid;
  if (g.dim() != params.dim) {
    throw Error(ErrorCode::InvalidParams, "grid dimension differs from model dimension");
  }
  for (double x : u.values) {
    if (!(x >= -kClipFloor)) throw Error(ErrorCode::NegativeInput, "density has negative nodes");
  }
  const std::size_t n = g.size();
  const double nd = g.dim();
  const auto r = g.r();
  const auto s = g.s();
  const auto weights = g.weights();

  PotentialSolution out;
  out.source_density = u.values;
  out.mean = spatial_mean(u);

  const std::vector<double> cum = cumulative_measure(u);
  std::vector<double> vr(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    const double q = out.mean * s[i] / nd - cum[i];
    vr[i] = q / std::pow(r[i], nd - 1.0);
  }
  vr[n - 1] = 0.0;

  std::vector<double> v(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) v[i] = v[i - 1] + 0.5 * (r[i] - r[i - 1]) * (vr[i] + vr[i - 1]);
  const double v_mean = integrate_measure(g, v) / g.total_measure();
  for (double& x : v) x -= v_mean;

  const auto fs = g.face_s();
  const auto fr = g.face_r();
  out.face_flux_potential.resize(n - 1);
  out.face_vr.resize(n - 1);
  double inside = 0.0;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    inside += weights[j] * u.values[j];
    const double q = out.mean * fs[j] / nd - inside;
    out.face_flux_potential[j] = q;
    out.face_vr[j] = q / std::pow(fr[j], nd - 1.0);
  }

  out.v = RadialField(u.grid, std::move(v));
  out.v_r = RadialField(u.grid, std::move(vr));
  out.mean_residual = integrate_measure(out.v) / g.total_measure();
  return out;
}

}  // namespace kslab
