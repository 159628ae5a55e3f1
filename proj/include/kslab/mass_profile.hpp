#pragma once

// Mass accumulation function w(s, t) = int_0^{s^{1/N}} rho^{N-1} u d rho on the
// nodes s_i = r_i^N of a radial grid, together with the transforms to and from
// radial densities (w_s = u / N).

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "kslab/error.hpp"
#include "kslab/grid.hpp"

namespace kslab {

struct MassProfile {
  GridPtr grid;
  std::vector<double> w;
  double t = 0.0;

  std::size_t size() const { return w.size(); }
  /// m(t) = N w(R^N) / R^N.
  double mean() const { return grid->dim() * w.back() / grid->s().back(); }
};

inline constexpr double kMonotoneTolerance = 1e-10;

/// (w_{j+1} - w_j) / (s_{j+1} - s_j) for every cell.
inline std::vector<double> cell_slopes(const MassProfile& m) {
  const auto s = m.grid->s();
  std::vector<double> out(m.size() - 1);
  for (std::size_t j = 0; j + 1 < m.size(); ++j) out[j] = (m.w[j + 1] - m.w[j]) / (s[j + 1] - s[j]);
  return out;
}

inline void require_monotone(const MassProfile& m) {
  const double scale = std::max(1.0, std::abs(m.w.back()));
  for (std::size_t j = 0; j + 1 < m.size(); ++j) {
    if (m.w[j + 1] - m.w[j] < -kMonotoneTolerance * scale) {
      throw Error(ErrorCode::NonMonotone, "mass profile decreases");
    }
  }
}

/// Nodal w_s. Interior nodes use the three-point nonuniform derivative, which
/// is the convex combination (h_r sigma_l + h_l sigma_r) / (h_l + h_r) of the
/// adjacent cell slopes. The end s = R^N uses the one-sided quadratic. At s = 0
/// w is fitted by A s + B s^{1 + 2/N}, the expansion of a smooth radial density,
/// and A is returned.
inline std::vector<double> nodal_derivative(const MassProfile& m) {
  const auto s = m.grid->s();
  const std::size_t n = m.size();
  const std::vector<double> sigma = cell_slopes(m);
  std::vector<double> ws(n);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double hl = s[i] - s[i - 1];
    const double hr = s[i + 1] - s[i];
    ws[i] = (hr * sigma[i - 1] + hl * sigma[i]) / (hl + hr);
  }
  {
    const double hl = s[n - 2] - s[n - 3];
    const double hr = s[n - 1] - s[n - 2];
    ws[n - 1] = sigma[n - 2] + hr * (sigma[n - 2] - sigma[n - 3]) / (hl + hr);
  }
  {
    const double beta = 1.0 + 2.0 / m.grid->dim();
    const double s1 = s[1], s2 = s[2];
    const double p1 = std::pow(s1, beta), p2 = std::pow(s2, beta);
    const double a = (m.w[1] * p2 - m.w[2] * p1) / (s1 * p2 - s2 * p1);
    ws[0] = a >= 0.0 ? a : sigma[0];
  }
  return ws;
}

inline MassProfile transform_to_mass(const RadialField& u, double t = 0.0) {
  return MassProfile{u.grid, cumulative_measure(u), t};
}

inline RadialField transform_from_mass(const MassProfile& m) {
  require_monotone(m);
  std::vector<double> u = nodal_derivative(m);
  const double nd = m.grid->dim();
  for (double& x : u) x *= nd;
  return RadialField(m.grid, std::move(u));
}

/// max over interior nodes of (w_s - w / s). Nonpositive for profiles coming
/// from radially nonincreasing densities.
inline double check_monotone_bound(const MassProfile& m) {
  const auto s = m.grid->s();
  const std::vector<double> ws = nodal_derivative(m);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < m.size(); ++i) worst = std::max(worst, ws[i] - m.w[i] / s[i]);
  return worst;
}

}  // namespace kslab
