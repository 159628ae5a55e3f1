#pragma once

// Radial grids on the ball B_R(0) in R^N and the quadrature that every other
// module shares.
//
// Nodes r_0 = 0 < r_1 < ... < r_{n-1} = R. Each node carries a lumped weight
// V_i = (mu_{i-1} + mu_i) / 2 where mu_j = (r_{j+1}^N - r_j^N) / N is the exact
// measure of [r_j, r_{j+1}] under rho^{N-1} d rho. Summing V_i f_i is the
// composite trapezoid rule in that measure, it is exact for constants, and the
// dual faces sit at the midpoints of the mass variable s = r^N.

#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "kslab/error.hpp"

namespace kslab {

/// Surface area of the unit sphere in R^N: 2 pi^{N/2} / Gamma(N/2).
inline double unit_sphere_area(int dim) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

/// Volume of B_R(0) in R^N.
inline double ball_volume(int dim, double radius) {
  return unit_sphere_area(dim) * std::pow(radius, dim) / dim;
}

class RadialGrid {
 public:
  /// Graded grid r_i = R (i / (n-1))^grading.
  static std::shared_ptr<const RadialGrid> graded(int dim, double radius, std::size_t nodes,
                                                  double grading) {
    if (nodes < 3) throw Error(ErrorCode::InvalidParams, "radial grid needs at least 3 nodes");
    if (!(grading >= 1.0)) throw Error(ErrorCode::InvalidParams, "grading exponent must be >= 1");
    std::vector<double> r(nodes);
    for (std::size_t i = 0; i < nodes; ++i) {
      r[i] = radius * std::pow(static_cast<double>(i) / static_cast<double>(nodes - 1), grading);
    }
    r.back() = radius;
    return std::make_shared<const RadialGrid>(dim, std::move(r));
  }

  RadialGrid(int dim, std::vector<double> radii) : dim_(dim), r_(std::move(radii)) {
    if (dim_ < 1) throw Error(ErrorCode::InvalidParams, "dimension must be positive");
    if (r_.size() < 3) throw Error(ErrorCode::InvalidParams, "radial grid needs at least 3 nodes");
    if (r_.front() != 0.0) throw Error(ErrorCode::InvalidParams, "radial grid must start at 0");
    for (std::size_t i = 1; i < r_.size(); ++i) {
      if (!(r_[i] > r_[i - 1])) {
        throw Error(ErrorCode::InvalidParams, "radial grid must be strictly increasing");
      }
    }
    const std::size_t n = r_.size();
    s_.resize(n);
    for (std::size_t i = 0; i < n; ++i) s_[i] = std::pow(r_[i], dim_);
    s_.front() = 0.0;

    weights_.assign(n, 0.0);
    for (std::size_t j = 0; j + 1 < n; ++j) {
      const double mu = cell_measure(j);
      weights_[j] += 0.5 * mu;
      weights_[j + 1] += 0.5 * mu;
    }

    face_s_.resize(n - 1);
    face_r_.resize(n - 1);
    for (std::size_t j = 0; j + 1 < n; ++j) {
      face_s_[j] = 0.5 * (s_[j] + s_[j + 1]);
      face_r_[j] = std::pow(face_s_[j], 1.0 / dim_);
    }
  }

  int dim() const { return dim_; }
  double radius() const { return r_.back(); }
  std::size_t size() const { return r_.size(); }

  std::span<const double> r() const { return r_; }
  /// Mass variable s_i = r_i^N.
  std::span<const double> s() const { return s_; }
  /// Lumped trapezoid weights in the measure rho^{N-1} d rho.
  std::span<const double> weights() const { return weights_; }
  /// Faces between node j and j+1, located at the s-midpoint.
  std::span<const double> face_s() const { return face_s_; }
  std::span<const double> face_r() const { return face_r_; }

  double cell_measure(std::size_t j) const { return (s_[j + 1] - s_[j]) / dim_; }
  /// R^N / N; the sum of all weights.
  double total_measure() const { return s_.back() / dim_; }
  double volume() const { return unit_sphere_area(dim_) * total_measure(); }

 private:
  int dim_;
  std::vector<double> r_;
  std::vector<double> s_;
  std::vector<double> weights_;
  std::vector<double> face_s_;
  std::vector<double> face_r_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

/// Values of a radial function at the nodes of a grid.
struct RadialField {
  GridPtr grid;
  std::vector<double> values;

  RadialField() = default;
  RadialField(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
    if (!grid || values.size() != grid->size()) {
      throw Error(ErrorCode::InvalidParams, "field size does not match its grid");
    }
  }
  RadialField(GridPtr g, double constant)
      : grid(std::move(g)), values(grid ? grid->size() : 0, constant) {}

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
};

template <typename Fn>
RadialField sample(const GridPtr& grid, Fn&& fn) {
  std::vector<double> v(grid->size());
  const auto r = grid->r();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(r[i]);
  return RadialField(grid, std::move(v));
}

/// int_0^R rho^{N-1} f(rho) d rho with the lumped trapezoid rule.
inline double integrate_measure(const RadialGrid& grid, std::span<const double> f) {
  const auto w = grid.weights();
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += w[i] * f[i];
  return sum;
}

inline double integrate_measure(const RadialField& f) { return integrate_measure(*f.grid, f.values); }

/// int_Omega f dx for a radial f.
inline double integrate_ball(const RadialField& f) {
  return unit_sphere_area(f.grid->dim()) * integrate_measure(f);
}

/// Spatial mean |Omega|^{-1} int_Omega f dx.
inline double spatial_mean(const RadialField& f) {
  return integrate_measure(f) / f.grid->total_measure();
}

/// W(r_i) = int_0^{r_i} rho^{N-1} f d rho at every node (trapezoid per cell).
inline std::vector<double> cumulative_measure(const RadialField& f) {
  const auto& g = *f.grid;
  std::vector<double> out(g.size(), 0.0);
  for (std::size_t j = 0; j + 1 < g.size(); ++j) {
    out[j + 1] = out[j] + g.cell_measure(j) * 0.5 * (f.values[j] + f.values[j + 1]);
  }
  return out;
}

}  // namespace kslab
