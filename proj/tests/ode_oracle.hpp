#pragma once

// Adaptive ODE oracles for blow-up times, independent of the closed forms and
// quadratures under test.
//
// y' = delta y^q - C is integrated in the rescaled time tau with dt = y^{1-q} dtau,
// so that y grows exponentially in tau instead of blowing up:
//   dy/dtau = delta y - C y^{1-q},   dt/dtau = y^{1-q}.
// Integration stops once y^{1-q} is negligible; the remaining time is below
// y^{1-q} / ((q - 1) (delta - C y^{-q})) and is added as a final correction.

#include <array>
#include <cmath>

#include <boost/numeric/odeint.hpp>

namespace oracle {

inline double blowup_time(double beta, double delta, double q, double drift = 0.0) {
  using State = std::array<double, 2>;  // log y, t
  auto rhs = [&](const State& x, State& dx, double) {
    const double y = std::exp(x[0]);
    const double decay = std::pow(y, 1.0 - q);
    dx[0] = delta - drift * std::pow(y, -q);
    dx[1] = decay;
  };
  namespace ode = boost::numeric::odeint;
  State x{std::log(beta), 0.0};
  auto stepper = ode::make_controlled(1e-13, 1e-13, ode::runge_kutta_dopri5<State>());
  double tau = 0.0, h = 1e-3 / delta;
  for (int guard = 0; guard < 10000000; ++guard) {
    const double tail = std::pow(std::exp(x[0]), 1.0 - q) / ((q - 1.0) * delta);
    if (tail < 1e-14 * x[1]) break;
    while (stepper.try_step(rhs, x, tau, h) == ode::fail) {
    }
  }
  const double y = std::exp(x[0]);
  return x[1] + std::pow(y, 1.0 - q) / ((q - 1.0) * (delta - drift * std::pow(y, -q)));
}

}  // namespace oracle
