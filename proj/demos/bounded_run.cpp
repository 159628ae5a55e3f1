// Strong damping (k > 2) keeps the solution bounded: max u settles down and the
// mass stays below its a priori bound.

#include <algorithm>
#include <cstdio>

#include "kslab/runner.hpp"

int main() {
  kslab::RunConfig cfg;
  cfg.params.dim = 3;
  cfg.params.alpha = 0.1;
  cfg.params.k = 2.5;
  cfg.params.mu = 0.1;
  cfg.initial.m0 = 20.0;
  cfg.initial.concentration = 50.0;
  cfg.stepper.nodes = 200;
  cfg.stepper.grading = 3.0;
  cfg.stepper.t_end = 20.0;

  const auto res = kslab::simulate(cfg);
  const auto& rows = res.series().rows;
  double peak = 0.0, worst_mass = 0.0;
  for (const auto& r : rows) {
    peak = std::max(peak, r.max_u);
    worst_mass = std::max(worst_mass, r.l1);
  }
  std::printf("stop=%s t=%.3g\n", std::string(kslab::to_string(res.reason())).c_str(), rows.back().t);
  std::printf("max u: initial %.4g, peak %.4g, final %.4g\n", rows.front().max_u, peak, rows.back().max_u);
  std::printf("mass: largest %.6g, bound %.6g\n", worst_mass, res.mbar);
}
