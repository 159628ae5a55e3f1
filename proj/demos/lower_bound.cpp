// Lower bound on the blow-up time for the blow-up demo data, next to the
// simulated estimate.

#include <cstdio>

#include "kslab/runner.hpp"

int main() {
  kslab::RunConfig cfg;
  cfg.params.dim = 3;
  cfg.params.alpha = 0.1;
  cfg.params.k = 1.1;
  cfg.params.mu = 0.1;
  cfg.initial.m0 = 20.0;
  cfg.initial.concentration = 50.0;
  cfg.stepper.nodes = 200;
  cfg.stepper.grading = 3.0;
  cfg.stepper.t_end = 0.01;

  const double p = cfg.effective_bound_p();
  const auto r = kslab::bounds_for(cfg, p);
  std::printf("p=%.3g eps=%.4g C_GN=%.4g\n", r.p, r.eps, r.c_gn);
  std::printf("gamma1=%.4g gamma2=%.4g gamma=%.4g\n", r.gamma1, r.gamma2, r.gamma);
  std::printf("B1=%.4g B2=%.4g B3=%.4g B4=%.4g\n", r.b1, r.b2, r.b3, r.b4);
  std::printf("Psi0=%.6g  T_closed=%.6g  T_quad=%.6g\n", r.psi0, r.t_closed_form, r.t_quadrature);

  const auto res = kslab::simulate(cfg);
  const auto e = kslab::detect_blowup(res.series());
  std::printf("simulated T_est=%.6g (confident: %s)\n", e.t_est, e.confident ? "yes" : "no");
}
