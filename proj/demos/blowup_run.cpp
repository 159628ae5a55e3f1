// Runs a concentrated initial datum in a weakly limited, weakly damped regime
// and reports the estimated blow-up time from the primal and mass solvers.

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
  cfg.stepper.nodes = 400;
  cfg.stepper.grading = 3.0;
  cfg.stepper.t_end = 0.01;
  cfg.solver = kslab::SolverChoice::Both;

  const auto res = kslab::simulate(cfg);
  const auto verdict = kslab::classify_regime(cfg.params, kslab::integrate_ball(res.u0));
  std::printf("regime: %s (%s)\n", std::string(kslab::to_string(verdict.verdict)).c_str(), verdict.clause.c_str());

  auto show = [](const char* name, const kslab::DiagnosticsSeries& s, kslab::StopReason why) {
    std::printf("%s: stop=%s rows=%zu\n", name, std::string(kslab::to_string(why)).c_str(), s.rows.size());
    try {
      const auto e = kslab::detect_blowup(s);
      std::printf("  T_est=%.6g beta=%.3f residual=%.3g confident=%s\n", e.t_est, e.beta_fit, e.residual,
                  e.confident ? "yes" : "no");
    } catch (const kslab::Error& err) {
      std::printf("  no estimate: %s\n", err.what());
    }
  };
  show("primal", res.primal->series, res.primal->reason);
  show("mass", res.mass->series, res.mass->reason);
  std::printf("largest relative discrepancy in the comparison window: %.3g\n", res.cross_max_rel);
}
