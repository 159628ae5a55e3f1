// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kslab/runner.hpp"
#include "ode_oracle.hpp"

using namespace kslab;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& why) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += why;
    }
  }
  void note(const std::string& s) {
    if (pass) detail = detail.empty() ? s : detail + "; " + s;
  }
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

RunConfig blowup_config(std::size_t nodes) {
  RunConfig cfg;
  cfg.params.dim = 3;
  cfg.params.alpha = 0.1;
  cfg.params.k = 1.1;
  cfg.params.mu = 0.1;
  cfg.initial = {ProfileKind::PeakedExponential, 20.0, 50.0};
  cfg.stepper.nodes = nodes;
  cfg.stepper.grading = 3.0;
  cfg.stepper.t_end = 0.01;
  cfg.stepper.u_stop = 1e8;
  cfg.p_list = {2.0, 3.0};
  return cfg;
}

// Confident blow-up runs collected from every criterion, for the soundness check.
struct ConfidentRun {
  std::string label;
  RunConfig cfg;
  double t_est;
};
std::vector<ConfidentRun> g_confident;

void collect(const std::string& label, const SimulationResult& res) {
  try {
    const auto e = detect_blowup(res.series());
    if (e.confident) g_confident.push_back({label, res.config, e.t_est});
  } catch (const Error&) {
  }
}

// Max u at time t, linearly interpolated in log(max u) between recorded rows.
double max_at(const DiagnosticsSeries& s, double t) {
  const auto& r = s.rows;
  for (std::size_t i = 1; i < r.size(); ++i) {
    if (r[i].t >= t) {
      const double w = (t - r[i - 1].t) / (r[i].t - r[i - 1].t);
      return std::exp((1.0 - w) * std::log(r[i - 1].max_u) + w * std::log(r[i].max_u));
    }
  }
  return r.back().max_u;
}

// ---------------------------------------------------------------------------

Outcome elliptic_accuracy() {
  Outcome out;
  const auto t0 = Clock::now();
  for (int dim : {3, 5}) {
    ModelParams p;
    p.dim = dim;
    const double k = std::numbers::pi;
    auto lap = [&](double r) {
      if (r == 0.0) return -dim * k * k;
      return -k * k * std::cos(k * r) - (dim - 1.0) * k * std::sin(k * r) / r;
    };
    std::vector<double> errs;
    for (std::size_t n : {101u, 201u, 401u}) {
      const auto grid = RadialGrid::graded(dim, 1.0, n, 1.0);
      const auto u = sample(grid, [&](double r) { return 60.0 - lap(r); });
      const auto sol = solve_potential(u, p);
      const auto exact = sample(grid, [&](double r) { return std::cos(k * r); });
      const double mean = integrate_measure(exact) / grid->total_measure();
      double e = 0.0;
      for (std::size_t i = 0; i < n; ++i) e = std::max(e, std::abs(sol.v[i] - exact[i] + mean));
      errs.push_back(e);
    }
    for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
      const double rate = std::log2(errs[i] / errs[i + 1]);
      out.require(rate >= 1.9, "N=" + std::to_string(dim) + " rate " + fmt("%.3f", rate));
      out.note("N=" + std::to_string(dim) + " rate " + fmt("%.3f", rate));
    }
  }
  const double secs = seconds_since(t0);
  out.require(secs < 5.0, "runtime " + fmt("%.2f s", secs));
  out.note(fmt("%.2f s", secs));
  return out;
}

RunConfig random_config(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> dim(3, 5), profile(0, 2);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  RunConfig cfg;
  cfg.params.dim = dim(rng);
  cfg.params.alpha = 0.05 + 0.55 * u01(rng);
  cfg.params.k = 1.05 + 1.95 * u01(rng);
  cfg.params.mu = 0.05 + 1.95 * u01(rng);
  cfg.params.lambda = 0.5 + 1.5 * u01(rng);
  cfg.initial.kind = static_cast<ProfileKind>(profile(rng));
  cfg.initial.m0 = 0.5 + 19.5 * u01(rng);
  cfg.initial.concentration = cfg.initial.kind == ProfileKind::PeakedPower ? 1.0 + 9.0 * u01(rng)
                                                                            : 5.0 + 45.0 * u01(rng);
  cfg.stepper.nodes = 120;
  cfg.stepper.grading = 2.0 + u01(rng);
  cfg.stepper.t_end = 2.0;
  cfg.stepper.record_every = 10;
  return cfg;
}

Outcome mass_bound_suite() {
  Outcome out;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  int blowups = 0, horizons = 0;
  const int runs = 24;
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  int possible = 0, bounded = 0, undetermined = 0;
  for (int i = 0; i < runs; ++i) {
    RunConfig cfg = random_config(rng);
    if (i % 3 == 0) {
      // Strongly peaked data inside the blow-up regime.
      cfg.params.dim = 3;
      cfg.params.alpha = 0.05 + 0.15 * u01(rng);
      cfg.params.k = 1.05 + 0.15 * u01(rng);
      cfg.params.mu = 0.05 + 0.1 * u01(rng);
      cfg.params.lambda = 1.0;
      cfg.initial = {ProfileKind::PeakedExponential, 15.0 + 10.0 * u01(rng), 50.0};
      cfg.stepper.grading = 3.0;
    }
    cfg.solver = i % 4 == 3 ? SolverChoice::Mass : SolverChoice::Primal;
    const auto res = simulate(cfg);
    switch (classify_regime(cfg.params, integrate_ball(res.u0)).verdict) {
      case Regime::BlowupPossible: ++possible; break;
      case Regime::GlobalBounded: ++bounded; break;
      case Regime::Undetermined: ++undetermined; break;
    }
    const double ratio = worst_mass_ratio(res.series(), res.mbar);
    worst = std::max(worst, ratio);
    out.require(ratio <= 1.0 + 1e-6, "run " + std::to_string(i) + " mass ratio " + fmt("%.9g", ratio));
    blowups += res.reason() == StopReason::BlowupSuspected;
    horizons += res.reason() == StopReason::Horizon;
    collect("mass-suite run " + std::to_string(i), res);
  }
  const double secs = seconds_since(t0);
  out.require(secs < 300.0, "runtime " + fmt("%.1f s", secs));
  out.require(blowups > 0 && horizons > 0, "suite is not mixed");
  out.note(std::to_string(runs) + " runs (verdicts " + std::to_string(possible) + " blow-up possible, " +
           std::to_string(bounded) + " bounded, " + std::to_string(undetermined) + " undetermined; outcomes " +
           std::to_string(horizons) + " horizon, " + std::to_string(blowups) + " blow-up), worst int u / mbar = " + fmt("%.9f", worst) + ", " + fmt("%.1f s", secs));
  return out;
}

Outcome monotone_suite() {
  Outcome out;
  std::mt19937_64 rng(77);
  double worst = -1.0;
  const int runs = 12;
  for (int i = 0; i < runs; ++i) {
    RunConfig cfg = random_config(rng);
    cfg.solver = i % 2 ? SolverChoice::Mass : SolverChoice::Primal;
    const auto res = simulate(cfg);
    const double v = worst_monotone_violation(res.series(), cfg.params.dim);
    worst = std::max(worst, v);
    out.require(v <= 1e-6, "run " + std::to_string(i) + " violation " + fmt("%.3g", v));
  }
  out.note(std::to_string(runs) + " runs, worst (w_s - w/s) / max w_s = " + fmt("%.3g", worst));
  return out;
}

Outcome cross_agreement() {
  Outcome out;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t n : {200u, 400u, 800u}) {
    RunConfig cfg = blowup_config(n);
    cfg.solver = SolverChoice::Both;
    cfg.stepper.t_end = 8e-4;
    const auto res = simulate(cfg);
    std::size_t window = 0;
    for (const auto& c : res.cross) window += c.in_window;
    const double d = res.cross_max_rel;
    out.require(std::isfinite(d) && window >= 5, "n=" + std::to_string(n) + " has no comparison window");
    out.require(d < 0.02, "n=" + std::to_string(n) + " discrepancy " + fmt("%.4f", d));
    out.require(d < prev, "n=" + std::to_string(n) + " discrepancy did not decrease");
    out.note("n=" + std::to_string(n) + ": " + fmt("%.3g", d) + " over " + std::to_string(window) + " snapshots");
    prev = d;
  }
  return out;
}

struct BlowupLevel {
  std::size_t nodes;
  SimulationResult res;
  double seconds;
};
std::vector<BlowupLevel> g_levels;

Outcome blowup_regime() {
  Outcome out;
  for (std::size_t n : {200u, 400u, 800u}) {
    const auto t0 = Clock::now();
    auto res = simulate(blowup_config(n));
    const double secs = seconds_since(t0);
    const auto& s = res.series();
    const double ratio = s.rows.back().max_u / s.initial_max();
    out.require(res.reason() == StopReason::BlowupSuspected, "n=" + std::to_string(n) + " did not blow up");
    out.require(ratio > 1e4, "n=" + std::to_string(n) + " growth " + fmt("%.3g", ratio));
    out.require(secs < 120.0, "n=" + std::to_string(n) + " took " + fmt("%.1f s", secs));
    try {
      const auto e = detect_blowup(s);
      out.require(e.confident, "n=" + std::to_string(n) + " estimate not confident");
      out.note("n=" + std::to_string(n) + ": growth " + fmt("%.3g", ratio) + ", T_est " + fmt("%.6g", e.t_est) +
               ", " + fmt("%.2f s", secs));
    } catch (const Error& err) {
      out.require(false, "n=" + std::to_string(n) + ": " + err.what());
    }
    collect("blow-up n=" + std::to_string(n), res);
    g_levels.push_back({n, std::move(res), secs});
  }
  // Attained maximum at the latest time every level reached.
  double t_common = std::numeric_limits<double>::infinity();
  for (const auto& l : g_levels) t_common = std::min(t_common, l.res.series().rows.back().t);
  double prev = 0.0;
  for (const auto& l : g_levels) {
    const double m = max_at(l.res.series(), t_common);
    out.require(m > prev, "max at t=" + fmt("%.6g", t_common) + " not increasing at n=" + std::to_string(l.nodes));
    out.note("max(t=" + fmt("%.6g", t_common) + ", n=" + std::to_string(l.nodes) + ") = " + fmt("%.4g", m));
    prev = m;
  }
  return out;
}

Outcome bounded_regimes() {
  Outcome out;
  const std::pair<double, double> cases[] = {{0.4, 1.5}, {0.1, 2.5}};
  for (const auto& [alpha, k] : cases) {
    RunConfig cfg = blowup_config(200);
    cfg.params.alpha = alpha;
    cfg.params.k = k;
    cfg.stepper.t_end = 50.0;
    const auto res = simulate(cfg);
    const auto& s = res.series();
    double peak = 0.0;
    for (const auto& r : s.rows) peak = std::max(peak, r.max_u);
    const double ratio = peak / s.initial_max();
    const std::string tag = "alpha=" + fmt("%g", alpha) + " k=" + fmt("%g", k);
    out.require(res.reason() == StopReason::Horizon && s.rows.back().t == 50.0, tag + " did not reach T_end");
    out.require(ratio <= 10.0, tag + " peak ratio " + fmt("%.3g", ratio));
    out.note(tag + ": peak/initial " + fmt("%.4g", ratio));
  }
  return out;
}

Outcome lp_growth() {
  Outcome out;
  for (const auto& l : g_levels) {
    const auto& s = l.res.series();
    for (std::size_t i = 0; i < s.p_list.size(); ++i) {
      const double ratio = s.rows.back().lp[i] / s.rows.front().lp[i];
      out.require(ratio >= 100.0, "n=" + std::to_string(l.nodes) + " p=" + fmt("%g", s.p_list[i]) + " ratio " +
                                      fmt("%.3g", ratio));
      out.note("n=" + std::to_string(l.nodes) + " p=" + fmt("%g", s.p_list[i]) + ": " + fmt("%.3g", ratio));
    }
  }
  if (g_levels.empty()) out.require(false, "no blow-up runs");
  return out;
}

Outcome odi_blowup_time() {
  Outcome out;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> beta(0.1, 10.0), delta(0.05, 20.0), gamma(0.1, 4.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double b = beta(rng), d = delta(rng), g = gamma(rng);
    const double closed = odi_blowup_bound(b, d, g);
    const double ode = oracle::blowup_time(b, d, 1.0 + g);
    worst = std::max(worst, std::abs(ode - closed) / closed);
  }
  const double secs = seconds_since(t0);
  out.require(worst <= 1e-6, "worst relative gap " + fmt("%.3g", worst));
  out.require(secs < 10.0, "runtime " + fmt("%.2f s", secs));
  out.note("100 points, worst relative gap " + fmt("%.3g", worst) + ", " + fmt("%.2f s", secs));
  return out;
}

Outcome lower_bound_soundness() {
  Outcome out;
  out.require(!g_confident.empty(), "no confident blow-up runs in the suite");
  for (const auto& run : g_confident) {
    try {
      const auto r = bounds_for(run.cfg, run.cfg.effective_bound_p());
      const bool ok = r.t_closed_form <= r.t_quadrature && r.t_quadrature <= run.t_est;
      out.require(ok, run.label + ": " + fmt("%.3g", r.t_closed_form) + " / " + fmt("%.3g", r.t_quadrature) +
                          " / " + fmt("%.3g", run.t_est));
    } catch (const Error& e) {
      out.require(false, run.label + ": " + e.what());
    }
  }
  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<int> dim(3, 12);
  std::uniform_real_distribution<double> extra(1e-3, 8.0), frac(1e-3, 1.0 - 1e-3);
  int bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const int n = dim(rng);
    const double p = 0.5 * n + extra(rng);
    const double eps = frac(rng) * (2.0 * p / n - 1.0);
    const auto g = gamma_exponents(p, n, eps);
    bad += !(1.0 < g.gamma1 && g.gamma1 < g.gamma2 && g.gamma2 < g.gamma);
  }
  out.require(bad == 0, std::to_string(bad) + " gamma tuples out of order");
  out.note(std::to_string(g_confident.size()) + " confident runs checked, 1000 gamma tuples ordered");
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  Outcome out;
  const auto base = std::filesystem::temp_directory_path() / "kslab_acceptance_det";
  std::filesystem::remove_all(base);
  RunConfig cfg = blowup_config(200);
  cfg.solver = SolverChoice::Both;
  cmd_simulate(cfg, base / "a");
  cmd_simulate(cfg, base / "b");
  for (const char* f : {"series.csv", "series_mass.csv", "report.json", "cross.csv"}) {
    const auto a = slurp(base / "a" / f), b = slurp(base / "b" / f);
    out.require(!a.empty() && a == b, std::string(f) + " differs");
  }
  out.note("series.csv, series_mass.csv, report.json and cross.csv identical across two runs");
  std::filesystem::remove_all(base);
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  // Criterion 9 uses the confident runs of 2 and 5, so it runs after them.
  const std::vector<Criterion> criteria = {
      {1, "elliptic accuracy", elliptic_accuracy},
      {2, "mass bound", mass_bound_suite},
      {3, "monotone bound", monotone_suite},
      {4, "cross-formulation agreement", cross_agreement},
      {5, "blow-up regime", blowup_regime},
      {6, "bounded regimes", bounded_regimes},
      {7, "L^p blow-up", lp_growth},
      {8, "ODI blow-up time", odi_blowup_time},
      {9, "lower-bound soundness", lower_bound_soundness},
      {10, "determinism", determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    failures += !o.pass;
    std::printf("%s criterion %d (%s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
