#pragma once

// Orchestration behind the command-line tool: single simulations, parameter
// sweeps, bound reports and the files they produce.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "kslab/bounds.hpp"
#include "kslab/config.hpp"
#include "kslab/diagnostics.hpp"
#include "kslab/mass_solver.hpp"
#include "kslab/model.hpp"
#include "kslab/output.hpp"
#include "kslab/primal_solver.hpp"

namespace kslab {

using nlohmann::json;

inline constexpr std::size_t kCrossSnapshots = 40;
/// Cross-solver comparisons use snapshots with max u at most this multiple of
/// the initial max (the smooth, pre-blow-up window).
inline constexpr double kCrossWindowFactor = 10.0;
inline constexpr double kCrossTolerance = 0.02;
inline constexpr double kMassTolerance = 1e-6;
inline constexpr double kMonotoneBoundTolerance = 1e-6;

namespace detail {

/// NaN and infinities are not representable in JSON; they become null.
inline json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ConfigError, "cannot write " + path.string());
  out << text;
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

}  // namespace detail

inline json to_json(const RegimeVerdict& v) {
  return {{"verdict", std::string(to_string(v.verdict))},
          {"clause", v.clause},
          {"alpha_critical", v.alpha_critical},
          {"k_upper", v.k_upper},
          {"mu0", v.mu0 ? json(*v.mu0) : json(nullptr)},
          {"mass_bound", v.mass_bound}};
}

inline json to_json(const BlowupEstimate& e) {
  return {{"t_est", detail::number_or_null(e.t_est)},
          {"beta_fit", detail::number_or_null(e.beta_fit)},
          {"residual", detail::number_or_null(e.residual)},
          {"confident", e.confident},
          {"window_rows", e.window_rows}};
}

inline json to_json(const BoundReport& r) {
  return {{"p", r.p},
          {"eps", r.eps},
          {"eps1", r.eps1},
          {"eps2", r.eps2},
          {"C_GN", r.c_gn},
          {"mbar", r.mbar},
          {"c", r.c_holder},
          {"c1", r.c1},
          {"c2", r.c2},
          {"c3", r.c3},
          {"c4", r.c4},
          {"c5", r.c5},
          {"c1_tilde", r.c1_tilde},
          {"C", r.c_grad},
          {"B1", r.b1},
          {"B2", r.b2},
          {"B3", r.b3},
          {"B4", r.b4},
          {"gamma1", r.gamma1},
          {"gamma2", r.gamma2},
          {"gamma", r.gamma},
          {"gammas_ordered", 1.0 < r.gamma1 && r.gamma1 < r.gamma2 && r.gamma2 < r.gamma},
          {"Psi0", detail::number_or_null(r.psi0)},
          {"T_quadrature", detail::number_or_null(r.t_quadrature)},
          {"T_closed_form", detail::number_or_null(r.t_closed_form)},
          {"notes", r.notes}};
}

inline json to_json(const UpperBoundReport& r) {
  return {{"a", r.a},         {"b", r.b},           {"mbar", r.mbar},   {"Mbar_sq", r.mbar_sq},
          {"C_bar", r.c_bar}, {"c1", r.c1},         {"c4_bar", r.c4_bar}, {"delta", r.delta},
          {"C", r.drift},     {"beta", r.beta},     {"T_upper", detail::number_or_null(r.t_upper)},
          {"note", r.note}};
}

inline json classify_json(const RunConfig& cfg) {
  // The mass bound of the classifier uses the initial mass of the configured data.
  const auto grid = RadialGrid::graded(cfg.params.dim, cfg.params.radius, cfg.stepper.nodes,
                                       cfg.stepper.grading);
  const RadialField u0 = make_initial_data(cfg.initial, grid);
  return to_json(classify_regime(cfg.params, integrate_ball(u0)));
}

// ---------------------------------------------------------------------------
// Single simulation
// ---------------------------------------------------------------------------

struct RunSummary {
  StopReason reason = StopReason::Horizon;
  std::string message;
  double t_final = 0.0;
  double max_ratio = 1.0;
  std::optional<BlowupEstimate> estimate;
  std::string estimate_error;
};

struct CrossSample {
  double t;
  double max_primal;
  double max_mass;
  double linf_abs;
  double linf_rel;
  bool in_window;
};

struct SimulationResult {
  RunConfig config;
  RadialField u0;
  double mbar = 0.0;
  std::optional<PrimalRun> primal;
  std::optional<MassRun> mass;
  std::vector<CrossSample> cross;
  /// Largest relative discrepancy among in-window samples (NaN if none).
  double cross_max_rel = std::numeric_limits<double>::quiet_NaN();

  const DiagnosticsSeries& series() const { return primal ? primal->series : mass->series; }
  StopReason reason() const { return primal ? primal->reason : mass->reason; }
};

inline RunSummary summarize(const DiagnosticsSeries& series, StopReason reason, const std::string& message,
                            double t_final) {
  RunSummary s;
  s.reason = reason;
  s.message = message;
  s.t_final = t_final;
  double mx = 0.0;
  for (const auto& row : series.rows) mx = std::max(mx, row.max_u);
  s.max_ratio = mx / series.initial_max();
  try {
    s.estimate = detect_blowup(series);
  } catch (const Error& e) {
    s.estimate_error = e.what();
  }
  return s;
}

struct SimulationObservers {
  RowObserver primal;
  RowObserver mass;
};

inline SimulationResult simulate(const RunConfig& cfg_in, const SimulationObservers& observers = {}) {
  validate(cfg_in);
  SimulationResult res;
  res.config = cfg_in;
  RunConfig& cfg = res.config;
  const auto grid = RadialGrid::graded(cfg.params.dim, cfg.params.radius, cfg.stepper.nodes,
                                       cfg.stepper.grading);
  res.u0 = make_initial_data(cfg.initial, grid);
  res.mbar = mass_bound(integrate_ball(res.u0), cfg.params);
  const auto p_list = cfg.effective_p_list();

  StepperConfig stepper = cfg.stepper;
  if (cfg.solver == SolverChoice::Both) {
    for (std::size_t i = 1; i <= kCrossSnapshots; ++i) {
      stepper.snapshot_times.push_back(stepper.t_end * static_cast<double>(i) / kCrossSnapshots);
    }
  }
  if (cfg.solver != SolverChoice::Mass) {
    res.primal = run_primal(res.u0, stepper, cfg.params, p_list, observers.primal);
  }
  if (cfg.solver != SolverChoice::Primal) {
    res.mass = run_mass(transform_to_mass(res.u0), stepper, cfg.params, p_list, observers.mass);
  }
  if (res.primal && res.mass) {
    const double u_ref = max_norm(res.u0);
    const auto& a = res.primal->snapshots;
    const auto& b = res.mass->snapshots;
    double worst = -1.0;
    for (std::size_t j = 0; j < std::min(a.size(), b.size()); ++j) {
      CrossSample c{a[j].t, max_norm(a[j].u), max_norm(b[j].u), 0.0, 0.0, false};
      for (std::size_t i = 0; i < a[j].u.size(); ++i) {
        c.linf_abs = std::max(c.linf_abs, std::abs(a[j].u[i] - b[j].u[i]));
      }
      c.linf_rel = c.linf_abs / c.max_primal;
      c.in_window = std::max(c.max_primal, c.max_mass) <= kCrossWindowFactor * u_ref;
      if (c.in_window) worst = std::max(worst, c.linf_rel);
      res.cross.push_back(c);
    }
    if (worst >= 0.0) res.cross_max_rel = worst;
  }
  return res;
}

inline json run_json(const DiagnosticsSeries& series, const RunSummary& s, double mbar, int dim) {
  json j;
  j["stop_reason"] = std::string(to_string(s.reason));
  j["message"] = s.message;
  j["t_final"] = s.t_final;
  j["rows"] = series.rows.size();
  j["max_ratio"] = s.max_ratio;
  j["blowup_estimate"] = s.estimate ? to_json(*s.estimate) : json(nullptr);
  if (!s.estimate) j["blowup_estimate_error"] = s.estimate_error;

  const double mass_ratio = worst_mass_ratio(series, mbar);
  const double monotone = worst_monotone_violation(series, dim);
  json lp = json::array();
  for (std::size_t i = 0; i < series.p_list.size(); ++i) {
    const double first = series.rows.front().lp[i];
    const double last = series.rows.back().lp[i];
    lp.push_back({{"p", series.p_list[i]}, {"initial", first}, {"final", last}, {"ratio", last / first}});
  }
  j["invariants"] = {
      {"mass_bound", {{"mbar", mbar}, {"worst_ratio", mass_ratio}, {"holds", mass_ratio <= 1.0 + kMassTolerance}}},
      {"monotone_bound",
       {{"worst_relative", detail::number_or_null(monotone)}, {"holds", !(monotone > kMonotoneBoundTolerance)}}},
      {"lp_growth", lp}};
  j["moment"] = {{"a", series.ab.a},
                 {"b", series.ab.b},
                 {"fallback", series.ab_fallback},
                 {"y_initial", series.rows.front().y_ab},
                 {"y_final", series.rows.back().y_ab}};
  return j;
}

inline json build_report(const SimulationResult& res) {
  const int dim = res.config.params.dim;
  json j;
  j["config"] = to_json(res.config);
  j["solver"] = std::string(to_string(res.config.solver));
  j["regime"] = to_json(classify_regime(res.config.params, integrate_ball(res.u0)));
  j["initial"] = {{"max_u", max_norm(res.u0)}, {"integral", integrate_ball(res.u0)}, {"mass_bound", res.mbar}};
  json runs;
  std::optional<json> primary;
  if (res.primal) {
    const auto s = summarize(res.primal->series, res.primal->reason, res.primal->message, res.primal->final_state.t);
    runs["primal"] = run_json(res.primal->series, s, res.mbar, dim);
    primary = runs["primal"];
  }
  if (res.mass) {
    const auto s = summarize(res.mass->series, res.mass->reason, res.mass->message, res.mass->final_state.t);
    runs["mass"] = run_json(res.mass->series, s, res.mbar, dim);
    if (!primary) primary = runs["mass"];
  }
  j["runs"] = runs;
  j["stop_reason"] = (*primary)["stop_reason"];
  j["blowup_estimate"] = (*primary)["blowup_estimate"];
  if (res.primal && res.mass) {
    std::size_t in_window = 0;
    for (const auto& c : res.cross) in_window += c.in_window ? 1 : 0;
    j["cross"] = {{"snapshots", res.cross.size()},
                  {"window_snapshots", in_window},
                  {"window_factor", kCrossWindowFactor},
                  {"max_rel_discrepancy", detail::number_or_null(res.cross_max_rel)},
                  {"below_tolerance", std::isfinite(res.cross_max_rel) && res.cross_max_rel < kCrossTolerance}};
  }
  return j;
}

inline std::string cross_csv(const SimulationResult& res) {
  std::string s = "t,max_u_primal,max_u_mass,linf_abs,linf_rel,in_window\n";
  for (const auto& c : res.cross) {
    s += format_number(c.t) + "," + format_number(c.max_primal) + "," + format_number(c.max_mass) + "," +
         format_number(c.linf_abs) + "," + format_number(c.linf_rel) + "," + (c.in_window ? "1" : "0") + "\n";
  }
  s += "summary,,,," + format_number(res.cross_max_rel) + ",window\n";
  return s;
}

/// Runs the configured simulation and writes series.csv, report.json,
/// plot.gp, meta.json and (solver = both) series_mass.csv and cross.csv.
/// Diagnostics rows are streamed while the run progresses; if the solver
/// fails, the partial series ends with a truncation marker and the error is
/// rethrown.
inline SimulationResult cmd_simulate(const RunConfig& cfg, const std::filesystem::path& out_dir) {
  validate(cfg);
  std::filesystem::create_directories(out_dir);
  const auto p_list = cfg.effective_p_list();
  std::optional<SeriesWriter> primary;
  std::optional<SeriesWriter> secondary;
  primary.emplace((out_dir / "series.csv").string(), p_list);
  if (cfg.solver == SolverChoice::Both) secondary.emplace((out_dir / "series_mass.csv").string(), p_list);

  SimulationObservers obs;
  if (cfg.solver == SolverChoice::Mass) {
    obs.mass = [&](const DiagnosticsRow& r) { primary->write(r); };
  } else {
    obs.primal = [&](const DiagnosticsRow& r) { primary->write(r); };
    if (secondary) obs.mass = [&](const DiagnosticsRow& r) { secondary->write(r); };
  }
  SimulationResult res;
  try {
    res = simulate(cfg, obs);
  } catch (const std::exception& e) {
    primary->truncate(e.what());
    if (secondary) secondary->truncate(e.what());
    throw;
  }
  primary->flush();
  if (secondary) secondary->flush();

  detail::write_text(out_dir / "report.json", build_report(res).dump(2) + "\n");
  detail::write_text(out_dir / "plot.gp", plot_script("series.csv", p_list));
  if (res.primal && res.mass) detail::write_text(out_dir / "cross.csv", cross_csv(res));
  const json meta = {{"generator", "kslab"}, {"created_utc", detail::utc_timestamp()}};
  detail::write_text(out_dir / "meta.json", meta.dump(2) + "\n");
  return res;
}

// ---------------------------------------------------------------------------
// Bounds
// ---------------------------------------------------------------------------

/// Lower-bound report for exponent p with Psi0 from the configured initial data.
inline BoundReport bounds_for(const RunConfig& cfg, double p) {
  const auto grid = RadialGrid::graded(cfg.params.dim, cfg.params.radius, cfg.stepper.nodes,
                                       cfg.stepper.grading);
  const RadialField u0 = make_initial_data(cfg.initial, grid);
  const double mbar = mass_bound(integrate_ball(u0), cfg.params);
  return lower_bound_report(p, cfg.params, mbar, psi(u0, p));
}

/// bounds.json content. When `companion_report` holds a simulation report
/// with a confident blow-up estimate, the soundness comparison is included.
inline json cmd_bounds(const RunConfig& cfg, const std::optional<json>& companion_report = std::nullopt) {
  validate(cfg);
  const double p = cfg.effective_bound_p();
  if (!(p > 0.5 * cfg.params.dim)) throw Error(ErrorCode::InvalidP, "bound exponent must exceed N/2");
  const BoundReport lower = bounds_for(cfg, p);
  json j;
  j["lower_bound"] = to_json(lower);
  j["lower_bound"]["consistent"] = lower.t_closed_form <= lower.t_quadrature;

  const auto grid = RadialGrid::graded(cfg.params.dim, cfg.params.radius, cfg.stepper.nodes,
                                       cfg.stepper.grading);
  const RadialField u0 = make_initial_data(cfg.initial, grid);
  const double mbar = mass_bound(integrate_ball(u0), cfg.params);
  try {
    const MomentExponents ab = select_ab(cfg.params);
    const double beta = moment_functional(transform_to_mass(u0), ab.a, ab.b);
    j["upper_bound"] = to_json(upper_bound_apparatus(cfg.params, mbar, ab, beta, cfg.drift));
    j["upper_bound"]["asserted"] = true;
  } catch (const Error& e) {
    j["upper_bound"] = {{"asserted", false}, {"reason", e.what()}};
  }

  if (companion_report && companion_report->contains("blowup_estimate")) {
    const auto& est = (*companion_report)["blowup_estimate"];
    if (est.is_object() && est.value("confident", false) && est["t_est"].is_number()) {
      const double t_est = est["t_est"].get<double>();
      j["soundness"] = {{"t_est", t_est},
                        {"closed_form_below_t_est", lower.t_closed_form <= t_est},
                        {"quadrature_below_t_est", lower.t_quadrature <= t_est},
                        {"sound", lower.t_closed_form <= t_est && lower.t_quadrature <= t_est}};
    } else {
      j["soundness"] = {{"sound", nullptr}, {"reason", "companion run has no confident blow-up estimate"}};
    }
  }
  return j;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct SweepRow {
  std::size_t index = 0;
  std::vector<double> coords;
  std::string verdict;
  std::string clause;
  std::string outcome;
  double t_final = std::numeric_limits<double>::quiet_NaN();
  double max_ratio = std::numeric_limits<double>::quiet_NaN();
  double t_est = std::numeric_limits<double>::quiet_NaN();
  bool confident = false;
  double t_closed_form = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

inline std::string sweep_header(const SweepConfig& sc) {
  std::string h = "index";
  for (const auto& a : sc.axes) h += "," + a.name;
  h += ",verdict,clause,outcome,t_final,max_ratio,t_est,confident,t_closed_form,error";
  return h;
}

inline std::string sweep_line(const SweepRow& r) {
  std::string s = std::to_string(r.index);
  for (double c : r.coords) s += "," + format_number(c);
  std::string err = r.error;
  for (char& ch : err) {
    if (ch == ',' || ch == '\n') ch = ' ';
  }
  s += "," + r.verdict + "," + r.clause + "," + r.outcome + "," + format_number(r.t_final) + "," +
       format_number(r.max_ratio) + "," + format_number(r.t_est) + "," + (r.confident ? "1" : "0") + "," +
       format_number(r.t_closed_form) + "," + err;
  return s;
}

/// One grid point: classification, a primal (or mass) run and, when the run
/// blows up confidently, the closed-form lower bound. Failures end up in the
/// row instead of propagating.
inline SweepRow sweep_point_row(const SweepConfig& sc, std::size_t index) {
  SweepRow row;
  row.index = index;
  try {
    RunConfig cfg = sweep_point(sc, index, &row.coords);
    if (cfg.solver == SolverChoice::Both) cfg.solver = SolverChoice::Primal;
    validate(cfg);
    const auto grid = RadialGrid::graded(cfg.params.dim, cfg.params.radius, cfg.stepper.nodes,
                                         cfg.stepper.grading);
    const RadialField u0 = make_initial_data(cfg.initial, grid);
    const auto verdict = classify_regime(cfg.params, integrate_ball(u0));
    row.verdict = std::string(to_string(verdict.verdict));
    row.clause = verdict.clause;
    const SimulationResult res = simulate(cfg);
    const auto s = summarize(res.series(), res.reason(),
                             res.primal ? res.primal->message : res.mass->message,
                             res.primal ? res.primal->final_state.t : res.mass->final_state.t);
    row.outcome = std::string(to_string(s.reason));
    row.t_final = s.t_final;
    row.max_ratio = s.max_ratio;
    if (s.estimate && s.estimate->confident) {
      row.t_est = s.estimate->t_est;
      row.confident = true;
    }
    try {
      row.t_closed_form = bounds_for(cfg, cfg.effective_bound_p()).t_closed_form;
    } catch (const Error& e) {
      row.error = e.what();
    }
  } catch (const std::exception& e) {
    if (row.outcome.empty()) row.outcome = "Error";
    row.error = e.what();
  }
  return row;
}

/// Evaluates every grid point on `workers` threads. Rows are appended to
/// regime_map.partial.csv as they finish and regime_map.csv is written in
/// index order at the end.
inline std::vector<SweepRow> cmd_sweep(const SweepConfig& sc, const std::filesystem::path& out_dir,
                                       std::size_t workers = 1,
                                       const std::function<void(const SweepRow&)>& progress = {}) {
  std::filesystem::create_directories(out_dir);
  const std::size_t n = sc.points();
  std::vector<SweepRow> rows(n);
  std::ofstream partial(out_dir / "regime_map.partial.csv");
  if (!partial) throw Error(ErrorCode::ConfigError, "cannot write into " + out_dir.string());
  partial << sweep_header(sc) << '\n';
  partial.flush();

  std::mutex mu;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      SweepRow r = sweep_point_row(sc, i);
      std::lock_guard<std::mutex> lock(mu);
      partial << sweep_line(r) << '\n';
      partial.flush();
      if (progress) progress(r);
      rows[i] = std::move(r);
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, n));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  partial.close();

  std::string text = sweep_header(sc) + "\n";
  for (const auto& r : rows) text += sweep_line(r) + "\n";
  detail::write_text(out_dir / "regime_map.csv", text);
  std::filesystem::remove(out_dir / "regime_map.partial.csv");
  return rows;
}

}  // namespace kslab
