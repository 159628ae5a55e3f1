#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kslab/diagnostics.hpp"
#include "kslab/error.hpp"
#include "kslab/grid.hpp"

namespace kslab {

struct StepperConfig {
  /// Explicit stability safety factor in (0, 1).
  double cfl = 0.4;
  double dt_min = 1e-14;
  double dt_max = 1e-2;
  double dt_initial = 1e-5;
  /// Stop once max u >= u_stop * (initial max u).
  double u_stop = 1e8;
  double t_end = 1.0;
  std::size_t nodes = 200;
  double grading = 2.0;
  /// Largest accepted relative growth of max u in one step.
  double max_growth = 0.1;
  /// A diagnostics row is written every `record_every` steps, and in addition
  /// whenever max u moved by more than `record_growth` (relative) since the
  /// last row.
  std::size_t record_every = 50;
  double record_growth = 0.05;
  /// Step budget; a run that exhausts it stops as Stalled. Guards against
  /// collapsed states that creep on with vanishing steps.
  std::size_t max_steps = 1000000;
  /// Times at which the full density is kept (steps are shortened to hit them).
  std::vector<double> snapshot_times;

  void validate() const {
    if (!(cfl > 0.0 && cfl < 1.0)) throw Error(ErrorCode::InvalidParams, "cfl must lie in (0, 1)");
    if (!(dt_min > 0.0 && dt_min < dt_max)) {
      throw Error(ErrorCode::InvalidParams, "need 0 < dt_min < dt_max");
    }
    if (!(u_stop > 0.0)) throw Error(ErrorCode::InvalidParams, "u_stop must be positive");
    if (!(t_end >= 0.0)) throw Error(ErrorCode::InvalidParams, "t_end must be nonnegative");
    if (nodes < 5) throw Error(ErrorCode::InvalidParams, "need at least 5 nodes");
    if (!(grading >= 1.0)) throw Error(ErrorCode::InvalidParams, "grading must be >= 1");
    if (!(max_growth > 0.0)) throw Error(ErrorCode::InvalidParams, "max_growth must be positive");
    if (record_every == 0) throw Error(ErrorCode::InvalidParams, "record_every must be positive");
    if (max_steps == 0) throw Error(ErrorCode::InvalidParams, "max_steps must be positive");
  }
};

enum class StopReason { Horizon, BlowupSuspected, Stalled };

constexpr std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::Horizon: return "Horizon";
    case StopReason::BlowupSuspected: return "BlowupSuspected";
    case StopReason::Stalled: return "Stalled";
  }
  return "Horizon";
}

/// Called with every diagnostics row as soon as it is recorded.
using RowObserver = std::function<void(const DiagnosticsRow&)>;

struct Snapshot {
  double t = 0.0;
  RadialField u;
};

namespace detail {

/// Step length clipped so that the next pending snapshot time (or t_end) is hit
/// exactly.
inline double clip_to_targets(double t, double dt, const StepperConfig& cfg,
                              std::size_t next_snapshot) {
  double target = cfg.t_end;
  if (next_snapshot < cfg.snapshot_times.size()) {
    target = std::min(target, cfg.snapshot_times[next_snapshot]);
  }
  return std::min(dt, target - t);
}

struct RecordPolicy {
  std::size_t steps_since = 0;
  double last_max = 0.0;

  bool due(const StepperConfig& cfg, double max_u) {
    ++steps_since;
    const bool moved = std::abs(max_u - last_max) > cfg.record_growth * last_max;
    if (steps_since >= cfg.record_every || moved) {
      steps_since = 0;
      last_max = max_u;
      return true;
    }
    return false;
  }
};

}  // namespace detail
}  // namespace kslab
