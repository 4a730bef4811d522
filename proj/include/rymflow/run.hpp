#pragma once

#include <functional>
#include <string>

#include "rymflow/config.hpp"
#include "rymflow/io.hpp"

namespace rym {

enum class StopReason { EndTime, Stationary, MaxSteps, NumericalFailure };

std::string to_string(StopReason r);

/// Optional observers. Records arrive in CSV order; snapshots and checkpoints
/// at their cadences (the final ones are left to the caller via RunResult).
struct RunHooks {
    std::function<void(const DiagnosticsRecord&)> on_record;
    std::function<void(long step, const FlowState&)> on_snapshot;
    std::function<void(const Checkpoint&)> on_checkpoint;
    /// Every accepted step, before recentering.
    std::function<void(long step, const FlowState& prev, const FlowState& next, const StepInfo&)> on_step;
};

struct RunResult {
    FlowState final_state;
    /// Global step index of final_state.
    long steps = 0;
    StopReason reason = StopReason::EndTime;
    /// Failure text for NumericalFailure, empty otherwise.
    std::string message;
    std::size_t rows = 0;
    MinVolumeTracker tracker{0.0, 0.0};
    int recenterings = 0;
    /// max |rhs| at the last diagnostics row, NaN if never measured.
    double rhs_norm = 0.0;
    /// State, counters and config echo at final_state.
    Checkpoint checkpoint;
};

/// Initial data for the recipe in cfg: random, explicit modes or a snapshot
/// (whose t is reset to 0). The psi mean is shifted to meet flux_target and the
/// normalized variant starts at unit volume.
FlowState initial_state(const FlowConfig& cfg);

/// max over nodes of |du/dt| and |dpsi/dt|.
double rhs_max_norm(const FlowState& s, FlowVariant variant);

/// Steps from t = 0 until the first step reaching t_end, stationarity or
/// max_steps. Row k of the diagnostics uses the states at steps k - 1 and k;
/// a row is emitted at step 0 and every diag_cadence steps. Numerical failures
/// end the run with reason NumericalFailure and the last good state.
RunResult run(const FlowConfig& cfg, const RunHooks& hooks = {});

/// Continues from a checkpoint taken by a run with the same config; the
/// continuation is bit-identical to the uninterrupted run.
RunResult resume(const FlowConfig& cfg, const Checkpoint& from, const RunHooks& hooks = {});

/// Files written by run_with_output under cfg.output_dir.
struct OutputLayout {
    static constexpr const char* csv = "diagnostics.csv";
    static constexpr const char* config_echo = "config.echo";
    static constexpr const char* final_snapshot = "final.snap";
    static constexpr const char* checkpoint = "checkpoint.ckpt";
    static constexpr const char* summary = "summary.txt";
    static constexpr const char* plots_dir = "plots";
    static constexpr const char* snapshots_dir = "snapshots";
    static constexpr const char* checkpoints_dir = "checkpoints";
};

/// run or resume writing the CSV, config echo, snapshots, checkpoints, plots
/// and summary. A resume cuts an existing CSV back to the checkpoint's rows.
RunResult run_with_output(const FlowConfig& cfg, const Checkpoint* from = nullptr);

/// Human-readable report: stop reason, final diagnostics and the volume-floor
/// thresholds with the region flags.
std::string run_summary(const FlowConfig& cfg, const RunResult& r);

}  // namespace rym
