#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rymflow/flow_core.hpp"

namespace rym {

enum class InitialKind { Random, Modes, Snapshot };

/// One basis mode as in BackgroundGeometry::mode(a, b, c, s).
struct ModeTerm {
    int a = 0;
    int b = 0;
    double c = 0.0;
    double s = 0.0;
    bool operator==(const ModeTerm&) const = default;
};

/// Everything a run needs. Defaults here are the documented defaults of the
/// config grammar; config_to_text echoes every field.
struct FlowConfig {
    // [surface]
    SurfaceKind surface = SurfaceKind::Torus;
    int n = 64;
    int n_lat = 32;
    int n_lon = 64;

    // [flow]
    FlowVariant variant = FlowVariant::VolumeNormalized;
    double t_end = 1.0;

    // [initial]
    InitialKind initial = InitialKind::Random;
    std::uint64_t seed = 1;
    int max_wavenumber = 4;
    double u_amplitude = 0.2;
    double psi_amplitude = 0.5;
    double u_mean = 0.0;
    double psi_mean = 0.0;
    std::vector<ModeTerm> u_modes;
    std::vector<ModeTerm> psi_modes;
    std::string snapshot;
    /// Shift of the psi mean so the initial flux equals this value.
    std::optional<double> flux_target;

    // [stepper]
    StepperConfig stepper;
    double blowup_u = 50.0;

    // [stop]
    /// Stop when max |rhs| over u and psi is at most this; 0 disables.
    double stationary_tol = 1e-9;
    /// 0 means no limit.
    long max_steps = 0;

    // [gauge]
    bool recenter = false;
    double recenter_tol = 1e-10;
    int recenter_cadence = 100;

    // [output]
    std::string output_dir = "rymflow_out";
    int diag_cadence = 100;
    /// Steps between snapshots; 0 writes the final snapshot only.
    int snapshot_cadence = 0;
    /// Steps between checkpoints; 0 writes the final checkpoint only.
    int checkpoint_cadence = 0;
    bool plots = true;

    // [diagnostics]
    double moser_k = 1.0;
    bool eigenvalue = true;
    double eigen_tol = 1e-9;
    int sobolev_trials = 16;
    std::uint64_t sobolev_seed = 7;
    int sobolev_max_wavenumber = 8;

    Resolution resolution() const;
};

/// Parses the `[section]` / `key = value` grammar; `#` starts a comment.
/// Unknown sections or keys, duplicates and malformed values throw ConfigError
/// with the line number; semantic violations throw ConfigError naming the key.
FlowConfig parse_config(const std::string& text);

/// Reads and parses a file. Throws IoError when it cannot be read.
FlowConfig load_config(const std::string& path);

/// Semantic checks shared by parse_config and programmatic configs.
void validate(const FlowConfig& cfg);

/// Canonical text with every key; parse_config(config_to_text(c)) reproduces c.
std::string config_to_text(const FlowConfig& cfg);

/// Name of the environment variable that overrides output.dir.
inline constexpr const char* kOutputDirEnv = "RYMFLOW_OUTPUT_DIR";

/// Applies the output directory override when the variable is set and non-empty.
void apply_environment(FlowConfig& cfg);

}  // namespace rym
