#include "rymflow/run.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <sstream>

#include "rymflow/errors.hpp"
#include "rymflow/mobius_gauge.hpp"
#include "rymflow/text_format.hpp"

namespace rym {

namespace fs = std::filesystem;

namespace {

ScalarField sum_modes(const BackgroundGeometry& bg, double mean, const std::vector<ModeTerm>& modes) {
    ScalarField f = bg.constant(mean);
    for (const auto& m : modes) f += bg.mode(m.a, m.b, m.c, m.s);
    return f;
}

DiagnosticsOptions diag_options(const FlowConfig& cfg) {
    DiagnosticsOptions o;
    o.moser_k = cfg.moser_k;
    o.eigenvalue = cfg.eigenvalue;
    o.eigen.tol = cfg.eigen_tol;
    return o;
}

bool reached_end(double t, double t_end) { return t >= t_end - 1e-12 * std::max(1.0, std::abs(t_end)); }

class Driver {
public:
    Driver(const FlowConfig& cfg, const RunHooks& hooks)
        : cfg_(cfg),
          hooks_(hooks),
          opts_(diag_options(cfg)) {}

    // sobolev_trials = 0 disables the monitor (the column reads 0).
    void build_family(const BackgroundGeometry& bg) {
        if (cfg_.sobolev_trials > 0)
            family_ = sobolev_family(bg, cfg_.sobolev_trials, cfg_.sobolev_seed,
                                     std::min(cfg_.sobolev_max_wavenumber, bg.max_wavenumber()));
    }

    RunResult start() {
        FlowState s = initial_state(cfg_);
        build_family(s.bg());
        RunResult r;
        r.tracker = MinVolumeTracker(flux(s), s.bg().r0());
        r.tracker.observe(s.t, volume(s));
        emit(r, evaluate_diagnostics(nullptr, s, cfg_.variant, family_, opts_));
        if (cfg_.snapshot_cadence > 0 && hooks_.on_snapshot) hooks_.on_snapshot(0, s);
        r.final_state = std::move(s);
        return loop(std::move(r));
    }

    RunResult from(const Checkpoint& c) {
        RunResult r;
        r.final_state = c.state;
        r.steps = c.step;
        r.rows = c.rows;
        build_family(c.state.bg());
        r.tracker = MinVolumeTracker(flux(c.state), c.state.bg().r0());
        r.tracker.restore(c.tracker);
        return loop(std::move(r));
    }

private:
    void emit(RunResult& r, const DiagnosticsRecord& rec) {
        ++r.rows;
        if (hooks_.on_record) hooks_.on_record(rec);
    }

    Checkpoint checkpoint(const RunResult& r) const {
        return {config_to_text(cfg_), r.steps, r.rows, r.tracker.save(), r.final_state};
    }

    double choose_dt(const FlowState& s) const {
        double dt = cfg_.stepper.dt_max;
        if (cfg_.stepper.scheme == Scheme::RK4Explicit) dt = std::min(dt, rk4_max_dt(s, cfg_.stepper.cfl_safety));
        if (dt < cfg_.stepper.dt_min) {
            std::ostringstream msg;
            msg << "step size " << dt << " below dt_min " << cfg_.stepper.dt_min << " at t = " << s.t;
            throw StepRejected(msg.str(), dt);
        }
        return dt;
    }

    RunResult loop(RunResult r) {
        r.rhs_norm = std::numeric_limits<double>::quiet_NaN();
        StepOptions so;
        so.cfl_safety = std::max(1.0, cfg_.stepper.cfl_safety);
        so.blowup_u = cfg_.blowup_u;
        try {
            while (true) {
                if (reached_end(r.final_state.t, cfg_.t_end)) {
                    r.reason = StopReason::EndTime;
                    break;
                }
                if (cfg_.max_steps > 0 && r.steps >= cfg_.max_steps) {
                    r.reason = StopReason::MaxSteps;
                    break;
                }
                const FlowState& cur = r.final_state;
                StepInfo info;
                FlowState next = step(cur, choose_dt(cur), cfg_.variant, cfg_.stepper.scheme, so, &info);
                const long k = r.steps + 1;
                r.tracker.observe(next.t, volume(next));
                if (hooks_.on_step) hooks_.on_step(k, cur, next, info);

                bool stationary = false;
                if (k % cfg_.diag_cadence == 0) {
                    auto rec = evaluate_diagnostics(&cur, next, cfg_.variant, family_, opts_);
                    // The projection hides the drift; report what the step produced.
                    if (cfg_.variant == FlowVariant::VolumeNormalized)
                        rec.volume_ode_residual = info.volume_before_projection - 1.0;
                    emit(r, rec);
                    if (cfg_.stationary_tol > 0.0) {
                        r.rhs_norm = rhs_max_norm(next, cfg_.variant);
                        stationary = r.rhs_norm <= cfg_.stationary_tol;
                    }
                }
                r.final_state = std::move(next);
                r.steps = k;
                if (cfg_.recenter && k % cfg_.recenter_cadence == 0) {
                    r.final_state = recenter(r.final_state, cfg_.recenter_tol).state;
                    ++r.recenterings;
                }
                if (cfg_.snapshot_cadence > 0 && k % cfg_.snapshot_cadence == 0 && hooks_.on_snapshot)
                    hooks_.on_snapshot(k, r.final_state);
                if (cfg_.checkpoint_cadence > 0 && k % cfg_.checkpoint_cadence == 0 && hooks_.on_checkpoint)
                    hooks_.on_checkpoint(checkpoint(r));
                if (stationary) {
                    r.reason = StopReason::Stationary;
                    break;
                }
            }
        } catch (const NumericalFailure& e) {
            r.reason = StopReason::NumericalFailure;
            r.message = e.what();
        }
        r.checkpoint = checkpoint(r);
        return r;
    }

    const FlowConfig& cfg_;
    const RunHooks& hooks_;
    DiagnosticsOptions opts_;
    std::vector<ScalarField> family_;
};

std::string step_name(long step) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%08ld", step);
    return buf;
}

const char* region_name(int flag) {
    switch (flag) {
        case 1: return "flux8pi only";
        case 2: return "flux2r0 only";
        case 3: return "flux8pi and flux2r0";
        default: return "none";
    }
}

}  // namespace

std::string to_string(StopReason r) {
    switch (r) {
        case StopReason::EndTime: return "end_time";
        case StopReason::Stationary: return "stationary";
        case StopReason::MaxSteps: return "max_steps";
        case StopReason::NumericalFailure: return "numerical_failure";
    }
    return "unknown";
}

FlowState initial_state(const FlowConfig& cfg) {
    validate(cfg);
    FlowState s;
    if (cfg.initial == InitialKind::Snapshot) {
        s = read_snapshot(cfg.snapshot);
        const auto res = s.bg().resolution();
        const auto want = cfg.resolution();
        if (s.bg().kind() != cfg.surface || res.n0 != want.n0 || res.n1 != want.n1)
            throw ConfigError("snapshot surface or dims differ from [surface]", 0, "snapshot");
        s.t = 0.0;
    } else {
        const GeometryPtr g = build_background(cfg.surface, cfg.resolution());
        ScalarField u, psi;
        if (cfg.initial == InitialKind::Random) {
            Rng rng(cfg.seed);
            u = cfg.u_amplitude * g->random_band_limited(rng, cfg.max_wavenumber);
            u += cfg.u_mean;
            psi = cfg.psi_amplitude * g->random_band_limited(rng, cfg.max_wavenumber);
            psi += cfg.psi_mean;
        } else {
            u = sum_modes(*g, cfg.u_mean, cfg.u_modes);
            psi = sum_modes(*g, cfg.psi_mean, cfg.psi_modes);
        }
        s = make_state(g, std::move(u), std::move(psi));
    }
    if (cfg.flux_target) s.psi += *cfg.flux_target - flux(s);
    if (cfg.variant == FlowVariant::VolumeNormalized) s = normalize_volume(s);
    return s;
}

double rhs_max_norm(const FlowState& s, FlowVariant variant) {
    const Rhs r = rhs(s, variant);
    return std::max(r.du_dt.max_abs(), r.dpsi_dt.max_abs());
}

RunResult run(const FlowConfig& cfg, const RunHooks& hooks) { return Driver(cfg, hooks).start(); }

RunResult resume(const FlowConfig& cfg, const Checkpoint& from, const RunHooks& hooks) {
    validate(cfg);
    return Driver(cfg, hooks).from(from);
}

RunResult run_with_output(const FlowConfig& cfg, const Checkpoint* from) {
    const fs::path dir(cfg.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory (" + ec.message() + ")", dir.string());
    write_text_file((dir / OutputLayout::config_echo).string(), config_to_text(cfg));

    const std::string csv_path = (dir / OutputLayout::csv).string();
    std::unique_ptr<CsvWriter> csv;
    if (from && fs::exists(csv_path))
        csv = std::make_unique<CsvWriter>(csv_path, from->rows);
    else
        csv = std::make_unique<CsvWriter>(csv_path);

    RunHooks hooks;
    hooks.on_record = [&](const DiagnosticsRecord& r) { csv->write(r); };
    hooks.on_snapshot = [&](long step, const FlowState& s) {
        write_snapshot((dir / OutputLayout::snapshots_dir / ("snapshot_" + step_name(step) + ".snap")).string(), s);
    };
    hooks.on_checkpoint = [&](const Checkpoint& c) {
        csv->flush();
        write_checkpoint((dir / OutputLayout::checkpoints_dir / ("checkpoint_" + step_name(c.step) + ".ckpt")).string(),
                         c);
    };
    RunResult r = from ? resume(cfg, *from, hooks) : run(cfg, hooks);
    csv->flush();
    csv.reset();

    write_snapshot((dir / OutputLayout::final_snapshot).string(), r.final_state);
    write_checkpoint((dir / OutputLayout::checkpoint).string(), r.checkpoint);
    if (cfg.plots) emit_plots((dir / OutputLayout::plots_dir).string(), read_csv(csv_path));
    write_text_file((dir / OutputLayout::summary).string(), run_summary(cfg, r));
    return r;
}

std::string run_summary(const FlowConfig& cfg, const RunResult& r) {
    std::ostringstream out;
    const FlowState& s = r.final_state;
    out << "stop_reason = " << to_string(r.reason) << '\n';
    if (!r.message.empty()) out << "message = " << r.message << '\n';
    out << "steps = " << r.steps << '\n';
    out << "t = " << format_17g(s.t) << '\n';
    out << "rows = " << r.rows << '\n';
    out << "recenterings = " << r.recenterings << '\n';
    if (!std::isnan(r.rhs_norm)) out << "rhs_max_norm = " << format_17g(r.rhs_norm) << '\n';
    try {
        auto opts = diag_options(cfg);
        // A final state that fails the eigen solve still gets the rest of the report.
        DiagnosticsRecord rec;
        try {
            rec = evaluate_diagnostics(nullptr, s, cfg.variant, {}, opts);
        } catch (const ConvergenceError&) {
            opts.eigenvalue = false;
            rec = evaluate_diagnostics(nullptr, s, cfg.variant, {}, opts);
        }
        out << "energy_F = " << format_17g(rec.energy_F) << '\n';
        out << "volume = " << format_17g(rec.volume) << '\n';
        out << "flux = " << format_17g(rec.flux) << '\n';
        out << "calabi = " << format_17g(rec.calabi) << '\n';
        out << "parallel_defect_int = " << format_17g(rec.parallel_defect_int) << '\n';
        out << "parallel_defect_sup = " << format_17g(rec.parallel_defect_sup) << '\n';
        out << "lambda = " << format_17g(rec.lambda_schrodinger) << '\n';
    } catch (const std::exception& e) {
        out << "final_diagnostics_error = " << e.what() << '\n';
    }
    const auto& tr = r.tracker;
    out << "min_volume = " << format_17g(tr.min_volume()) << " at t = " << format_17g(tr.t_at_min()) << '\n';
    out << "volume_threshold_flux8pi = " << format_17g(tr.flux8pi_threshold()) << '\n';
    out << "volume_threshold_flux2r0 = " << format_17g(tr.flux2r0_threshold()) << '\n';
    out << "threshold_region_now = " << region_name(tr.flag()) << '\n';
    out << "entered_flux8pi_region = " << (tr.entered_flux8pi_region() ? "yes" : "no") << '\n';
    out << "entered_flux2r0_region = " << (tr.entered_flux2r0_region() ? "yes" : "no") << '\n';
    out << "volume_decreases_in_flux8pi_region = " << tr.flux8pi_violations() << '\n';
    out << "volume_decreases_in_flux2r0_region = " << tr.flux2r0_violations() << '\n';
    return out.str();
}

}  // namespace rym
