// Acceptance checks. One PASS/FAIL line per criterion; exit 1 if any fails.
// Usage: rymflow_acceptance [source_dir] (configs/ and profiles/ are read from it).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "rymflow/diagnostics.hpp"
#include "rymflow/errors.hpp"
#include "rymflow/io.hpp"
#include "rymflow/mobius_gauge.hpp"
#include "rymflow/run.hpp"
#include "rymflow/soliton.hpp"

using namespace rym;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;
fs::path g_source = ".";

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "[failed: " << what << "] ";
        }
    }
};

double norm3(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

FlowConfig base_config(SurfaceKind kind, FlowVariant variant, std::uint64_t seed) {
    FlowConfig c;
    c.surface = kind;
    c.n = 64;
    c.n_lat = 32;
    c.n_lon = 64;
    c.variant = variant;
    c.seed = seed;
    c.u_amplitude = 0.3;
    c.psi_amplitude = 0.5;
    c.flux_target = kind == SurfaceKind::Torus ? 1.0 : 6.0;
    c.stationary_tol = 0.0;
    c.sobolev_trials = 0;
    c.eigenvalue = false;
    c.plots = false;
    return c;
}

// Per-step energy, volume and (optionally) eigenvalue series of one run.
struct Series {
    std::string label;
    FlowVariant variant;
    std::vector<double> energy, volume, lambda;
};

Series observe_run(const FlowConfig& c, long steps, bool with_lambda, const std::string& label) {
    FlowConfig cfg = c;
    cfg.max_steps = steps;
    cfg.t_end = 1e3;
    Series s{label, c.variant, {}, {}, {}};
    const auto record = [&](const FlowState& st) {
        s.energy.push_back(energy_functional(st));
        s.volume.push_back(volume(st));
        if (with_lambda) s.lambda.push_back(lowest_eigenvalue(st).lambda);
    };
    RunHooks h;
    bool first = true;
    h.on_step = [&](long, const FlowState& prev, const FlowState& next, const StepInfo&) {
        if (first) record(prev);
        first = false;
        record(next);
    };
    const RunResult r = run(cfg, h);
    if (r.reason == StopReason::NumericalFailure) throw NumericalFailure(label + ": " + r.message);
    return s;
}

// The suite shared by the energy, volume and eigenvalue criteria.
const std::vector<Series>& suite() {
    static const std::vector<Series> runs = [] {
        std::vector<Series> out;
        for (std::uint64_t seed = 1; seed <= 5; ++seed)
            for (auto v : {FlowVariant::Unnormalized, FlowVariant::VolumeNormalized})
                out.push_back(observe_run(base_config(SurfaceKind::Torus, v, seed), 200, v == FlowVariant::Unnormalized,
                                          "torus seed " + std::to_string(seed)));
        for (std::uint64_t seed = 1; seed <= 2; ++seed)
            for (auto v : {FlowVariant::Unnormalized, FlowVariant::VolumeNormalized})
                out.push_back(observe_run(base_config(SurfaceKind::Sphere, v, seed), 200,
                                          v == FlowVariant::Unnormalized, "sphere seed " + std::to_string(seed)));
        return out;
    }();
    return runs;
}

FlowState smooth_state(const GeometryPtr& g, std::uint64_t seed, double au, double ap, double mean_psi, int k = 4) {
    Rng rng(seed);
    auto u = g->random_band_limited(rng, k);
    u *= au;
    auto psi = g->random_band_limited(rng, k);
    psi *= ap;
    psi += mean_psi;
    return make_state(g, u, psi);
}

// Centered difference of the energy over [s0, s2] minus the predicted rate at s1.
double dissipation_residual(const FlowState& s0, double h, FlowVariant variant) {
    StepOptions no_proj;
    no_proj.project_volume = false;
    const FlowState s1 = step(s0, h, variant, Scheme::RK4Explicit, no_proj);
    const FlowState s2 = step(s1, h, variant, Scheme::RK4Explicit, no_proj);
    const double meas = (energy_functional(s2) - energy_functional(s0)) / (2 * h);
    return std::abs(meas - dissipation(s1, variant).predicted);
}

void energy_monotonicity(Verdict& v) {
    double worst = -1e300;
    for (const auto& s : suite()) {
        for (std::size_t i = 1; i < s.energy.size(); ++i) {
            const double excess = (s.energy[i] - s.energy[i - 1]) / (1 + std::abs(s.energy[i - 1]));
            worst = std::max(worst, excess);
        }
    }
    v.require(worst <= 1e-10, "energy increase");
    v.detail << suite().size() << " runs x 200 steps, max relative energy increase " << worst << "; ";

    // Dissipation identity residual at dt = 4e-5, 2e-5, 1e-5. The torus uses 32^2
    // so that 4e-5 is inside the RK4 stability limit.
    for (auto g : {build_background(SurfaceKind::Torus, {32, 32}), build_background(SurfaceKind::Sphere, {32, 64})}) {
        for (auto variant : {FlowVariant::Unnormalized, FlowVariant::VolumeNormalized}) {
            const FlowState s0 = normalize_volume(smooth_state(g, 21, 0.3, 0.6, 1.0, 3));
            const double e1 = dissipation_residual(s0, 4e-5, variant);
            const double e2 = dissipation_residual(s0, 2e-5, variant);
            const double e3 = dissipation_residual(s0, 1e-5, variant);
            const double r1 = e1 / e2, r2 = e2 / e3;
            v.require(r1 > 3.5 && r1 < 4.5 && r2 > 3.5 && r2 < 4.5, "dissipation residual not O(dt^2)");
            v.detail << to_string(g->kind()) << (variant == FlowVariant::Unnormalized ? " unnorm" : " norm")
                     << " residual ratios " << r1 << ", " << r2 << "; ";
        }
    }
}

void conservation(Verdict& v) {
    // Flux drift on the torus over t = 0.1.
    {
        FlowConfig c = base_config(SurfaceKind::Torus, FlowVariant::Unnormalized, 3);
        c.t_end = 0.1;
        const FlowState s0 = initial_state(c);
        const RunResult r = run(c);
        const double drift = std::abs(flux(r.final_state) - flux(s0)) / r.final_state.t;
        v.require(drift <= 1e-10, "torus flux drift");
        v.detail << "torus flux drift per unit time " << drift << "; ";
        std::vector<ScalarField> none;
        DiagnosticsOptions opts;
        opts.eigenvalue = false;
        const auto rec = evaluate_diagnostics(nullptr, r.final_state, c.variant, none, opts);
        v.require(std::abs(rec.gauss_bonnet_residual) <= 1e-9, "torus Gauss-Bonnet");
        v.detail << "torus Gauss-Bonnet residual " << rec.gauss_bonnet_residual << "; ";
    }
    // Sphere Gauss-Bonnet under refinement for a fixed smooth field.
    {
        std::vector<double> res;
        for (int nlat : {8, 16, 32}) {
            auto g = build_background(SurfaceKind::Sphere, {nlat, 2 * nlat});
            auto u = g->sample_embedded([](const Vec3& x) { return 0.3 * std::exp(x[2]) - 0.2 * x[0] * x[1]; });
            const FlowState s = make_state(g, u, g->constant(1.0));
            std::vector<ScalarField> none;
            DiagnosticsOptions opts;
            opts.eigenvalue = false;
            res.push_back(std::abs(evaluate_diagnostics(nullptr, s, FlowVariant::Unnormalized, none, opts).gauss_bonnet_residual));
        }
        // Second order, or already at rounding level.
        bool ok = true;
        for (std::size_t i = 1; i < res.size(); ++i) ok = ok && (res[i] <= res[i - 1] / 3.5 || res[i] <= 1e-12);
        v.require(ok, "sphere Gauss-Bonnet refinement");
        v.detail << "sphere Gauss-Bonnet residual at 8/16/32 rings " << res[0] << ", " << res[1] << ", " << res[2]
                 << "; ";
    }
    // Volume drift of a normalized run over t = 10 (torus 32^2 to bound the runtime).
    {
        FlowConfig c = base_config(SurfaceKind::Torus, FlowVariant::VolumeNormalized, 4);
        c.n = 32;
        c.t_end = 10.0;
        c.diag_cadence = 100000;
        double worst_pre = 0.0;
        RunHooks h;
        h.on_step = [&](long, const FlowState&, const FlowState&, const StepInfo& info) {
            worst_pre = std::max(worst_pre, std::abs(info.volume_before_projection - 1.0));
        };
        const RunResult r = run(c, h);
        const double drift = std::abs(volume(r.final_state) - 1.0);
        v.require(r.reason == StopReason::EndTime && drift <= 1e-6, "normalized volume drift");
        v.detail << "normalized volume drift over t = " << r.final_state.t << ": " << drift
                 << " (largest single-step drift before projection " << worst_pre << ")";
    }
}

FlowConfig load(const std::string& name) {
    FlowConfig c = load_config((g_source / "configs" / name).string());
    c.plots = false;
    return c;
}

void torus_convergence(Verdict& v) {
    const FlowConfig c = load("torus_normalized.cfg");
    const RunResult r = run(c);
    const double cal = calabi_energy(r.final_state);
    const double pd = parallel_defect(r.final_state).integral;
    v.require(r.reason == StopReason::Stationary, "stop reason " + to_string(r.reason));
    v.require(cal <= 1e-8, "calabi");
    v.require(pd <= 1e-8, "parallel defect");
    v.detail << "stop " << to_string(r.reason) << " at t = " << r.final_state.t << " after " << r.steps
             << " steps; calabi " << cal << ", parallel_defect " << pd;
}

void sphere_convergence(Verdict& v) {
    const FlowConfig c = load("sphere_recenter.cfg");
    std::vector<DiagnosticsRecord> rows;
    RunHooks h;
    h.on_record = [&](const DiagnosticsRecord& r) { rows.push_back(r); };
    const RunResult r = run(c, h);
    v.require(r.reason != StopReason::NumericalFailure, "run failed: " + r.message);
    // Transient: the first 0.1 time units.
    std::size_t start = 0;
    while (start < rows.size() && rows[start].t < 0.1) ++start;
    int rises_cal = 0, rises_pd = 0;
    for (std::size_t i = start + 1; i < rows.size(); ++i) {
        rises_cal += rows[i].calabi > rows[i - 1].calabi;
        rises_pd += rows[i].parallel_defect_int > rows[i - 1].parallel_defect_int;
    }
    v.require(rises_cal == 0 && rises_pd == 0, "non-monotone after transient");
    const double cal = calabi_energy(r.final_state);
    const ParallelDefect pd = parallel_defect(r.final_state);
    v.require(cal <= 1e-6 && pd.integral <= 1e-6, "final defects");
    const RecenterResult rc = recenter(r.final_state, 1e-10);
    ScalarField u = rc.state.u;
    u += -rc.state.bg().integrate(u);
    v.require(u.max_abs() <= 1e-4, "distance to round metric");
    v.detail << "stop " << to_string(r.reason) << " at t = " << r.final_state.t << ", " << r.recenterings
             << " recenterings; rises after t = 0.1: calabi " << rises_cal << ", parallel_defect " << rises_pd
             << "; final calabi " << cal << ", parallel_defect " << pd.integral << ", max|u - mean| " << u.max_abs();
}

std::vector<double> record_values(const DiagnosticsRecord& r) {
    return {r.energy_F,        r.dissipation_pred,     r.volume,           r.flux,
            r.calabi,          r.gauss_bonnet_residual, r.lambda_schrodinger, r.parallel_defect_int,
            r.parallel_defect_sup, r.moser_trudinger_k, r.sobolev_proxy};
}

void round_fixed_point(Verdict& v) {
    FlowConfig c = load("sphere_round.cfg");
    c.max_steps = 1000;
    c.t_end = 1e3;
    c.diag_cadence = 1000;
    c.sobolev_trials = 4;
    const FlowState s0 = initial_state(c);
    const double rhs0 = rhs_max_norm(s0, c.variant);
    v.require(rhs0 <= 1e-9, "rhs at the round state");
    std::vector<DiagnosticsRecord> rows;
    RunHooks h;
    h.on_record = [&](const DiagnosticsRecord& r) { rows.push_back(r); };
    const RunResult r = run(c, h);
    v.require(r.steps == 1000 && rows.size() == 2, "run length");
    double worst = 0.0;
    if (rows.size() == 2) {
        const auto a = record_values(rows.front()), b = record_values(rows.back());
        for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    }
    v.require(worst <= 1e-8, "diagnostic drift");
    v.detail << "max|rhs| " << rhs0 << "; largest diagnostic change over " << r.steps << " steps " << worst;
}

void volume_ode(Verdict& v) {
    auto g = build_background(SurfaceKind::Torus, {32, 32});
    const FlowState s0 = make_state(g, g->constant(0.0), g->constant(1.0));
    const double rate = volume_rate(s0);
    v.require(std::abs(rate - 1.0) <= 1e-14, "volume rate");
    // Centered difference over two RK4 steps against the rate at the midpoint.
    std::vector<double> res;
    for (double h : {4e-5, 2e-5, 1e-5}) {
        const FlowState s1 = step(s0, h, FlowVariant::Unnormalized, Scheme::RK4Explicit);
        const FlowState s2 = step(s1, h, FlowVariant::Unnormalized, Scheme::RK4Explicit);
        res.push_back(std::abs((volume(s2) - volume(s0)) / (2 * h) - volume_rate(s1)));
    }
    const double d0 = (volume(step(s0, 1e-5, FlowVariant::Unnormalized, Scheme::RK4Explicit)) - 1.0) / 1e-5;
    bool second = true;
    for (std::size_t i = 1; i < res.size(); ++i) second = second && (res[i] <= res[i - 1] / 3.5 || res[i] <= 1e-10);
    v.require(second, "centered residual not O(dt^2)");
    v.require(std::abs(d0 - 1.0) <= 2e-5, "forward difference");

    int decreases = 0, runs = 0;
    for (const auto& s : suite()) {
        if (s.variant != FlowVariant::Unnormalized || s.label.rfind("torus", 0) != 0) continue;
        ++runs;
        for (std::size_t i = 1; i < s.volume.size(); ++i) decreases += !(s.volume[i] > s.volume[i - 1]);
    }
    v.require(decreases == 0, "volume not strictly increasing");
    v.detail << "rate at u = 0, psi = 1: " << rate << "; forward difference at dt = 1e-5: " << d0
             << "; centered residuals " << res[0] << ", " << res[1] << ", " << res[2] << "; " << runs
             << " unnormalized torus runs, non-increasing steps " << decreases;
}

void volume_floor(Verdict& v) {
    int violations = 0;
    for (double f : {4.0, 6.0, 8.0}) {
        FlowConfig c = base_config(SurfaceKind::Sphere, FlowVariant::Unnormalized, 9);
        c.n_lat = 16;
        c.n_lon = 32;
        c.flux_target = f;
        c.t_end = 0.05;
        const RunResult r = run(c);
        v.require(r.reason == StopReason::EndTime, "run failed: " + r.message);
        const auto& t = r.tracker;
        if (t.entered_flux8pi_region()) violations += t.flux8pi_violations();
        if (t.entered_flux2r0_region()) violations += t.flux2r0_violations();
        v.detail << "flux " << f << ": thresholds flux8pi " << t.flux8pi_threshold() << " flux2r0 "
                 << t.flux2r0_threshold() << ", entered " << t.entered_flux8pi_region() << "/"
                 << t.entered_flux2r0_region() << ", violations " << t.flux8pi_violations() << "/"
                 << t.flux2r0_violations() << ", final flag " << t.flag() << "; ";
        const std::string summary = run_summary(c, r);
        v.require(summary.find("volume_threshold_flux8pi") != std::string::npos &&
                      summary.find("volume_threshold_flux2r0") != std::string::npos &&
                      summary.find("threshold_region_now") != std::string::npos,
                  "report lacks the thresholds");
    }
    v.require(violations == 0, "volume decreased inside a reported region");
}

void eigenvalue_flow(Verdict& v) {
    int runs = 0, against = 0;
    double worst = 0.0;
    for (const auto& s : suite()) {
        if (s.lambda.size() < 2) continue;
        ++runs;
        // Direction taken from the run itself; any step against it beyond tolerance fails.
        const double dir = s.lambda.back() >= s.lambda.front() ? 1.0 : -1.0;
        for (std::size_t i = 1; i < s.lambda.size(); ++i) {
            const double back = -dir * (s.lambda[i] - s.lambda[i - 1]) / (1 + std::abs(s.lambda[i - 1]));
            worst = std::max(worst, back);
        }
        if (dir > 0) v.detail << s.label << " increasing; ";
        else v.detail << s.label << " decreasing; ";
        against += dir < 0;
    }
    v.require(worst <= 1e-8, "lambda not monotone");
    auto t = build_background(SurfaceKind::Torus, {64, 64});
    const double lt = lowest_eigenvalue(make_state(t, t->constant(0.0), t->constant(1.0))).lambda;
    auto sp = build_background(SurfaceKind::Sphere, {32, 64});
    const double ls = lowest_eigenvalue(make_state(sp, sp->constant(0.0), sp->constant(0.0))).lambda;
    v.require(std::abs(lt + 0.5) <= 1e-8, "torus constant potential");
    v.require(std::abs(ls - 8 * pi) <= 1e-8, "sphere constant potential");
    v.detail << runs << " unnormalized runs, " << against << " decreasing, largest relative step against direction "
             << worst << "; torus c = 1: " << lt << ", sphere: " << ls;
}

void soliton_classification(Verdict& v) {
    const auto dir = g_source / "profiles";
    const SolitonProfile round = read_profile((dir / "round_sphere.prof").string());
    const SolitonVerdict r = classify(round, 1e-8);
    v.require(round.r.size() == 2048, "node count");
    v.require(r.soliton, "round sphere rejected");
    v.require(std::abs(r.a.a) <= 1e-10, "a");
    v.require(r.psi_prime <= 1e-8, "psi'");
    v.detail << "round sphere: " << (r.soliton ? "Soliton" : "NotSoliton") << ", max residual "
             << std::max({r.residuals.m1.max_abs, r.residuals.m2.max_abs, r.residuals.y1.max_abs,
                          r.residuals.y2.max_abs})
             << ", a " << r.a.a << ", max|psi'| " << r.psi_prime << "; ";
    for (const char* name : {"perturbed_warp.prof", "parabolic_warp.prof", "proportional_curvature.prof"}) {
        const SolitonVerdict n = classify(read_profile((dir / name).string()), 1e-8);
        v.require(!n.soliton && !n.violated.empty(), std::string(name) + " not rejected by a named residual");
        v.detail << name << " violates";
        for (const auto& s : n.violated) v.detail << ' ' << s;
        v.detail << "; ";
    }
}

void moebius_gauge(Verdict& v) {
    auto g = build_background(SurfaceKind::Sphere, {32, 64});
    const FlowState z = make_state(g, g->sample_embedded([](const Vec3& p) { return 0.2 * p[2]; }), g->constant(1.0));
    const RecenterResult rz = recenter(z, 1e-10);
    const double com = norm3(center_of_mass(rz.state));
    v.require(com <= 1e-10, "center of mass");

    const FlowState s = smooth_state(g, 12, 0.3, 1.0, 2.0);
    const FlowState p = pullback(s, MoebiusParam({0.3, 0.0, 0.0}));
    const double de = std::abs(energy_functional(p) - energy_functional(s));
    const double dv = std::abs(volume(p) - volume(s));
    const double df = std::abs(flux(p) - flux(s));
    const double dc = std::abs(calabi_energy(p) - calabi_energy(s));
    v.require(std::max({de, dv, df, dc}) <= 1e-6, "pullback invariance");

    // recenter returns the map that undoes b0, i.e. the parameter -b0.
    const Vec3 b0{0.4, 0.0, 0.0};
    const RecenterResult rb = recenter(pullback(make_state(g, g->constant(0.0), g->constant(0.0)), MoebiusParam(b0)), 1e-10);
    double err = 0.0;
    for (int k = 0; k < 3; ++k) err = std::max(err, std::abs(-rb.param.b()[k] - b0[k]));
    v.require(err <= 1e-6, "b0 recovery");
    v.detail << "recentered |center of mass| " << com << "; pullback changes: energy " << de << ", volume " << dv
             << ", flux " << df << ", calabi " << dc << "; recovered b0 error " << err;
}

void stress_identity(Verdict& v) {
    for (auto g : {build_background(SurfaceKind::Torus, {64, 64}), build_background(SurfaceKind::Sphere, {32, 64})}) {
        double worst = 0.0;
        for (std::uint64_t seed = 0; seed < 100; ++seed)
            worst = std::max(worst, stress_identity_residual(smooth_state(g, 1000 + seed, 0.5, 1.0, 0.5)));
        v.require(worst <= 1e-12, "stress identity on " + to_string(g->kind()));
        v.detail << to_string(g->kind()) << " max residual over 100 states " << worst << "; ";
    }
}

std::string file(const fs::path& p) { return read_text_file(p.string()); }

void determinism(Verdict& v) {
    const fs::path root = fs::temp_directory_path() / "rymflow_acceptance";
    for (SurfaceKind kind : {SurfaceKind::Torus, SurfaceKind::Sphere}) {
        FlowConfig c = base_config(kind, FlowVariant::VolumeNormalized, 2);
        c.n = 32;
        c.n_lat = 16;
        c.n_lon = 32;
        c.flux_target = kind == SurfaceKind::Torus ? 1.0 : std::sqrt(8 * pi);
        c.recenter = kind == SurfaceKind::Sphere;
        c.recenter_cadence = 25;
        c.t_end = 0.02;
        c.diag_cadence = 10;
        c.checkpoint_cadence = 50;
        c.snapshot_cadence = 50;
        c.eigenvalue = true;
        c.sobolev_trials = 4;
        fs::remove_all(root);
        c.output_dir = (root / "a").string();
        run_with_output(c);
        FlowConfig d = c;
        d.output_dir = (root / "b").string();
        run_with_output(d);
        bool same = true;
        for (const char* f : {OutputLayout::csv, OutputLayout::final_snapshot, OutputLayout::summary})
            same = same && file(root / "a" / f) == file(root / "b" / f);
        v.require(same, "repeat run differs on " + to_string(kind));

        FlowConfig half = c;
        half.t_end = c.t_end / 2;
        half.output_dir = (root / "split").string();
        run_with_output(half);
        const Checkpoint ck = read_checkpoint((root / "split" / OutputLayout::checkpoint).string());
        FlowConfig rest = parse_config(ck.config_text);
        rest.t_end = c.t_end;
        run_with_output(rest, &ck);
        const bool resumed = file(root / "split" / OutputLayout::csv) == file(root / "a" / OutputLayout::csv) &&
                             file(root / "split" / OutputLayout::final_snapshot) ==
                                 file(root / "a" / OutputLayout::final_snapshot);
        v.require(resumed, "resume differs on " + to_string(kind));
        v.detail << to_string(kind) << ": repeat " << (same ? "identical" : "differs") << ", resume "
                 << (resumed ? "identical" : "differs") << "; ";
    }
    fs::remove_all(root);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) g_source = argv[1];
    const std::vector<std::pair<std::string, std::function<void(Verdict&)>>> criteria = {
        {"energy monotonicity and dissipation identity", energy_monotonicity},
        {"conservation", conservation},
        {"torus convergence to constant curvature", torus_convergence},
        {"sphere convergence to the round metric", sphere_convergence},
        {"round fixed point", round_fixed_point},
        {"volume ODE", volume_ode},
        {"volume floor", volume_floor},
        {"eigenvalue monotonicity and constant potentials", eigenvalue_flow},
        {"soliton classification", soliton_classification},
        {"Moebius gauge", moebius_gauge},
        {"stress identity", stress_identity},
        {"determinism and resume equivalence", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            criteria[i].second(v);
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail << "[exception: " << e.what() << "]";
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += !v.pass;
        std::printf("%s %2zu %s (%.1f s): %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), secs,
                    v.detail.str().c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
