// Command-line front end. Exit codes: 0 success, 1 usage or input error,
// 2 numerical failure (blow-up, stalled solver, rejected step).

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rymflow/errors.hpp"
#include "rymflow/io.hpp"
#include "rymflow/run.hpp"
#include "rymflow/soliton.hpp"
#include "rymflow/text_format.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kNumerical = 2;

std::string join(const std::vector<std::string>& v) {
    if (v.empty()) return "none";
    std::string out;
    for (const auto& s : v) out += (out.empty() ? "" : ",") + s;
    return out;
}

int finish_run(const rym::FlowConfig& cfg, const rym::RunResult& r) {
    std::cout << rym::run_summary(cfg, r);
    std::cout << "output_dir = " << cfg.output_dir << '\n';
    if (r.reason == rym::StopReason::NumericalFailure) {
        std::cerr << "stop reason: " << rym::to_string(r.reason) << ": " << r.message << '\n';
        return kNumerical;
    }
    std::cerr << "stop reason: " << rym::to_string(r.reason) << '\n';
    return kOk;
}

int flow_run(const std::string& config_path, const std::string& output_dir) {
    rym::FlowConfig cfg = rym::load_config(config_path);
    rym::apply_environment(cfg);
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    return finish_run(cfg, rym::run_with_output(cfg));
}

int flow_resume(const std::string& checkpoint_path, std::optional<double> t_end, const std::string& output_dir) {
    const rym::Checkpoint ckpt = rym::read_checkpoint(checkpoint_path);
    rym::FlowConfig cfg = rym::parse_config(ckpt.config_text);
    if (t_end) {
        cfg.t_end = *t_end;
        rym::validate(cfg);
    }
    rym::apply_environment(cfg);
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    return finish_run(cfg, rym::run_with_output(cfg, &ckpt));
}

rym::FlowVariant parse_variant(const std::string& v) {
    return v == "normalized" ? rym::FlowVariant::VolumeNormalized : rym::FlowVariant::Unnormalized;
}

int diag(const std::string& snapshot_path, const std::string& variant, bool eigenvalue, int sobolev_trials) {
    const rym::FlowState s = rym::read_snapshot(snapshot_path);
    rym::DiagnosticsOptions opts;
    opts.eigenvalue = eigenvalue;
    std::vector<rym::ScalarField> family;
    if (sobolev_trials > 0) family = rym::sobolev_family(s.bg(), sobolev_trials, 7, std::min(8, s.bg().max_wavenumber()));
    const auto rec = rym::evaluate_diagnostics(nullptr, s, parse_variant(variant), family, opts);
    std::cout << rym::csv_header() << '\n' << rym::csv_row(rec) << '\n';
    return kOk;
}

int spectrum(const std::string& snapshot_path, std::string out_path) {
    const rym::FlowState s = rym::read_snapshot(snapshot_path);
    const auto e = rym::lowest_eigenvalue(s);
    if (out_path.empty()) out_path = snapshot_path + ".eigen.snap";
    // The eigenfield goes in the u slot; psi is written as zeros.
    rym::FlowState field = rym::make_state(s.geometry, e.eigenfield, s.bg().constant(0.0), s.t);
    rym::write_snapshot(out_path, field);
    std::cout << "lambda = " << rym::format_17g(e.lambda) << '\n';
    std::cout << "residual = " << rym::format_17g(e.residual) << '\n';
    std::cout << "iterations = " << e.iterations << '\n';
    std::cout << "eigenfield = " << out_path << '\n';
    return kOk;
}

int soliton_check(const std::string& profile_path, double tol) {
    const rym::SolitonProfile p = rym::read_profile(profile_path);
    const auto v = rym::classify(p, tol);
    const auto fmt = [](double x) { return rym::format_17g(x); };
    std::cout << "verdict = " << (v.soliton ? "Soliton" : "NotSoliton") << '\n';
    std::cout << "tolerance = " << fmt(tol) << '\n';
    std::cout << "violated = " << join(v.violated) << '\n';
    std::cout << "conclusion_failures = " << join(v.conclusion_failures) << '\n';
    for (const auto* r : {&v.residuals.m1, &v.residuals.m2, &v.residuals.y1, &v.residuals.y2})
        std::cout << "residual_" << r->name << " = " << fmt(r->max_abs) << '\n';
    std::cout << "closure_defect = " << fmt(v.closure) << '\n';
    std::cout << "a = " << fmt(v.a.a) << '\n';
    std::cout << "a_numerator = " << fmt(v.a.numerator) << '\n';
    std::cout << "a_numerator_closed = " << fmt(v.a.symbolic_numerator) << '\n';
    std::cout << "a_denominator = " << fmt(v.a.denominator) << '\n';
    std::cout << "f_prime_minus_a_phi = " << fmt(v.f_prime_minus_a_phi) << '\n';
    std::cout << "psi_prime = " << fmt(v.psi_prime) << '\n';
    std::cout << "curvature_mean = " << fmt(v.curvature_mean) << '\n';
    std::cout << "curvature_variation = " << fmt(v.curvature_variation) << '\n';
    std::cout << "reduced_residual_psi2_over_phi2 = "
              << fmt(rym::reduced_residual(p, rym::ReducedForm::Consistent).max_abs) << '\n';
    std::cout << "reduced_residual_bare_psi = " << fmt(rym::reduced_residual(p, rym::ReducedForm::Printed).max_abs)
              << '\n';
    std::cout << "reading_F_zero_max_psi = " << fmt(v.psi_zero_reading) << '\n';
    std::cout << "reading_F_parallel_max_d_psi_over_phi = " << fmt(v.psi_parallel_reading) << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ricci Yang-Mills flow simulator on the flat torus and the round sphere"};
    app.require_subcommand(1);

    auto* flow = app.add_subcommand("flow", "run or resume a flow");
    flow->require_subcommand(1);
    std::string config_path, checkpoint_path, output_dir;
    auto* flow_run_cmd = flow->add_subcommand("run", "run a flow from a config file");
    flow_run_cmd->add_option("config", config_path, "config file")->required();
    flow_run_cmd->add_option("--output-dir", output_dir, "overrides output.dir and " + std::string(rym::kOutputDirEnv));
    auto* flow_resume_cmd = flow->add_subcommand("resume", "continue a run from a checkpoint");
    flow_resume_cmd->add_option("checkpoint", checkpoint_path, "checkpoint file")->required();
    std::optional<double> t_end;
    flow_resume_cmd->add_option("--t-end", t_end, "new end time");
    flow_resume_cmd->add_option("--output-dir", output_dir, "overrides output.dir and " + std::string(rym::kOutputDirEnv));

    std::string snapshot_path, variant = "unnormalized";
    bool no_eigen = false;
    int sobolev_trials = 16;
    auto* diag_cmd = app.add_subcommand("diag", "print one diagnostics record for a snapshot");
    diag_cmd->add_option("snapshot", snapshot_path, "snapshot file")->required();
    diag_cmd->add_option("--variant", variant, "flow variant for the dissipation")
        ->check(CLI::IsMember({"unnormalized", "normalized"}));
    diag_cmd->add_flag("--no-eigenvalue", no_eigen, "skip the eigenvalue solve");
    diag_cmd->add_option("--sobolev-trials", sobolev_trials, "test fields for the Sobolev monitor")
        ->check(CLI::NonNegativeNumber);

    std::string spectrum_out;
    auto* spectrum_cmd = app.add_subcommand("spectrum", "lowest eigenvalue of the Schroedinger operator");
    spectrum_cmd->add_option("snapshot", snapshot_path, "snapshot file")->required();
    spectrum_cmd->add_option("--out", spectrum_out, "eigenfield snapshot path (default <snapshot>.eigen.snap)");

    std::string profile_path;
    double tol = 1e-8;
    auto* soliton = app.add_subcommand("soliton", "rotationally symmetric soliton checks");
    soliton->require_subcommand(1);
    auto* check_cmd = soliton->add_subcommand("check", "classify a soliton profile");
    check_cmd->add_option("profile", profile_path, "profile file")->required();
    check_cmd->add_option("--tol", tol, "residual tolerance")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return kUsage;
    }

    try {
        if (flow_run_cmd->parsed()) return flow_run(config_path, output_dir);
        if (flow_resume_cmd->parsed()) return flow_resume(checkpoint_path, t_end, output_dir);
        if (diag_cmd->parsed()) return diag(snapshot_path, variant, !no_eigen, sobolev_trials);
        if (spectrum_cmd->parsed()) return spectrum(snapshot_path, spectrum_out);
        if (check_cmd->parsed()) return soliton_check(profile_path, tol);
    } catch (const rym::NumericalFailure& e) {
        std::cerr << "stop reason: numerical_failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
    std::cerr << app.help();
    return kUsage;
}
