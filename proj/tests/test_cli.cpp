#include "doctest.h"

#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {
const fs::path kScratch = fs::temp_directory_path() / "rymflow_test_cli";

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome cli(const std::string& args) {
    fs::create_directories(kScratch);
    const fs::path out = kScratch / "stdout", err = kScratch / "stderr";
    const std::string cmd = std::string(RYMFLOW_BIN) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

fs::path write_config(const std::string& name, const std::string& text) {
    fs::create_directories(kScratch);
    const fs::path p = kScratch / name;
    std::ofstream(p) << text;
    return p;
}

const std::string kSmall =
    "[surface]\nkind = torus\nn = 16\n[flow]\nvariant = unnormalized\nt_end = 0.005\n"
    "[initial]\nflux_target = 1\n[output]\ndiag_cadence = 10\nplots = false\n";
}  // namespace

TEST_CASE("usage errors exit 1") {
    auto r = cli("bogus");
    CHECK(r.code == 1);
    CHECK(r.err.find("Usage") != std::string::npos);
    CHECK(cli("").code == 1);
    CHECK(cli("flow").code == 1);
    CHECK(cli("flow run").code == 1);
    CHECK(cli("flow run /nonexistent.cfg").code == 1);
    const auto bad = write_config("bad.cfg", "[surface]\nkind = torus\ncolour = red\n");
    r = cli("flow run " + bad.string());
    CHECK(r.code == 1);
    CHECK(r.err.find("line 3") != std::string::npos);
    CHECK(cli("--help").code == 0);
}

TEST_CASE("flow run and resume") {
    const auto cfg = write_config("small.cfg", kSmall);
    const fs::path dir = kScratch / "run_out";
    fs::remove_all(dir);
    auto r = cli("flow run " + cfg.string() + " --output-dir " + dir.string());
    CHECK(r.code == 0);
    CHECK(r.out.find("calabi = ") != std::string::npos);
    CHECK(r.err.find("stop reason: end_time") != std::string::npos);
    CHECK(fs::exists(dir / "diagnostics.csv"));
    CHECK(fs::exists(dir / "final.snap"));

    r = cli("flow resume " + (dir / "checkpoint.ckpt").string() + " --t-end 0.01 --output-dir " + dir.string());
    CHECK(r.code == 0);
    CHECK(r.out.find("steps = 100") != std::string::npos);

    // The environment variable redirects output when no flag is given.
    const fs::path env_dir = kScratch / "env_out";
    fs::remove_all(env_dir);
    const std::string env_cmd = "RYMFLOW_OUTPUT_DIR=" + env_dir.string() + " " + std::string(RYMFLOW_BIN) +
                                " flow run " + cfg.string() + " >/dev/null 2>&1";
    CHECK(std::system(env_cmd.c_str()) == 0);
    CHECK(fs::exists(env_dir / "diagnostics.csv"));
}

TEST_CASE("numerical failure exits 2 with the stop reason") {
    const auto cfg = write_config("blowup.cfg", kSmall + "[stepper]\nblowup_u = 0.01\n");
    const auto r = cli("flow run " + cfg.string() + " --output-dir " + (kScratch / "blowup_out").string());
    CHECK(r.code == 2);
    CHECK(r.err.find("numerical_failure") != std::string::npos);
}

TEST_CASE("diag, spectrum and soliton check") {
    const auto cfg = write_config("small2.cfg", kSmall);
    const fs::path dir = kScratch / "diag_out";
    fs::remove_all(dir);
    REQUIRE(cli("flow run " + cfg.string() + " --output-dir " + dir.string()).code == 0);
    const std::string snap = (dir / "final.snap").string();

    auto r = cli("diag " + snap);
    CHECK(r.code == 0);
    CHECK(r.out.rfind("t,energy_F,", 0) == 0);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 2);

    r = cli("spectrum " + snap + " --out " + (kScratch / "eig.snap").string());
    CHECK(r.code == 0);
    CHECK(r.out.find("lambda = ") != std::string::npos);
    CHECK(fs::exists(kScratch / "eig.snap"));

    r = cli("soliton check " + std::string(RYMFLOW_SOURCE_DIR) + "/profiles/round_sphere.prof");
    CHECK(r.code == 0);
    CHECK(r.out.find("verdict = Soliton\n") != std::string::npos);
    CHECK(r.out.find("reduced_residual_bare_psi = ") != std::string::npos);
    CHECK(r.out.find("reading_F_parallel") != std::string::npos);

    r = cli("soliton check " + std::string(RYMFLOW_SOURCE_DIR) + "/profiles/proportional_curvature.prof");
    CHECK(r.code == 0);
    CHECK(r.out.find("verdict = NotSoliton\n") != std::string::npos);
    CHECK(r.out.find("Y1") != std::string::npos);

    CHECK(cli("diag /nonexistent.snap").code == 1);
}
