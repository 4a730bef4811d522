#include "rymflow/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "rymflow/errors.hpp"
#include "rymflow/text_format.hpp"

namespace rym {

namespace {

[[noreturn]] void fail_line(int line, const std::string& key, const std::string& what) {
    std::ostringstream msg;
    msg << "config line " << line << ": " << what;
    throw ConfigError(msg.str(), line, key);
}

[[noreturn]] void fail_key(const std::string& key, const std::string& what) {
    throw ConfigError("config key '" + key + "': " + what, 0, key);
}

struct Ctx {
    int line;
    std::string key;
};

double as_double(std::string_view v, const Ctx& c) {
    const auto d = parse_double(v);
    if (!d || !std::isfinite(*d)) fail_line(c.line, c.key, "expected a finite number for '" + c.key + "'");
    return *d;
}

long as_long(std::string_view v, const Ctx& c) {
    const auto d = parse_long(v);
    if (!d) fail_line(c.line, c.key, "expected an integer for '" + c.key + "'");
    return *d;
}

int as_int(std::string_view v, const Ctx& c) {
    const long l = as_long(v, c);
    if (l < std::numeric_limits<int>::min() || l > std::numeric_limits<int>::max())
        fail_line(c.line, c.key, "integer out of range for '" + c.key + "'");
    return static_cast<int>(l);
}

std::uint64_t as_u64(std::string_view v, const Ctx& c) {
    const auto d = parse_u64(v);
    if (!d) fail_line(c.line, c.key, "expected a non-negative integer for '" + c.key + "'");
    return *d;
}

bool as_bool(std::string_view v, const Ctx& c) {
    if (v == "true") return true;
    if (v == "false") return false;
    fail_line(c.line, c.key, "expected true or false for '" + c.key + "'");
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

std::vector<ModeTerm> as_modes(std::string_view v, const Ctx& c) {
    std::vector<ModeTerm> out;
    if (v == "none") return out;
    std::size_t start = 0;
    while (start <= v.size()) {
        const std::size_t end = std::min(v.find(';', start), v.size());
        const auto item = trim(v.substr(start, end - start));
        start = end + 1;
        if (item.empty()) {
            if (end == v.size()) break;
            fail_line(c.line, c.key, "empty mode term in '" + c.key + "'");
        }
        std::istringstream in{std::string(item)};
        std::string a, b, cc, s, extra;
        if (!(in >> a >> b >> cc >> s) || (in >> extra))
            fail_line(c.line, c.key, "mode terms are 'a b c s' separated by ';' in '" + c.key + "'");
        out.push_back({as_int(a, c), as_int(b, c), as_double(cc, c), as_double(s, c)});
    }
    return out;
}

std::string modes_text(const std::vector<ModeTerm>& m) {
    if (m.empty()) return "none";
    std::string out;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (i) out += "; ";
        out += std::to_string(m[i].a) + " " + std::to_string(m[i].b) + " " + format_shortest(m[i].c) + " " +
               format_shortest(m[i].s);
    }
    return out;
}

struct KeySpec {
    std::string section;
    std::string key;
    std::function<void(FlowConfig&, std::string_view, const Ctx&)> set;
    std::function<std::string(const FlowConfig&)> get;
};

#define RYM_DOUBLE(sec, name, member)                                                          \
    KeySpec{sec, name, [](FlowConfig& f, std::string_view v, const Ctx& c) { f.member = as_double(v, c); }, \
            [](const FlowConfig& f) { return format_shortest(f.member); }}
#define RYM_INT(sec, name, member)                                                          \
    KeySpec{sec, name, [](FlowConfig& f, std::string_view v, const Ctx& c) { f.member = as_int(v, c); }, \
            [](const FlowConfig& f) { return std::to_string(f.member); }}
#define RYM_BOOL(sec, name, member)                                                          \
    KeySpec{sec, name, [](FlowConfig& f, std::string_view v, const Ctx& c) { f.member = as_bool(v, c); }, \
            [](const FlowConfig& f) { return bool_text(f.member); }}
#define RYM_U64(sec, name, member)                                                          \
    KeySpec{sec, name, [](FlowConfig& f, std::string_view v, const Ctx& c) { f.member = as_u64(v, c); }, \
            [](const FlowConfig& f) { return std::to_string(f.member); }}

const std::vector<KeySpec>& key_table() {
    static const std::vector<KeySpec> table = {
        {"surface", "kind",
         [](FlowConfig& f, std::string_view v, const Ctx& c) {
             if (v == "torus")
                 f.surface = SurfaceKind::Torus;
             else if (v == "sphere")
                 f.surface = SurfaceKind::Sphere;
             else
                 fail_line(c.line, c.key, "surface kind must be torus or sphere");
         },
         [](const FlowConfig& f) { return to_string(f.surface); }},
        RYM_INT("surface", "n", n),
        RYM_INT("surface", "n_lat", n_lat),
        RYM_INT("surface", "n_lon", n_lon),

        {"flow", "variant",
         [](FlowConfig& f, std::string_view v, const Ctx& c) {
             if (v == "normalized")
                 f.variant = FlowVariant::VolumeNormalized;
             else if (v == "unnormalized")
                 f.variant = FlowVariant::Unnormalized;
             else
                 fail_line(c.line, c.key, "variant must be normalized or unnormalized");
         },
         [](const FlowConfig& f) {
             return std::string(f.variant == FlowVariant::VolumeNormalized ? "normalized" : "unnormalized");
         }},
        RYM_DOUBLE("flow", "t_end", t_end),

        {"initial", "kind",
         [](FlowConfig& f, std::string_view v, const Ctx& c) {
             if (v == "random")
                 f.initial = InitialKind::Random;
             else if (v == "modes")
                 f.initial = InitialKind::Modes;
             else if (v == "snapshot")
                 f.initial = InitialKind::Snapshot;
             else
                 fail_line(c.line, c.key, "initial kind must be random, modes or snapshot");
         },
         [](const FlowConfig& f) {
             switch (f.initial) {
                 case InitialKind::Random: return std::string("random");
                 case InitialKind::Modes: return std::string("modes");
                 case InitialKind::Snapshot: return std::string("snapshot");
             }
             return std::string();
         }},
        RYM_U64("initial", "seed", seed),
        RYM_INT("initial", "max_wavenumber", max_wavenumber),
        RYM_DOUBLE("initial", "u_amplitude", u_amplitude),
        RYM_DOUBLE("initial", "psi_amplitude", psi_amplitude),
        RYM_DOUBLE("initial", "u_mean", u_mean),
        RYM_DOUBLE("initial", "psi_mean", psi_mean),
        {"initial", "u_modes", [](FlowConfig& f, std::string_view v, const Ctx& c) { f.u_modes = as_modes(v, c); },
         [](const FlowConfig& f) { return modes_text(f.u_modes); }},
        {"initial", "psi_modes",
         [](FlowConfig& f, std::string_view v, const Ctx& c) { f.psi_modes = as_modes(v, c); },
         [](const FlowConfig& f) { return modes_text(f.psi_modes); }},
        {"initial", "snapshot",
         [](FlowConfig& f, std::string_view v, const Ctx&) { f.snapshot = v == "none" ? "" : std::string(v); },
         [](const FlowConfig& f) { return f.snapshot.empty() ? std::string("none") : f.snapshot; }},
        {"initial", "flux_target",
         [](FlowConfig& f, std::string_view v, const Ctx& c) {
             if (v == "none")
                 f.flux_target.reset();
             else
                 f.flux_target = as_double(v, c);
         },
         [](const FlowConfig& f) { return f.flux_target ? format_shortest(*f.flux_target) : std::string("none"); }},

        {"stepper", "scheme",
         [](FlowConfig& f, std::string_view v, const Ctx& c) {
             if (v == "semi_implicit")
                 f.stepper.scheme = Scheme::SemiImplicitSpectral;
             else if (v == "rk4")
                 f.stepper.scheme = Scheme::RK4Explicit;
             else
                 fail_line(c.line, c.key, "scheme must be semi_implicit or rk4");
         },
         [](const FlowConfig& f) {
             return std::string(f.stepper.scheme == Scheme::RK4Explicit ? "rk4" : "semi_implicit");
         }},
        RYM_DOUBLE("stepper", "cfl_safety", stepper.cfl_safety),
        RYM_DOUBLE("stepper", "dt_max", stepper.dt_max),
        RYM_DOUBLE("stepper", "dt_min", stepper.dt_min),
        RYM_DOUBLE("stepper", "blowup_u", blowup_u),

        RYM_DOUBLE("stop", "stationary_tol", stationary_tol),
        {"stop", "max_steps",
         [](FlowConfig& f, std::string_view v, const Ctx& c) { f.max_steps = as_long(v, c); },
         [](const FlowConfig& f) { return std::to_string(f.max_steps); }},

        RYM_BOOL("gauge", "recenter", recenter),
        RYM_DOUBLE("gauge", "recenter_tol", recenter_tol),
        RYM_INT("gauge", "recenter_cadence", recenter_cadence),

        {"output", "dir",
         [](FlowConfig& f, std::string_view v, const Ctx& c) {
             if (v.empty()) fail_line(c.line, c.key, "output dir must not be empty");
             f.output_dir = std::string(v);
         },
         [](const FlowConfig& f) { return f.output_dir; }},
        RYM_INT("output", "diag_cadence", diag_cadence),
        RYM_INT("output", "snapshot_cadence", snapshot_cadence),
        RYM_INT("output", "checkpoint_cadence", checkpoint_cadence),
        RYM_BOOL("output", "plots", plots),

        RYM_DOUBLE("diagnostics", "moser_k", moser_k),
        RYM_BOOL("diagnostics", "eigenvalue", eigenvalue),
        RYM_DOUBLE("diagnostics", "eigen_tol", eigen_tol),
        RYM_INT("diagnostics", "sobolev_trials", sobolev_trials),
        RYM_U64("diagnostics", "sobolev_seed", sobolev_seed),
        RYM_INT("diagnostics", "sobolev_max_wavenumber", sobolev_max_wavenumber),
    };
    return table;
}

#undef RYM_DOUBLE
#undef RYM_INT
#undef RYM_BOOL
#undef RYM_U64

}  // namespace

Resolution FlowConfig::resolution() const {
    return surface == SurfaceKind::Torus ? Resolution{n, n} : Resolution{n_lat, n_lon};
}

FlowConfig parse_config(const std::string& text) {
    FlowConfig cfg;
    std::map<std::string, std::map<std::string, const KeySpec*>> sections;
    for (const auto& k : key_table()) sections[k.section][k.key] = &k;

    std::set<std::string> seen;
    std::string section;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string_view s(raw);
        if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
        s = trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') fail_line(line, "", "malformed section header");
            section = std::string(trim(s.substr(1, s.size() - 2)));
            if (!sections.count(section)) fail_line(line, "", "unknown section [" + section + "]");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string_view::npos) fail_line(line, "", "expected 'key = value'");
        const std::string key(trim(s.substr(0, eq)));
        const auto value = trim(s.substr(eq + 1));
        if (key.empty()) fail_line(line, "", "missing key before '='");
        if (section.empty()) fail_line(line, key, "key '" + key + "' appears before any [section]");
        const auto& keys = sections[section];
        const auto it = keys.find(key);
        if (it == keys.end()) fail_line(line, key, "unknown key '" + key + "' in [" + section + "]");
        if (!seen.insert(section + "." + key).second) fail_line(line, key, "duplicate key '" + key + "'");
        it->second->set(cfg, value, Ctx{line, key});
    }
    validate(cfg);
    return cfg;
}

FlowConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config", path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

void validate(const FlowConfig& c) {
    if (c.surface == SurfaceKind::Torus) {
        if (c.n < 8 || c.n % 2 != 0) fail_key("n", "torus resolution must be even and at least 8");
    } else {
        if (c.n_lat < 8) fail_key("n_lat", "sphere needs at least 8 colatitude rings");
        if (c.n_lon < 2 * c.n_lat - 1) fail_key("n_lon", "sphere needs n_lon >= 2 n_lat - 1");
    }
    if (!(c.t_end > 0.0)) fail_key("t_end", "must be positive");
    if (c.max_wavenumber < 1) fail_key("max_wavenumber", "must be at least 1");
    if (c.initial == InitialKind::Snapshot && c.snapshot.empty())
        fail_key("snapshot", "initial kind snapshot needs a snapshot path");
    for (const auto* modes : {&c.u_modes, &c.psi_modes}) {
        for (const auto& m : *modes) {
            if (c.surface == SurfaceKind::Sphere && (m.a < 0 || m.b < 0 || m.b > m.a))
                fail_key(modes == &c.u_modes ? "u_modes" : "psi_modes", "sphere modes need 0 <= b <= a");
        }
    }
    if (!(c.stepper.cfl_safety > 0.0)) fail_key("cfl_safety", "must be positive");
    if (!(c.stepper.dt_max > 0.0)) fail_key("dt_max", "must be positive");
    if (!(c.stepper.dt_min > 0.0)) fail_key("dt_min", "must be positive");
    if (c.stepper.dt_min > c.stepper.dt_max) fail_key("dt_min", "must not exceed dt_max");
    if (!(c.blowup_u > 0.0)) fail_key("blowup_u", "must be positive");
    if (!(c.stationary_tol >= 0.0)) fail_key("stationary_tol", "must be non-negative");
    if (c.max_steps < 0) fail_key("max_steps", "must be non-negative");
    if (c.recenter && c.surface != SurfaceKind::Sphere) fail_key("recenter", "recentering applies to the sphere only");
    if (!(c.recenter_tol > 0.0)) fail_key("recenter_tol", "must be positive");
    if (c.recenter_cadence < 1) fail_key("recenter_cadence", "must be at least 1");
    if (c.output_dir.empty()) fail_key("dir", "must not be empty");
    if (c.diag_cadence < 1) fail_key("diag_cadence", "must be at least 1");
    if (c.snapshot_cadence < 0) fail_key("snapshot_cadence", "must be non-negative");
    if (c.checkpoint_cadence < 0) fail_key("checkpoint_cadence", "must be non-negative");
    if (!(c.moser_k > 0.0)) fail_key("moser_k", "must be positive");
    if (!(c.eigen_tol > 0.0)) fail_key("eigen_tol", "must be positive");
    if (c.sobolev_trials < 0) fail_key("sobolev_trials", "must be non-negative");
    if (c.sobolev_max_wavenumber < 1) fail_key("sobolev_max_wavenumber", "must be at least 1");
}

std::string config_to_text(const FlowConfig& cfg) {
    std::ostringstream out;
    std::string section;
    for (const auto& k : key_table()) {
        if (k.section != section) {
            if (!section.empty()) out << '\n';
            section = k.section;
            out << '[' << section << "]\n";
        }
        out << k.key << " = " << k.get(cfg) << '\n';
    }
    return out.str();
}

void apply_environment(FlowConfig& cfg) {
    const char* dir = std::getenv(kOutputDirEnv);
    if (dir && *dir) cfg.output_dir = dir;
}

}  // namespace rym
