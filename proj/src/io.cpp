#include "rymflow/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "rymflow/errors.hpp"
#include "rymflow/text_format.hpp"

namespace rym {

namespace fs = std::filesystem;

namespace {

constexpr const char* kSnapshotMagic = "RYMFLOW-SNAPSHOT";
constexpr const char* kProfileMagic = "RYMFLOW-SOLITON";
constexpr const char* kCheckpointMagic = "RYMFLOW-CHECKPOINT";
constexpr int kFormatVersion = 1;

/// Line reader over a text blob that reports the origin on every error.
class Lines {
public:
    Lines(const std::string& text, std::string origin) : in_(text), origin_(std::move(origin)) {}

    std::string next(const char* what) {
        std::string line;
        if (!std::getline(in_, line)) fail(std::string("unexpected end of file, expected ") + what);
        ++line_no_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    }

    /// "<key> <value...>" and returns the value part.
    std::string keyed(const std::string& key) {
        const std::string line = next(key.c_str());
        if (line.rfind(key + " ", 0) != 0) fail("expected '" + key + " ...'");
        return line.substr(key.size() + 1);
    }

    double number(const std::string& line) {
        const auto v = parse_double(trim(line));
        if (!v) fail("malformed number '" + line + "'");
        return *v;
    }

    long integer(const std::string& line) {
        const auto v = parse_long(trim(line));
        if (!v) fail("malformed integer '" + line + "'");
        return *v;
    }

    void expect(const std::string& exact) {
        if (next(exact.c_str()) != exact) fail("expected '" + exact + "'");
    }

    void expect_end() {
        std::string rest;
        while (std::getline(in_, rest)) {
            ++line_no_;
            if (!trim(rest).empty()) fail("trailing content");
        }
    }

    [[noreturn]] void fail(const std::string& what) const {
        std::ostringstream msg;
        msg << "line " << line_no_ << ": " << what;
        throw IoError(msg.str(), origin_);
    }

    const std::string& origin() const { return origin_; }

private:
    std::istringstream in_;
    std::string origin_;
    int line_no_ = 0;
};

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

void append_field_header(std::ostringstream& out, const FlowState& s) {
    const auto res = s.bg().resolution();
    out << "surface " << to_string(s.bg().kind()) << '\n';
    out << "dims " << res.n0 << ' ' << res.n1 << '\n';
}

void append_values(std::ostringstream& out, const ScalarField& f) {
    for (std::size_t i = 0; i < f.size(); ++i) out << format_shortest(f[i]) << '\n';
}

/// Reads the surface/dims lines and returns a geometry, reusing `given` when it matches.
GeometryPtr read_geometry(Lines& in, const GeometryPtr& given) {
    const std::string kind = in.keyed("surface");
    SurfaceKind k;
    if (kind == "torus")
        k = SurfaceKind::Torus;
    else if (kind == "sphere")
        k = SurfaceKind::Sphere;
    else
        in.fail("unknown surface kind '" + kind + "'");
    const auto dims = split_ws(in.keyed("dims"));
    if (dims.size() != 2) in.fail("dims needs two integers");
    const Resolution res{static_cast<int>(in.integer(dims[0])), static_cast<int>(in.integer(dims[1]))};
    if (given && given->kind() == k && given->resolution().n0 == res.n0 && given->resolution().n1 == res.n1)
        return given;
    try {
        return build_background(k, res);
    } catch (const InvalidArgument& e) {
        in.fail(e.what());
    }
}

ScalarField read_values(Lines& in, const BackgroundGeometry& bg, const char* what) {
    std::vector<double> v(bg.node_count());
    for (auto& x : v) x = in.number(in.next(what));
    return bg.make_field(std::move(v));
}

FlowState read_state(Lines& in, const GeometryPtr& given, double t) {
    const GeometryPtr g = read_geometry(in, given);
    ScalarField u = read_values(in, *g, "u values");
    ScalarField psi = read_values(in, *g, "psi values");
    try {
        return make_state(g, std::move(u), std::move(psi), t);
    } catch (const InvalidState& e) {
        in.fail(e.what());
    }
}

void read_version(Lines& in) {
    const long v = in.integer(in.keyed("version"));
    if (v != kFormatVersion) in.fail("unsupported format version " + std::to_string(v));
}

}  // namespace

void write_text_file(const std::string& path, const std::string& text) {
    const fs::path p(path);
    std::error_code ec;
    if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing", tmp);
        out << text;
        out.flush();
        if (!out) throw IoError("write failed", tmp);
    }
    fs::rename(tmp, p, ec);
    if (ec) throw IoError("cannot move into place (" + ec.message() + ")", path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read", path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const std::string& csv_header() {
    static const std::string h =
        "t,energy_F,dissipation_pred,dissipation_meas,volume,flux,calabi,gauss_bonnet_residual,"
        "volume_ode_residual,lambda,parallel_defect_int,parallel_defect_sup,moser_trudinger,sobolev_proxy";
    return h;
}

const std::vector<std::string>& csv_value_columns() {
    static const std::vector<std::string> cols = [] {
        std::vector<std::string> out;
        std::istringstream in(csv_header());
        std::string c;
        while (std::getline(in, c, ',')) out.push_back(c);
        out.erase(out.begin());
        return out;
    }();
    return cols;
}

std::vector<double> csv_values(const DiagnosticsRecord& r) {
    return {r.energy_F,         r.dissipation_pred,    r.dissipation_meas,    r.volume,
            r.flux,             r.calabi,              r.gauss_bonnet_residual, r.volume_ode_residual,
            r.lambda_schrodinger, r.parallel_defect_int, r.parallel_defect_sup, r.moser_trudinger_k,
            r.sobolev_proxy};
}

std::string csv_row(const DiagnosticsRecord& r) {
    std::string out = format_17g(r.t);
    for (double v : csv_values(r)) {
        out += ',';
        out += format_17g(v);
    }
    return out;
}

CsvWriter::CsvWriter(const std::string& path) : path_(path) {
    write_text_file(path, csv_header() + "\n");
    out_.open(path, std::ios::binary | std::ios::app);
    if (!out_) throw IoError("cannot open for appending", path);
}

CsvWriter::CsvWriter(const std::string& path, std::size_t keep_rows) : path_(path) {
    std::istringstream in(read_text_file(path));
    std::string line, kept;
    std::size_t lines = 0;
    while (lines < keep_rows + 1 && std::getline(in, line)) {
        if (lines == 0 && line != csv_header()) throw IoError("unexpected CSV header", path);
        kept += line + "\n";
        ++lines;
    }
    if (lines != keep_rows + 1) throw IoError("CSV has fewer rows than the checkpoint records", path);
    write_text_file(path, kept);
    out_.open(path, std::ios::binary | std::ios::app);
    if (!out_) throw IoError("cannot open for appending", path);
}

void CsvWriter::write(const DiagnosticsRecord& r) {
    out_ << csv_row(r) << '\n';
    if (!out_) throw IoError("write failed", path_);
}

void CsvWriter::flush() {
    out_.flush();
    if (!out_) throw IoError("write failed", path_);
}

std::vector<DiagnosticsRecord> read_csv(const std::string& path) {
    std::istringstream all(read_text_file(path));
    std::string line;
    if (!std::getline(all, line) || line != csv_header()) throw IoError("missing diagnostics CSV header", path);
    std::vector<DiagnosticsRecord> out;
    int line_no = 1;
    while (std::getline(all, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::vector<double> v;
        std::istringstream row(line);
        std::string cell;
        while (std::getline(row, cell, ',')) {
            const auto d = parse_double(cell);
            if (!d) throw IoError("line " + std::to_string(line_no) + ": malformed value '" + cell + "'", path);
            v.push_back(*d);
        }
        if (v.size() != 14) throw IoError("line " + std::to_string(line_no) + ": expected 14 columns", path);
        DiagnosticsRecord r;
        double* fields[] = {&r.t,
                            &r.energy_F,
                            &r.dissipation_pred,
                            &r.dissipation_meas,
                            &r.volume,
                            &r.flux,
                            &r.calabi,
                            &r.gauss_bonnet_residual,
                            &r.volume_ode_residual,
                            &r.lambda_schrodinger,
                            &r.parallel_defect_int,
                            &r.parallel_defect_sup,
                            &r.moser_trudinger_k,
                            &r.sobolev_proxy};
        for (int i = 0; i < 14; ++i) *fields[i] = v[i];
        out.push_back(r);
    }
    return out;
}

std::string snapshot_text(const FlowState& s) {
    std::ostringstream out;
    out << kSnapshotMagic << '\n' << "version " << kFormatVersion << '\n';
    append_field_header(out, s);
    out << "t " << format_shortest(s.t) << '\n';
    append_values(out, s.u);
    append_values(out, s.psi);
    return out.str();
}

FlowState parse_snapshot(const std::string& text, const GeometryPtr& geometry, const std::string& origin) {
    Lines in(text, origin);
    in.expect(kSnapshotMagic);
    read_version(in);
    // The t line follows dims; read the geometry first, then t, then values.
    const GeometryPtr g = read_geometry(in, geometry);
    const double t = in.number(in.keyed("t"));
    ScalarField u = read_values(in, *g, "u values");
    ScalarField psi = read_values(in, *g, "psi values");
    in.expect_end();
    try {
        return make_state(g, std::move(u), std::move(psi), t);
    } catch (const InvalidState& e) {
        in.fail(e.what());
    }
}

FlowState parse_snapshot(const std::string& text, const std::string& origin) {
    return parse_snapshot(text, nullptr, origin);
}

void write_snapshot(const std::string& path, const FlowState& s) { write_text_file(path, snapshot_text(s)); }

FlowState read_snapshot(const std::string& path) { return parse_snapshot(read_text_file(path), path); }

std::string profile_text(const SolitonProfile& p) {
    std::ostringstream out;
    out << kProfileMagic << '\n' << "version " << kFormatVersion << '\n';
    out << "nodes " << p.r.size() << '\n';
    out << "c " << format_shortest(p.c) << '\n';
    out << "a " << format_shortest(p.a) << '\n';
    out << "A " << format_shortest(p.A) << '\n';
    for (std::size_t i = 0; i < p.r.size(); ++i)
        out << format_shortest(p.r[i]) << ' ' << format_shortest(p.phi[i]) << ' ' << format_shortest(p.psi[i])
            << ' ' << format_shortest(p.f[i]) << '\n';
    return out.str();
}

SolitonProfile parse_profile(const std::string& text, const std::string& origin) {
    Lines in(text, origin);
    in.expect(kProfileMagic);
    read_version(in);
    const long n = in.integer(in.keyed("nodes"));
    if (n < 1 || n > 100000000) in.fail("node count out of range");
    SolitonProfile p;
    p.c = in.number(in.keyed("c"));
    p.a = in.number(in.keyed("a"));
    p.A = in.number(in.keyed("A"));
    for (long i = 0; i < n; ++i) {
        const auto cols = split_ws(in.next("profile row"));
        if (cols.size() != 4) in.fail("profile rows are 'r phi psi f'");
        p.r.push_back(in.number(cols[0]));
        p.phi.push_back(in.number(cols[1]));
        p.psi.push_back(in.number(cols[2]));
        p.f.push_back(in.number(cols[3]));
    }
    in.expect_end();
    return p;
}

void write_profile(const std::string& path, const SolitonProfile& p) { write_text_file(path, profile_text(p)); }

SolitonProfile read_profile(const std::string& path) { return parse_profile(read_text_file(path), path); }

std::string checkpoint_text(const Checkpoint& c) {
    std::ostringstream out;
    out << kCheckpointMagic << '\n' << "version " << kFormatVersion << '\n';
    out << "step " << c.step << '\n';
    out << "t " << format_shortest(c.state.t) << '\n';
    out << "rows " << c.rows << '\n';
    const auto& k = c.tracker;
    out << "tracker " << format_shortest(k.min_volume) << ' ' << format_shortest(k.t_at_min) << ' '
        << format_shortest(k.last_volume) << ' ' << k.entered_flux8pi << ' ' << k.entered_flux2r0 << ' '
        << k.flux8pi_violations << ' ' << k.flux2r0_violations << ' ' << k.flag << ' ' << k.count << '\n';
    std::size_t config_lines = 0;
    for (char ch : c.config_text) config_lines += ch == '\n';
    if (!c.config_text.empty() && c.config_text.back() != '\n') ++config_lines;
    out << "config " << config_lines << '\n' << c.config_text;
    if (!c.config_text.empty() && c.config_text.back() != '\n') out << '\n';
    append_field_header(out, c.state);
    append_values(out, c.state.u);
    append_values(out, c.state.psi);
    return out.str();
}

Checkpoint parse_checkpoint(const std::string& text, const std::string& origin) {
    Lines in(text, origin);
    in.expect(kCheckpointMagic);
    read_version(in);
    Checkpoint c;
    c.step = in.integer(in.keyed("step"));
    const double t = in.number(in.keyed("t"));
    const long rows = in.integer(in.keyed("rows"));
    if (c.step < 0 || rows < 0) in.fail("negative step or row count");
    c.rows = static_cast<std::size_t>(rows);
    const auto tr = split_ws(in.keyed("tracker"));
    if (tr.size() != 9) in.fail("tracker needs 9 fields");
    auto& k = c.tracker;
    k.min_volume = in.number(tr[0]);
    k.t_at_min = in.number(tr[1]);
    k.last_volume = in.number(tr[2]);
    k.entered_flux8pi = in.integer(tr[3]) != 0;
    k.entered_flux2r0 = in.integer(tr[4]) != 0;
    k.flux8pi_violations = static_cast<int>(in.integer(tr[5]));
    k.flux2r0_violations = static_cast<int>(in.integer(tr[6]));
    k.flag = static_cast<int>(in.integer(tr[7]));
    k.count = static_cast<std::size_t>(in.integer(tr[8]));
    const long config_lines = in.integer(in.keyed("config"));
    if (config_lines < 0) in.fail("negative config line count");
    for (long i = 0; i < config_lines; ++i) c.config_text += in.next("config echo") + "\n";
    c.state = read_state(in, nullptr, t);
    in.expect_end();
    return c;
}

void write_checkpoint(const std::string& path, const Checkpoint& c) { write_text_file(path, checkpoint_text(c)); }

Checkpoint read_checkpoint(const std::string& path) { return parse_checkpoint(read_text_file(path), path); }

std::string svg_plot(const std::string& title, const std::vector<double>& t, const std::vector<double>& y) {
    constexpr double W = 640, H = 400, L = 90, R = 20, T = 40, B = 50;
    double tmin = INFINITY, tmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    std::size_t finite = 0;
    for (std::size_t i = 0; i < t.size() && i < y.size(); ++i) {
        if (!std::isfinite(t[i]) || !std::isfinite(y[i])) continue;
        ++finite;
        tmin = std::min(tmin, t[i]);
        tmax = std::max(tmax, t[i]);
        ymin = std::min(ymin, y[i]);
        ymax = std::max(ymax, y[i]);
    }
    char buf[160];
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n";
    out << "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
    out << "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" << title
        << " vs t</text>\n";
    std::snprintf(buf, sizeof buf, "<rect x=\"%.0f\" y=\"%.0f\" width=\"%.0f\" height=\"%.0f\" fill=\"none\" stroke=\"black\"/>\n",
                  L, T, W - L - R, H - T - B);
    out << buf;
    if (finite == 0) {
        out << "<text x=\"320\" y=\"200\" text-anchor=\"middle\" font-family=\"sans-serif\">no finite values</text>\n";
        out << "</svg>\n";
        return out.str();
    }
    // Degenerate ranges get a unit-width window so the line is drawn mid-plot.
    if (tmax == tmin) tmax = tmin + 1.0;
    if (ymax == ymin) {
        ymin -= 0.5 * std::max(1.0, std::abs(ymin));
        ymax = 2 * ymax - ymin;
    }
    auto px = [&](double v) { return L + (v - tmin) / (tmax - tmin) * (W - L - R); };
    auto py = [&](double v) { return H - B - (v - ymin) / (ymax - ymin) * (H - T - B); };
    out << "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < t.size() && i < y.size(); ++i) {
        if (!std::isfinite(t[i]) || !std::isfinite(y[i])) continue;
        std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", first ? "" : " ", px(t[i]), py(y[i]));
        out << buf;
        first = false;
    }
    out << "\"/>\n";
    auto label = [&](double x, double yy, const char* anchor, double v) {
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.0f\" y=\"%.0f\" text-anchor=\"%s\" font-family=\"sans-serif\" "
                      "font-size=\"11\">%.6g</text>\n",
                      x, yy, anchor, v);
        out << buf;
    };
    label(L - 6, H - B, "end", ymin);
    label(L - 6, T + 10, "end", ymax);
    label(L, H - B + 18, "start", tmin);
    label(W - R, H - B + 18, "end", tmax);
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.0f\" y=\"%.0f\" text-anchor=\"middle\" font-family=\"sans-serif\" "
                  "font-size=\"12\">t</text>\n",
                  (L + W - R) / 2, H - 12);
    out << buf;
    out << "</svg>\n";
    return out.str();
}

std::vector<std::string> emit_plots(const std::string& dir, const std::vector<DiagnosticsRecord>& records) {
    std::vector<double> t;
    std::vector<std::vector<double>> cols(csv_value_columns().size());
    for (const auto& r : records) {
        t.push_back(r.t);
        const auto v = csv_values(r);
        for (std::size_t c = 0; c < cols.size(); ++c) cols[c].push_back(v[c]);
    }
    std::vector<std::string> paths;
    for (std::size_t c = 0; c < cols.size(); ++c) {
        const std::string& name = csv_value_columns()[c];
        const std::string path = (fs::path(dir) / (name + ".svg")).string();
        write_text_file(path, svg_plot(name, t, cols[c]));
        paths.push_back(path);
    }
    return paths;
}

}  // namespace rym
