#pragma once

#include <cstddef>
#include <fstream>
#include <string>
#include <vector>

#include "rymflow/diagnostics.hpp"
#include "rymflow/soliton.hpp"

namespace rym {

/// Exact diagnostics header, 14 columns.
const std::string& csv_header();
/// Column names after t, in header order (13 entries).
const std::vector<std::string>& csv_value_columns();
/// One row at 17 significant digits, no trailing newline.
std::string csv_row(const DiagnosticsRecord& r);
/// Values of the 13 non-t columns of a record, in header order.
std::vector<double> csv_values(const DiagnosticsRecord& r);

/// Appends rows to a diagnostics CSV. A fresh file gets the header; an
/// existing one is first cut back to its header plus keep_rows rows so a
/// resumed run continues exactly where its checkpoint was taken.
class CsvWriter {
public:
    /// Creates (truncating) the file and writes the header.
    explicit CsvWriter(const std::string& path);
    /// Reopens for a resume. Throws IoError when the file has fewer rows.
    CsvWriter(const std::string& path, std::size_t keep_rows);

    void write(const DiagnosticsRecord& r);
    void flush();
    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::ofstream out_;
};

/// Parses a diagnostics CSV written by CsvWriter. Throws IoError.
std::vector<DiagnosticsRecord> read_csv(const std::string& path);

/// Snapshot text: magic, version, surface kind, dims and t, then the values of
/// u and then psi, one per line in shortest round-trip form.
std::string snapshot_text(const FlowState& s);
/// Builds a fresh background for the dims in the header. Throws IoError
/// (with `origin` as the path) on malformed input.
FlowState parse_snapshot(const std::string& text, const std::string& origin = "<memory>");
/// Uses `geometry` when its kind and dims match the header.
FlowState parse_snapshot(const std::string& text, const GeometryPtr& geometry, const std::string& origin);
void write_snapshot(const std::string& path, const FlowState& s);
FlowState read_snapshot(const std::string& path);

/// Profile text: magic, version, node count, then c, a and A lines and one
/// "r phi psi f" line per node.
std::string profile_text(const SolitonProfile& p);
SolitonProfile parse_profile(const std::string& text, const std::string& origin = "<memory>");
void write_profile(const std::string& path, const SolitonProfile& p);
SolitonProfile read_profile(const std::string& path);

/// Everything needed to continue a run bit-for-bit.
struct Checkpoint {
    std::string config_text;
    long step = 0;
    std::size_t rows = 0;
    MinVolumeTracker::Snapshot tracker{};
    FlowState state;
};

std::string checkpoint_text(const Checkpoint& c);
Checkpoint parse_checkpoint(const std::string& text, const std::string& origin = "<memory>");
void write_checkpoint(const std::string& path, const Checkpoint& c);
Checkpoint read_checkpoint(const std::string& path);

/// Line plot of one column against t as standalone SVG.
std::string svg_plot(const std::string& title, const std::vector<double>& t, const std::vector<double>& y);
/// One SVG per non-t column into `dir` (created if needed); returns the paths.
std::vector<std::string> emit_plots(const std::string& dir, const std::vector<DiagnosticsRecord>& records);

/// Writes through a temporary file and renames it into place. Throws IoError.
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace rym
