#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "vortexgas/common.hpp"

namespace vortexgas::io {

/// RFC-4180 CSV: header row, CRLF line endings, '.' decimal separator.
/// Numeric cells use the shortest round-trip form, so files are byte-stable
/// for identical inputs.
class CsvWriter {
  public:
    CsvWriter(std::ostream& os, const std::vector<std::string>& header);
    void row(const std::vector<double>& cells);
    /// Pre-formatted cells (strings are quoted only when RFC-4180 requires it).
    void row_raw(const std::vector<std::string>& cells);

  private:
    std::ostream& os_;
    std::size_t width_;
};

/// One curve of an SVG plot; yerr is optional (empty = no error bars).
struct SvgSeries {
    std::vector<double> x, y, yerr;
    std::string label;
    std::string color = "#1f6fb4";
    bool draw_line = true;
    bool draw_points = true;
};

/// Straight guide line y = intercept + slope * x in (possibly log) axis units.
struct SvgGuide {
    double slope = 0.0;
    double intercept = 0.0;
    std::string label;
    std::string color = "#888888";
};

struct SvgPlot {
    std::string title, xlabel, ylabel;
    bool logx = false, logy = false;
    std::vector<SvgSeries> series;
    std::vector<SvgGuide> guides;  ///< applied in log10 units when the axis is log
};

/// Self-contained SVG 1.1 document (axes, ticks, legend, error bars).
void write_svg(std::ostream& os, const SvgPlot& plot);

struct CheckResult {
    std::string check;    ///< stable identifier, e.g. "splitting-identity"
    std::string detail;   ///< human-readable numbers behind the verdict
    bool pass = false;
    double margin = 0.0;  ///< distance to the threshold, >= 0 when passing
};

/// Everything needed to audit a run; written as JSON when the run ends.
struct RunManifest {
    std::string experiment;
    std::map<std::string, std::string> config;  ///< resolved key=value view
    std::uint64_t seed = 0;
    std::string started_at, finished_at;  ///< ISO-8601 UTC
    double wall_seconds = 0.0;
    std::string version;
    std::vector<std::string> outputs;  ///< paths relative to the output dir
    std::vector<CheckResult> checks;

    /// Serialise to JSON and move into place atomically (tmp file + rename).
    void write_atomic(const std::filesystem::path& path) const;
    std::string to_json() const;
};

RunManifest read_manifest(const std::filesystem::path& path);

std::string iso_timestamp_now();
std::string version_string();

/// Write a whole file atomically (tmp + rename), creating parent dirs.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace vortexgas::io
