#include "vortexgas/io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#ifndef VORTEXGAS_VERSION
#define VORTEXGAS_VERSION "0.1.0"
#endif

namespace vortexgas::io {

namespace {

std::string csv_escape(const std::string& cell) {
    if (cell.find_first_of(",\"\r\n") == std::string::npos) return cell;
    std::string out = "\"";
    for (char c : cell) {
        out += c;
        if (c == '"') out += '"';
    }
    out += '"';
    return out;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string fmt2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace

CsvWriter::CsvWriter(std::ostream& os, const std::vector<std::string>& header)
    : os_(os), width_(header.size()) {
    std::vector<std::string> cells(header.begin(), header.end());
    row_raw(cells);
}

void CsvWriter::row(const std::vector<double>& cells) {
    std::vector<std::string> out;
    out.reserve(cells.size());
    for (double v : cells) out.push_back(format_double(v));
    row_raw(out);
}

void CsvWriter::row_raw(const std::vector<std::string>& cells) {
    if (cells.size() != width_)
        throw Error("io-error", "CSV row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) os_ << ',';
        os_ << csv_escape(cells[i]);
    }
    os_ << "\r\n";
}

// ---------------------------------------------------------------------------
// SVG plotting

namespace {

struct AxisMap {
    double lo = 0.0, hi = 1.0;  // data range (already log10 if log axis)
    double p0 = 0.0, p1 = 1.0;  // pixel range
    double at(double v) const { return p0 + (v - lo) / (hi - lo) * (p1 - p0); }
};

std::vector<double> linear_ticks(double lo, double hi) {
    double span = hi - lo;
    if (!(span > 0.0)) return {lo};
    double raw = span / 5.0;
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double norm = raw / mag;
    double step = (norm < 1.5 ? 1.0 : norm < 3.5 ? 2.0 : norm < 7.5 ? 5.0 : 10.0) * mag;
    std::vector<double> t;
    for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step)
        t.push_back(v);
    return t;
}

std::string tick_label(double v, bool log_axis) {
    char buf[40];
    if (log_axis) {
        // v is log10(value); label with the value itself
        double val = std::pow(10.0, v);
        if (v >= -3 && v <= 5 && std::abs(v - std::round(v)) < 1e-9)
            std::snprintf(buf, sizeof buf, "%g", val);
        else
            std::snprintf(buf, sizeof buf, "1e%g", v);
    } else {
        std::snprintf(buf, sizeof buf, "%g", v);
    }
    return buf;
}

}  // namespace

void write_svg(std::ostream& os, const SvgPlot& plot) {
    const double W = 640, H = 440;
    const double ml = 72, mr = 24, mt = 42, mb = 52;

    auto tx = [&](double v) { return plot.logx ? std::log10(v) : v; };
    auto ty = [&](double v) { return plot.logy ? std::log10(v) : v; };

    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
    for (const auto& s : plot.series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            double gx = tx(s.x[i]);
            double gy = ty(s.y[i]);
            if (!std::isfinite(gx) || !std::isfinite(gy)) continue;
            xlo = std::min(xlo, gx), xhi = std::max(xhi, gx);
            double e = i < s.yerr.size() ? s.yerr[i] : 0.0;
            double yl = plot.logy ? (s.y[i] - e > 0 ? std::log10(s.y[i] - e) : gy) : gy - e;
            double yh = plot.logy ? std::log10(s.y[i] + e) : gy + e;
            ylo = std::min(ylo, yl), yhi = std::max(yhi, yh);
        }
    }
    if (xlo > xhi) { xlo = 0; xhi = 1; }
    if (ylo > yhi) { ylo = 0; yhi = 1; }
    double xpad = 0.06 * (xhi - xlo + (xhi == xlo));
    double ypad = 0.08 * (yhi - ylo + (yhi == ylo));
    AxisMap X{xlo - xpad, xhi + xpad, ml, W - mr};
    AxisMap Y{ylo - ypad, yhi + ypad, H - mb, mt};

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << W
       << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\""
       << " font-size=\"15\">" << xml_escape(plot.title) << "</text>\n";

    // frame
    os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr
       << "\" height=\"" << H - mt - mb << "\" fill=\"none\" stroke=\"black\"/>\n";

    // ticks + grid
    auto draw_xtick = [&](double v) {
        double px = X.at(v);
        if (px < ml - 0.5 || px > W - mr + 0.5) return;
        os << "<line x1=\"" << fmt2(px) << "\" y1=\"" << H - mb << "\" x2=\"" << fmt2(px)
           << "\" y2=\"" << H - mb + 5 << "\" stroke=\"black\"/>\n";
        os << "<line x1=\"" << fmt2(px) << "\" y1=\"" << mt << "\" x2=\"" << fmt2(px)
           << "\" y2=\"" << H - mb << "\" stroke=\"#dddddd\" stroke-width=\"0.6\"/>\n";
        os << "<text x=\"" << fmt2(px) << "\" y=\"" << H - mb + 18
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
           << tick_label(v, plot.logx) << "</text>\n";
    };
    auto draw_ytick = [&](double v) {
        double py = Y.at(v);
        if (py < mt - 0.5 || py > H - mb + 0.5) return;
        os << "<line x1=\"" << ml - 5 << "\" y1=\"" << fmt2(py) << "\" x2=\"" << ml
           << "\" y2=\"" << fmt2(py) << "\" stroke=\"black\"/>\n";
        os << "<line x1=\"" << ml << "\" y1=\"" << fmt2(py) << "\" x2=\"" << W - mr
           << "\" y2=\"" << fmt2(py) << "\" stroke=\"#dddddd\" stroke-width=\"0.6\"/>\n";
        os << "<text x=\"" << ml - 8 << "\" y=\"" << fmt2(py + 4)
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
           << tick_label(v, plot.logy) << "</text>\n";
    };
    if (plot.logx)
        for (double v = std::ceil(X.lo); v <= X.hi; v += 1.0) draw_xtick(v);
    else
        for (double v : linear_ticks(X.lo, X.hi)) draw_xtick(v);
    if (plot.logy)
        for (double v = std::ceil(Y.lo); v <= Y.hi; v += 1.0) draw_ytick(v);
    else
        for (double v : linear_ticks(Y.lo, Y.hi)) draw_ytick(v);

    // axis labels
    os << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 14
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
       << xml_escape(plot.xlabel) << "</text>\n";
    os << "<text x=\"18\" y=\"" << (mt + H - mb) / 2
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\""
       << " transform=\"rotate(-90 18 " << (mt + H - mb) / 2 << ")\">"
       << xml_escape(plot.ylabel) << "</text>\n";

    // guides (in transformed units)
    for (const auto& g : plot.guides) {
        double y0 = g.intercept + g.slope * X.lo;
        double y1 = g.intercept + g.slope * X.hi;
        os << "<line x1=\"" << fmt2(X.at(X.lo)) << "\" y1=\"" << fmt2(Y.at(y0)) << "\" x2=\""
           << fmt2(X.at(X.hi)) << "\" y2=\"" << fmt2(Y.at(y1)) << "\" stroke=\"" << g.color
           << "\" stroke-dasharray=\"6 4\"/>\n";
    }

    // series
    for (const auto& s : plot.series) {
        std::string pts;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            double gx = tx(s.x[i]), gy = ty(s.y[i]);
            if (!std::isfinite(gx) || !std::isfinite(gy)) continue;
            double px = X.at(gx), py = Y.at(gy);
            if (!pts.empty()) pts += ' ';
            pts += fmt2(px) + "," + fmt2(py);
            if (i < s.yerr.size() && s.yerr[i] > 0) {
                double lo = s.y[i] - s.yerr[i], hi = s.y[i] + s.yerr[i];
                double pl = plot.logy ? (lo > 0 ? Y.at(std::log10(lo)) : H - mb) : Y.at(lo);
                double ph = plot.logy ? Y.at(std::log10(hi)) : Y.at(hi);
                os << "<line x1=\"" << fmt2(px) << "\" y1=\"" << fmt2(pl) << "\" x2=\""
                   << fmt2(px) << "\" y2=\"" << fmt2(ph) << "\" stroke=\"" << s.color
                   << "\" stroke-width=\"1\"/>\n";
                os << "<line x1=\"" << fmt2(px - 3) << "\" y1=\"" << fmt2(pl) << "\" x2=\""
                   << fmt2(px + 3) << "\" y2=\"" << fmt2(pl) << "\" stroke=\"" << s.color
                   << "\"/>\n";
                os << "<line x1=\"" << fmt2(px - 3) << "\" y1=\"" << fmt2(ph) << "\" x2=\""
                   << fmt2(px + 3) << "\" y2=\"" << fmt2(ph) << "\" stroke=\"" << s.color
                   << "\"/>\n";
            }
        }
        if (s.draw_line && !pts.empty())
            os << "<polyline points=\"" << pts << "\" fill=\"none\" stroke=\"" << s.color
               << "\" stroke-width=\"1.5\"/>\n";
        if (s.draw_points) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                double gx = tx(s.x[i]), gy = ty(s.y[i]);
                if (!std::isfinite(gx) || !std::isfinite(gy)) continue;
                os << "<circle cx=\"" << fmt2(X.at(gx)) << "\" cy=\"" << fmt2(Y.at(gy))
                   << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
            }
        }
    }

    // legend
    double ly = mt + 14;
    for (const auto& s : plot.series) {
        if (s.label.empty()) continue;
        os << "<line x1=\"" << W - mr - 150 << "\" y1=\"" << fmt2(ly - 4) << "\" x2=\""
           << W - mr - 128 << "\" y2=\"" << fmt2(ly - 4) << "\" stroke=\"" << s.color
           << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << W - mr - 122 << "\" y=\"" << fmt2(ly)
           << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(s.label)
           << "</text>\n";
        ly += 16;
    }
    for (const auto& g : plot.guides) {
        if (g.label.empty()) continue;
        os << "<line x1=\"" << W - mr - 150 << "\" y1=\"" << fmt2(ly - 4) << "\" x2=\""
           << W - mr - 128 << "\" y2=\"" << fmt2(ly - 4) << "\" stroke=\"" << g.color
           << "\" stroke-dasharray=\"6 4\"/>\n";
        os << "<text x=\"" << W - mr - 122 << "\" y=\"" << fmt2(ly)
           << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(g.label)
           << "</text>\n";
        ly += 16;
    }

    os << "</svg>\n";
}

// ---------------------------------------------------------------------------
// Manifest

std::string RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["experiment"] = experiment;
    j["version"] = version;
    j["seed"] = seed;
    j["started_at"] = started_at;
    j["finished_at"] = finished_at;
    j["wall_seconds"] = wall_seconds;
    j["config"] = config;
    j["outputs"] = outputs;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& c : checks) {
        nlohmann::ordered_json e;
        e["check"] = c.check;
        e["pass"] = c.pass;
        e["margin"] = c.margin;
        e["detail"] = c.detail;
        arr.push_back(e);
    }
    j["checks"] = arr;
    return j.dump(2) + "\n";
}

void RunManifest::write_atomic(const std::filesystem::path& path) const {
    write_file_atomic(path, to_json());
}

RunManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("io-error", "cannot read manifest " + path.string());
    nlohmann::json j;
    in >> j;
    RunManifest m;
    m.experiment = j.value("experiment", "");
    m.version = j.value("version", "");
    m.seed = j.value("seed", std::uint64_t(0));
    m.started_at = j.value("started_at", "");
    m.finished_at = j.value("finished_at", "");
    m.wall_seconds = j.value("wall_seconds", 0.0);
    if (j.contains("config"))
        for (auto it = j["config"].begin(); it != j["config"].end(); ++it)
            m.config[it.key()] = it.value().get<std::string>();
    if (j.contains("outputs"))
        for (const auto& o : j["outputs"]) m.outputs.push_back(o.get<std::string>());
    if (j.contains("checks"))
        for (const auto& e : j["checks"]) {
            CheckResult c;
            c.check = e.value("check", "");
            c.pass = e.value("pass", false);
            c.margin = e.value("margin", 0.0);
            c.detail = e.value("detail", "");
            m.checks.push_back(c);
        }
    return m;
}

std::string iso_timestamp_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string version_string() { return VORTEXGAS_VERSION; }

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error("io-error", "cannot open " + tmp.string());
        out << content;
        if (!out) throw Error("io-error", "failed writing " + tmp.string());
    }
    fs::rename(tmp, path);
}

}  // namespace vortexgas::io
