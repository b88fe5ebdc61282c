// File output: atomic writes, CSV exports and small SVG renders.
#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "driftsearch/domain_grid.hpp"
#include "driftsearch/errors.hpp"
#include "driftsearch/hypergraph.hpp"

namespace driftsearch {

/// Shortest decimal that round-trips; identical on every run.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

/// Writes to "<path>.tmp" and renames over `path`, so readers never see a
/// partially written file.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline std::string field_to_csv(const ScalarField& f) {
    std::string out = "x_km,y_km,value\n";
    const GridSpec& g = f.grid();
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            out += format_number(g.x_center(i)) + ',' + format_number(g.y_center(j)) + ',' +
                   format_number(f.at(i, j)) + '\n';
    return out;
}

inline std::string hypergraph_to_csv(const HypergraphField& h) {
    std::string out = "x_km,y_km,det_value,label\n";
    const GridSpec& g = h.grid;
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i) {
            const std::size_t k = g.index(i, j);
            out += format_number(g.x_center(i)) + ',' + format_number(g.y_center(j)) + ',' +
                   format_number(h.determinant[k]) + ',' + to_string(h.labels[k]) + '\n';
        }
    return out;
}

// ---------------------------------------------------------------------------
// CSV reading for the plot command

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw ConfigError("CSV has no column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    }
};

inline CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    CsvTable t;
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        return cells;
    };
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (t.header.empty()) t.header = split(line);
        else t.rows.push_back(split(line));
    }
    if (t.header.empty()) throw ConfigError(path.string() + ": empty CSV");
    return t;
}

// ---------------------------------------------------------------------------
// SVG

struct Rgb {
    int r, g, b;
};

inline std::string hex(Rgb c) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
    return buf;
}

/// White to dark blue ramp for t in [0, 1].
inline Rgb ramp(double t) {
    t = std::clamp(t, 0.0, 1.0);
    auto mix = [t](int a, int b) { return static_cast<int>(std::lround(a + (b - a) * t)); };
    return {mix(255, 8), mix(255, 48), mix(255, 107)};
}

inline constexpr Rgb kEllipticBlue{49, 104, 200};
inline constexpr Rgb kHyperbolicRed{214, 39, 40};

struct PointValue {
    double x, y;
    std::string value;
};

/// Renders gridded samples (cell centres) as coloured rectangles. `color`
/// maps the value string to a colour.
template <class ColorFn>
std::string svg_raster(const std::vector<PointValue>& pts, ColorFn color, const std::string& title) {
    if (pts.empty()) throw ConfigError("svg_raster: no samples");
    std::vector<double> xs, ys;
    for (const auto& p : pts) {
        xs.push_back(p.x);
        ys.push_back(p.y);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
    const double cw = xs.size() > 1 ? xs[1] - xs[0] : 1.0;
    const double ch = ys.size() > 1 ? ys[1] - ys[0] : 1.0;
    const double x0 = xs.front() - cw / 2, y1 = ys.back() + ch / 2;
    const double W = xs.back() - xs.front() + cw, H = ys.back() - ys.front() + ch;
    const double scale = 800.0 / W;

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_number(800) << "\" height=\""
      << format_number(std::ceil(H * scale) + 24) << "\">\n";
    o << "<text x=\"4\" y=\"16\" font-size=\"14\">" << title << "</text>\n<g transform=\"translate(0,24)\">\n";
    for (const auto& p : pts) {
        o << "<rect x=\"" << format_number((p.x - cw / 2 - x0) * scale) << "\" y=\""
          << format_number((y1 - p.y - ch / 2) * scale) << "\" width=\"" << format_number(cw * scale + 0.05)
          << "\" height=\"" << format_number(ch * scale + 0.05) << "\" fill=\"" << hex(color(p.value)) << "\"/>\n";
    }
    o << "</g>\n</svg>\n";
    return o.str();
}

/// Polylines per id over a bounding box.
inline std::string svg_paths(const std::map<int, std::vector<std::pair<double, double>>>& paths,
                             const std::string& title) {
    double x_lo = INFINITY, x_hi = -INFINITY, y_lo = INFINITY, y_hi = -INFINITY;
    for (const auto& [id, pts] : paths)
        for (const auto& [x, y] : pts) {
            x_lo = std::min(x_lo, x), x_hi = std::max(x_hi, x);
            y_lo = std::min(y_lo, y), y_hi = std::max(y_hi, y);
        }
    if (!(x_hi > x_lo)) x_hi = x_lo + 1;
    if (!(y_hi > y_lo)) y_hi = y_lo + 1;
    const double scale = 800.0 / (x_hi - x_lo);
    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\""
      << format_number(std::ceil((y_hi - y_lo) * scale) + 24) << "\">\n";
    o << "<text x=\"4\" y=\"16\" font-size=\"14\">" << title << "</text>\n<g transform=\"translate(0,24)\">\n";
    for (const auto& [id, pts] : paths) {
        o << "<polyline fill=\"none\" stroke-width=\"1\" stroke=\"" << palette[static_cast<unsigned>(id) % 10]
          << "\" points=\"";
        for (const auto& [x, y] : pts)
            o << format_number((x - x_lo) * scale) << ',' << format_number((y_hi - y) * scale) << ' ';
        o << "\"/>\n";
    }
    o << "</g>\n</svg>\n";
    return o.str();
}

/// Line chart of y(t) series sharing one time axis; y in [0, 1].
inline std::string svg_curves(const std::vector<double>& t, const std::vector<std::vector<double>>& series,
                              const std::vector<std::string>& labels, const std::string& title) {
    const double W = 800, H = 400, pad = 40;
    const double t_lo = t.empty() ? 0.0 : t.front(), t_hi = t.empty() ? 1.0 : std::max(t.back(), t.front() + 1e-9);
    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"};
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    o << "<text x=\"4\" y=\"16\" font-size=\"14\">" << title << "</text>\n";
    o << "<rect x=\"" << pad << "\" y=\"" << pad << "\" width=\"" << W - 2 * pad << "\" height=\"" << H - 2 * pad
      << "\" fill=\"none\" stroke=\"#999\"/>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        o << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << palette[s % 5] << "\" points=\"";
        for (std::size_t k = 0; k < t.size() && k < series[s].size(); ++k) {
            const double x = pad + (t[k] - t_lo) / (t_hi - t_lo) * (W - 2 * pad);
            const double y = H - pad - std::clamp(series[s][k], 0.0, 1.0) * (H - 2 * pad);
            o << format_number(x) << ',' << format_number(y) << ' ';
        }
        o << "\"/>\n";
        if (s < labels.size())
            o << "<text x=\"" << W - pad - 150 << "\" y=\"" << pad + 16 * (s + 1) << "\" font-size=\"12\" fill=\""
              << palette[s % 5] << "\">" << labels[s] << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace driftsearch
