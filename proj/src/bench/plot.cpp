#include "steplab/bench/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace steplab::bench {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 500.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 200.0;
constexpr double kTop = 30.0;
constexpr double kBottom = 60.0;

constexpr std::array<const char*, 10> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string xml_escape(const std::string& s) {
    std::string out;
    for (const char c : s) {
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

std::string num(double v) {
    std::ostringstream ss;
    ss.imbue(std::locale::classic());
    ss.setf(std::ios::fixed);
    ss.precision(2);
    ss << v;
    return ss.str();
}

}  // namespace

std::string render_svg(const std::vector<PlotSeries>& series) {
    double x_max = 1.0;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& s : series) {
        for (const auto& r : s.rows) {
            x_max = std::max(x_max, static_cast<double>(r.oracle_calls));
            if (r.best_gap && *r.best_gap > 0.0 && std::isfinite(*r.best_gap)) {
                lo = std::min(lo, std::log10(*r.best_gap));
                hi = std::max(hi, std::log10(*r.best_gap));
            }
        }
    }
    if (!std::isfinite(lo)) {
        lo = -1.0;
        hi = 1.0;
    }
    lo = std::floor(lo) - 1.0;  // one decade below the data hosts the floor
    hi = std::ceil(hi);
    if (hi <= lo) {
        hi = lo + 1.0;
    }
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    const auto px = [&](double x) { return kLeft + pw * x / x_max; };
    const auto py = [&](double l) { return kTop + ph * (hi - l) / (hi - lo); };

    std::ostringstream svg;
    svg.imbue(std::locale::classic());
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + ph << "\" x2=\"" << kLeft + pw << "\" y2=\"" << kTop + ph
        << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + ph
        << "\" stroke=\"black\"/>\n";
    const int decades = static_cast<int>(hi - lo);
    const int stride = std::max(1, decades / 10);
    for (int e = static_cast<int>(lo); e <= static_cast<int>(hi); e += stride) {
        const double y = py(e);
        svg << "<line x1=\"" << kLeft - 4 << "\" y1=\"" << num(y) << "\" x2=\"" << kLeft << "\" y2=\"" << num(y)
            << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">1e" << e
            << "</text>\n";
    }
    for (int i = 0; i <= 5; ++i) {
        const double xv = x_max * i / 5.0;
        svg << "<text x=\"" << num(px(xv)) << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">"
            << static_cast<long long>(std::llround(xv)) << "</text>\n";
    }
    svg << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 15
        << "\" text-anchor=\"middle\">oracle calls</text>\n";
    svg << "<text x=\"18\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << kTop + ph / 2 << ")\">best f gap</text>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const char* colour = kPalette[i % kPalette.size()];
        svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (const auto& r : series[i].rows) {
            double l = lo;
            if (r.best_gap && *r.best_gap > 0.0 && std::isfinite(*r.best_gap)) {
                l = std::max(lo, std::log10(*r.best_gap));
            }
            svg << (first ? "" : " ") << num(px(static_cast<double>(r.oracle_calls))) << ',' << num(py(l));
            first = false;
        }
        svg << "\"/>\n";
        const double ly = kTop + 10 + 18.0 * static_cast<double>(i);
        const double lx = kLeft + pw + 15;
        svg << "<g class=\"legend-entry\"><line x1=\"" << lx << "\" y1=\"" << ly << "\" x2=\"" << lx + 20
            << "\" y2=\"" << ly << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/><text x=\"" << lx + 26
            << "\" y=\"" << ly + 4 << "\">" << xml_escape(series[i].name) << "</text></g>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

void plot_files(const std::vector<std::string>& csv_paths, const std::string& out_svg) {
    if (csv_paths.empty()) {
        throw CsvError("plot: no input CSVs");
    }
    std::vector<PlotSeries> series;
    for (const auto& p : csv_paths) {
        series.push_back({std::filesystem::path(p).stem().string(), read_trace_csv(p)});
    }
    const std::string svg = render_svg(series);
    std::ofstream out(out_svg, std::ios::binary);
    if (!out) {
        throw CsvError("plot: cannot write '" + out_svg + "'");
    }
    out << svg;
}

}  // namespace steplab::bench
