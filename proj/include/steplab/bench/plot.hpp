#pragma once

#include <string>
#include <vector>

#include "steplab/bench/csv.hpp"

namespace steplab::bench {

struct PlotSeries {
    std::string name;
    std::vector<TraceRow> rows;
};

/// Self-contained SVG: log10 best_f_gap against oracle calls, one polyline
/// per series and a legend entry per series. Nonpositive or missing gaps are
/// drawn at the plot floor.
std::string render_svg(const std::vector<PlotSeries>& series);

/// Reads every CSV (throws CsvError on schema problems) and writes the SVG.
void plot_files(const std::vector<std::string>& csv_paths, const std::string& out_svg);

}  // namespace steplab::bench
