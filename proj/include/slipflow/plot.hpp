#pragma once

#include <string>
#include <vector>

namespace slipflow {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool markers = false; ///< scatter points instead of a polyline
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<PlotSeries> series;
};

/// Minimal standalone SVG line/scatter plot with axes, ticks and a legend.
std::string render_svg(const PlotSpec& spec);

void write_svg(const std::string& path, const PlotSpec& spec);

} // namespace slipflow
