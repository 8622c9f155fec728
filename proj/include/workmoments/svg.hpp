// svg.hpp: static SVG 1.1 line charts and heat grids

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace workmoments {

enum class SeriesStyle { line, dashed, markers, crosses };

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> err;  // optional symmetric error bars
    SeriesStyle style{SeriesStyle::line};
    std::string color{"#1f77b4"};
};

struct LineChart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<PlotSeries> series;
    double width{720.0};
    double height{480.0};
};

/// Linear axes fitted to all finite points; NaN points are skipped.
std::string render_line_chart(const LineChart& chart);

struct HeatGrid {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::string value_label;
    std::vector<double> x;       // column coordinates
    std::vector<double> y;       // row coordinates
    std::vector<double> values;  // row-major, y.size() x x.size(); NaN drawn grey
    double width{720.0};
    double height{480.0};
};

std::string render_heat_grid(const HeatGrid& grid);

/// Throws IoError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Tick positions covering [lo, hi] at a 1/2/5 x 10^k spacing.
std::vector<double> nice_ticks(double lo, double hi, int target = 6);

} // namespace workmoments
