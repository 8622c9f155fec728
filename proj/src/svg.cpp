#include "workmoments/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "workmoments/errors.hpp"

namespace workmoments {

namespace {

constexpr double kMarginLeft = 80.0;
constexpr double kMarginRight = 170.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 60.0;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    if (v == 0.0) return "0";
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string escape(const std::string& s) {
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

struct Frame {
    double x0, x1, y0, y1;  // data range
    double left, right, top, bottom;

    double px(double x) const { return left + (x - x0) / (x1 - x0) * (right - left); }
    double py(double y) const { return bottom - (y - y0) / (y1 - y0) * (bottom - top); }
};

std::string header(double w, double h, const std::string& title) {
    std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(w) + "\" height=\"" + num(h) +
         "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<text x=\"" + num(w / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + escape(title) +
         "</text>\n";
    return s;
}

std::string axes(const Frame& f, const std::vector<double>& xt, const std::vector<double>& yt,
                 const std::string& xl, const std::string& yl) {
    std::string s;
    s += "<rect x=\"" + num(f.left) + "\" y=\"" + num(f.top) + "\" width=\"" + num(f.right - f.left) +
         "\" height=\"" + num(f.bottom - f.top) + "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : xt) {
        const double x = f.px(t);
        s += "<line x1=\"" + num(x) + "\" y1=\"" + num(f.bottom) + "\" x2=\"" + num(x) + "\" y2=\"" +
             num(f.bottom + 5) + "\" stroke=\"black\"/>\n";
        s += "<text x=\"" + num(x) + "\" y=\"" + num(f.bottom + 18) + "\" text-anchor=\"middle\">" +
             tick_label(t) + "</text>\n";
    }
    for (double t : yt) {
        const double y = f.py(t);
        s += "<line x1=\"" + num(f.left - 5) + "\" y1=\"" + num(y) + "\" x2=\"" + num(f.left) + "\" y2=\"" + num(y) +
             "\" stroke=\"black\"/>\n";
        s += "<text x=\"" + num(f.left - 8) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" + tick_label(t) +
             "</text>\n";
    }
    s += "<text x=\"" + num((f.left + f.right) / 2) + "\" y=\"" + num(f.bottom + 42) + "\" text-anchor=\"middle\">" +
         escape(xl) + "</text>\n";
    const double cy = (f.top + f.bottom) / 2;
    s += "<text x=\"20\" y=\"" + num(cy) + "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " + num(cy) + ")\">" +
         escape(yl) + "</text>\n";
    return s;
}

void widen(double& lo, double& hi) {
    if (!(hi > lo)) {
        const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
        lo -= pad;
        hi += pad;
    }
}

} // namespace

std::vector<double> nice_ticks(double lo, double hi, int target) {
    if (!(hi > lo) || target < 1) return {lo};
    const double raw = (hi - lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        step = m * mag;
        if (step >= raw) break;
    }
    std::vector<double> out;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step)
        out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
    return out;
}

std::string render_line_chart(const LineChart& c) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : c.series) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            const double e = i < s.err.size() && std::isfinite(s.err[i]) ? s.err[i] : 0.0;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i] - e);
            y1 = std::max(y1, s.y[i] + e);
        }
    }
    if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
    widen(x0, x1);
    widen(y0, y1);
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;

    const Frame f{x0, x1, y0, y1, kMarginLeft, c.width - kMarginRight, kMarginTop, c.height - kMarginBottom};
    std::string svg = header(c.width, c.height, c.title);
    svg += axes(f, nice_ticks(x0, x1), nice_ticks(y0, y1), c.x_label, c.y_label);

    double legend_y = f.top + 10;
    for (const auto& s : c.series) {
        const std::string color = escape(s.color);
        if (s.style == SeriesStyle::line || s.style == SeriesStyle::dashed) {
            std::string d;
            bool pen_up = true;
            for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
                    pen_up = true;
                    continue;
                }
                d += (pen_up ? "M" : "L") + num(f.px(s.x[i])) + " " + num(f.py(s.y[i])) + " ";
                pen_up = false;
            }
            svg += "<path d=\"" + d + "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"1.5\"" +
                   (s.style == SeriesStyle::dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
        } else {
            for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                const double x = f.px(s.x[i]), y = f.py(s.y[i]);
                if (i < s.err.size() && std::isfinite(s.err[i]) && s.err[i] > 0.0) {
                    svg += "<line x1=\"" + num(x) + "\" y1=\"" + num(f.py(s.y[i] - s.err[i])) + "\" x2=\"" + num(x) +
                           "\" y2=\"" + num(f.py(s.y[i] + s.err[i])) + "\" stroke=\"" + color + "\"/>\n";
                }
                if (s.style == SeriesStyle::markers) {
                    svg += "<circle cx=\"" + num(x) + "\" cy=\"" + num(y) + "\" r=\"3.5\" fill=\"" + color + "\"/>\n";
                } else {
                    svg += "<path d=\"M" + num(x - 4) + " " + num(y - 4) + " L" + num(x + 4) + " " + num(y + 4) +
                           " M" + num(x - 4) + " " + num(y + 4) + " L" + num(x + 4) + " " + num(y - 4) +
                           "\" stroke=\"" + color + "\" stroke-width=\"1.5\"/>\n";
                }
            }
        }
        const double lx = f.right + 12;
        svg += "<line x1=\"" + num(lx) + "\" y1=\"" + num(legend_y) + "\" x2=\"" + num(lx + 24) + "\" y2=\"" +
               num(legend_y) + "\" stroke=\"" + color + "\" stroke-width=\"2\"" +
               (s.style == SeriesStyle::dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
        svg += "<text x=\"" + num(lx + 30) + "\" y=\"" + num(legend_y + 4) + "\">" + escape(s.label) + "</text>\n";
        legend_y += 18;
    }
    svg += "</svg>\n";
    return svg;
}

std::string render_heat_grid(const HeatGrid& g) {
    if (g.values.size() != g.x.size() * g.y.size()) throw ShapeError("render_heat_grid: value count mismatch");
    double v0 = std::numeric_limits<double>::infinity(), v1 = -v0;
    for (double v : g.values)
        if (std::isfinite(v)) v0 = std::min(v0, v), v1 = std::max(v1, v);
    if (!std::isfinite(v0)) v0 = 0.0, v1 = 1.0;
    widen(v0, v1);

    const Frame f{0.0, static_cast<double>(g.x.size()), 0.0, static_cast<double>(g.y.size()),
                  kMarginLeft, g.width - kMarginRight, kMarginTop, g.height - kMarginBottom};
    std::string svg = header(g.width, g.height, g.title);

    // Blue (low) to red (high).
    auto color = [&](double v) {
        if (!std::isfinite(v)) return std::string("#bbbbbb");
        const double s = (v - v0) / (v1 - v0);
        const int r = static_cast<int>(std::lround(255 * s));
        const int b = static_cast<int>(std::lround(255 * (1 - s)));
        const int gr = static_cast<int>(std::lround(255 * (1 - std::abs(2 * s - 1)) * 0.8));
        char buf[8];
        std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, gr, b);
        return std::string(buf);
    };
    for (std::size_t r = 0; r < g.y.size(); ++r) {
        for (std::size_t c = 0; c < g.x.size(); ++c) {
            const double x = f.px(static_cast<double>(c));
            const double y = f.py(static_cast<double>(r + 1));
            svg += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(f.px(1.0) - f.px(0.0)) +
                   "\" height=\"" + num(f.py(0.0) - f.py(1.0)) + "\" fill=\"" + color(g.values[r * g.x.size() + c]) +
                   "\"/>\n";
        }
    }
    svg += "<rect x=\"" + num(f.left) + "\" y=\"" + num(f.top) + "\" width=\"" + num(f.right - f.left) +
           "\" height=\"" + num(f.bottom - f.top) + "\" fill=\"none\" stroke=\"black\"/>\n";
    // Label a handful of rows and columns with their coordinates.
    const std::size_t xs = std::max<std::size_t>(1, g.x.size() / 6);
    for (std::size_t c = 0; c < g.x.size(); c += xs) {
        svg += "<text x=\"" + num(f.px(c + 0.5)) + "\" y=\"" + num(f.bottom + 18) + "\" text-anchor=\"middle\">" +
               tick_label(g.x[c]) + "</text>\n";
    }
    const std::size_t ys = std::max<std::size_t>(1, g.y.size() / 6);
    for (std::size_t r = 0; r < g.y.size(); r += ys) {
        svg += "<text x=\"" + num(f.left - 8) + "\" y=\"" + num(f.py(r + 0.5) + 4) + "\" text-anchor=\"end\">" +
               tick_label(g.y[r]) + "</text>\n";
    }
    svg += "<text x=\"" + num((f.left + f.right) / 2) + "\" y=\"" + num(f.bottom + 42) + "\" text-anchor=\"middle\">" +
           escape(g.x_label) + "</text>\n";
    const double cy = (f.top + f.bottom) / 2;
    svg += "<text x=\"20\" y=\"" + num(cy) + "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " + num(cy) +
           ")\">" + escape(g.y_label) + "</text>\n";

    // Colour bar.
    const double bx = f.right + 20, bw = 18;
    const int bands = 32;
    for (int i = 0; i < bands; ++i) {
        const double s0 = static_cast<double>(i) / bands;
        const double y = f.bottom - (s0 + 1.0 / bands) * (f.bottom - f.top);
        svg += "<rect x=\"" + num(bx) + "\" y=\"" + num(y) + "\" width=\"" + num(bw) + "\" height=\"" +
               num((f.bottom - f.top) / bands + 0.5) + "\" fill=\"" + color(v0 + (s0 + 0.5 / bands) * (v1 - v0)) +
               "\"/>\n";
    }
    for (double t : nice_ticks(v0, v1, 5)) {
        const double y = f.bottom - (t - v0) / (v1 - v0) * (f.bottom - f.top);
        svg += "<text x=\"" + num(bx + bw + 6) + "\" y=\"" + num(y + 4) + "\">" + tick_label(t) + "</text>\n";
    }
    svg += "<text x=\"" + num(bx) + "\" y=\"" + num(f.top - 8) + "\">" + escape(g.value_label) + "</text>\n";
    svg += "</svg>\n";
    return svg;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << text;
    os.flush();
    if (!os) throw IoError("write failed: " + path.string());
}

} // namespace workmoments
