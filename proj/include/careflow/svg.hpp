#pragma once
// Direct SVG scatter emission: fixed 800x800 viewBox, per-series fill colors
// declared in a legend, no plotting dependency.

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "careflow/matrix.hpp"

namespace careflow {

struct ScatterSeries {
    std::string label;
    std::string color;
    Matrix points;  // [n x 2]
};

namespace detail {

inline std::string fmt_coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return std::string(buf);
}

}  // namespace detail

inline std::string render_scatter_svg(const std::vector<ScatterSeries>& series,
                                      const std::string& title) {
    constexpr double kSize = 800.0;
    constexpr double kMargin = 60.0;

    double lo_x = 0.0, hi_x = 1.0, lo_y = 0.0, hi_y = 1.0;
    bool any = false;
    for (const ScatterSeries& s : series) {
        if (s.points.cols != 2) throw ShapeError("render_scatter_svg: series must be [n x 2]");
        for (std::size_t i = 0; i < s.points.rows; ++i) {
            const double x = s.points(i, 0), y = s.points(i, 1);
            if (!any) {
                lo_x = hi_x = x;
                lo_y = hi_y = y;
                any = true;
            } else {
                lo_x = std::min(lo_x, x);
                hi_x = std::max(hi_x, x);
                lo_y = std::min(lo_y, y);
                hi_y = std::max(hi_y, y);
            }
        }
    }
    const double span_x = (hi_x - lo_x) > 0.0 ? (hi_x - lo_x) : 1.0;
    const double span_y = (hi_y - lo_y) > 0.0 ? (hi_y - lo_y) : 1.0;
    const double pad_x = 0.05 * span_x, pad_y = 0.05 * span_y;
    const double x0 = lo_x - pad_x, x1 = hi_x + pad_x;
    const double y0 = lo_y - pad_y, y1 = hi_y + pad_y;
    const double scale_x = (kSize - 2.0 * kMargin) / (x1 - x0);
    const double scale_y = (kSize - 2.0 * kMargin) / (y1 - y0);

    auto px = [&](double x) { return kMargin + (x - x0) * scale_x; };
    // SVG y grows downward; data y grows upward.
    auto py = [&](double y) { return kSize - kMargin - (y - y0) * scale_y; };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 800\">\n";
    out += "  <rect x=\"0\" y=\"0\" width=\"800\" height=\"800\" fill=\"white\"/>\n";
    out += "  <rect x=\"" + detail::fmt_coord(kMargin) + "\" y=\"" + detail::fmt_coord(kMargin) +
           "\" width=\"" + detail::fmt_coord(kSize - 2 * kMargin) + "\" height=\"" +
           detail::fmt_coord(kSize - 2 * kMargin) +
           "\" fill=\"none\" stroke=\"#cccccc\" stroke-width=\"1\"/>\n";
    out += "  <text x=\"400\" y=\"36\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"20\">" + title + "</text>\n";

    for (const ScatterSeries& s : series) {
        out += "  <g fill=\"" + s.color + "\" fill-opacity=\"0.7\">\n";
        for (std::size_t i = 0; i < s.points.rows; ++i)
            out += "    <circle cx=\"" + detail::fmt_coord(px(s.points(i, 0))) + "\" cy=\"" +
                   detail::fmt_coord(py(s.points(i, 1))) + "\" r=\"3\"/>\n";
        out += "  </g>\n";
    }

    double legend_y = kMargin + 10.0;
    for (const ScatterSeries& s : series) {
        out += "  <rect x=\"" + detail::fmt_coord(kSize - kMargin - 150.0) + "\" y=\"" +
               detail::fmt_coord(legend_y) + "\" width=\"12\" height=\"12\" fill=\"" + s.color +
               "\"/>\n";
        out += "  <text x=\"" + detail::fmt_coord(kSize - kMargin - 132.0) + "\" y=\"" +
               detail::fmt_coord(legend_y + 11.0) +
               "\" font-family=\"sans-serif\" font-size=\"14\">" + s.label + "</text>\n";
        legend_y += 20.0;
    }
    out += "</svg>\n";
    return out;
}

}  // namespace careflow
