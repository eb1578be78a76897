#pragma once

#include <optional>
#include <string>
#include <vector>

namespace sfv::svg {

enum class Marker { Dot, Triangle, Cross };

struct Point {
    double x = 0.0;
    double y = 0.0;
    Marker marker = Marker::Dot;
};

/// A polyline drawn over the scatter. Its data coordinates are also written
/// to data-x / data-y attributes so they can be recovered exactly.
struct Overlay {
    std::vector<double> x;
    std::vector<double> y;
    std::string label;
    bool dashed = false;
};

struct Plot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Point> points;
    std::vector<Overlay> overlays;
    /// Legend text per marker kind, in Dot/Triangle/Cross order; empty
    /// strings are omitted.
    std::vector<std::string> legend;
    /// When set, x values at or beyond this are drawn in a shaded band at
    /// the right edge (labelled with `band_label`).
    std::optional<double> band_from_x;
    std::string band_label;
};

/// Self-contained SVG 1.1 document with a fixed 640x480 viewport. Throws
/// InvalidArgument on an empty point set or a non-finite coordinate.
std::string render_scatter(const Plot& plot);

/// Round tick values lying within [lo, hi].
std::vector<double> nice_ticks(double lo, double hi, int target = 6);

} // namespace sfv::svg
