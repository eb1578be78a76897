#include "sfv/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "sfv/csv.hpp"
#include "sfv/error.hpp"

namespace sfv::svg {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", std::abs(v) < 1e-12 ? 0.0 : v);
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

struct Range {
    double lo = 0.0;
    double hi = 1.0;

    void widen() {
        if (hi - lo <= 0.0) {
            const double pad = std::max(1.0, std::abs(lo) * 0.1);
            lo -= pad;
            hi += pad;
        }
    }
};

void marker(std::ostringstream& os, Marker m, double cx, double cy, const char* role = "marker") {
    switch (m) {
    case Marker::Dot:
        os << "<circle class=\"" << role << " dot\" cx=\"" << num(cx) << "\" cy=\"" << num(cy) << "\" r=\"3\"/>\n";
        break;
    case Marker::Triangle:
        os << "<polygon class=\"" << role << " triangle\" points=\"" << num(cx) << ',' << num(cy - 4) << ' ' << num(cx - 3.5)
           << ',' << num(cy + 3) << ' ' << num(cx + 3.5) << ',' << num(cy + 3) << "\"/>\n";
        break;
    case Marker::Cross:
        os << "<path class=\"" << role << " cross\" d=\"M" << num(cx - 3.5) << ' ' << num(cy - 3.5) << "L" << num(cx + 3.5)
           << ' ' << num(cy + 3.5) << "M" << num(cx - 3.5) << ' ' << num(cy + 3.5) << "L" << num(cx + 3.5) << ' '
           << num(cy - 3.5) << "\"/>\n";
        break;
    }
}

} // namespace

std::vector<double> nice_ticks(double lo, double hi, int target) {
    if (!(hi > lo)) return {lo};
    const double raw = (hi - lo) / std::max(target, 1);
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double norm = raw / mag;
    const double step = (norm < 1.5 ? 1.0 : norm < 3.0 ? 2.0 : norm < 7.0 ? 5.0 : 10.0) * mag;
    std::vector<double> ticks;
    const double first = std::ceil(lo / step - 1e-9);
    for (int i = 0;; ++i) {
        const double t = (first + i) * step;
        if (t > hi + step * 1e-9) break;
        ticks.push_back(t);
    }
    return ticks;
}

std::string render_scatter(const Plot& plot) {
    if (plot.points.empty()) throw InvalidArgument("a scatter plot needs at least one point");
    for (std::size_t i = 0; i < plot.points.size(); ++i) {
        if (!std::isfinite(plot.points[i].x) || !std::isfinite(plot.points[i].y))
            throw InvalidArgument("point " + std::to_string(i) + " has a non-finite coordinate");
    }

    Range xr{plot.points[0].x, plot.points[0].x};
    Range yr{plot.points[0].y, plot.points[0].y};
    auto include = [](Range& r, double v) {
        r.lo = std::min(r.lo, v);
        r.hi = std::max(r.hi, v);
    };
    for (const auto& pt : plot.points) {
        include(xr, pt.x);
        include(yr, pt.y);
    }
    for (const auto& ov : plot.overlays) {
        for (std::size_t i = 0; i < ov.x.size() && i < ov.y.size(); ++i) {
            if (!std::isfinite(ov.x[i]) || !std::isfinite(ov.y[i]))
                throw InvalidArgument("overlay '" + ov.label + "' has a non-finite coordinate at index " +
                                      std::to_string(i));
            include(xr, ov.x[i]);
            include(yr, ov.y[i]);
        }
    }
    xr.widen();
    yr.widen();
    const double xpad = 0.04 * (xr.hi - xr.lo);
    const double ypad = 0.04 * (yr.hi - yr.lo);
    xr.lo -= xpad;
    xr.hi += xpad;
    yr.lo -= ypad;
    yr.hi += ypad;

    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto sx = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto sy = [&](double y) { return kTop + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph; };

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"640\" height=\"480\" "
          "viewBox=\"0 0 640 480\">\n"
       << "<style>.dot{fill:#1f4e9c}.triangle{fill:none;stroke:#b03a2e;stroke-width:1.2}"
          ".cross{fill:none;stroke:#222;stroke-width:1.4}.axis{stroke:#000;stroke-width:1}"
          ".grid{stroke:#ddd;stroke-width:0.5}text{font-family:sans-serif;font-size:11px}</style>\n"
       << "<rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"#fff\"/>\n";
    if (!plot.title.empty())
        os << "<text x=\"320\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(plot.title)
           << "</text>\n";

    if (plot.band_from_x) {
        const double bx = std::clamp(sx(*plot.band_from_x) - 6.0, kLeft, kLeft + pw);
        os << "<rect class=\"band\" x=\"" << num(bx) << "\" y=\"" << num(kTop) << "\" width=\""
           << num(kLeft + pw - bx) << "\" height=\"" << num(ph) << "\" fill=\"#f0f0f0\"/>\n";
        if (!plot.band_label.empty())
            os << "<text x=\"" << num(bx + 3) << "\" y=\"" << num(kTop + 12) << "\">" << escape(plot.band_label)
               << "</text>\n";
    }

    for (double t : nice_ticks(xr.lo, xr.hi)) {
        const double x = sx(t);
        os << "<line class=\"grid\" x1=\"" << num(x) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(x) << "\" y2=\""
           << num(kTop + ph) << "\"/>\n"
           << "<text x=\"" << num(x) << "\" y=\"" << num(kTop + ph + 16) << "\" text-anchor=\"middle\">"
           << tick_label(t) << "</text>\n";
    }
    for (double t : nice_ticks(yr.lo, yr.hi)) {
        const double y = sy(t);
        os << "<line class=\"grid\" x1=\"" << num(kLeft) << "\" y1=\"" << num(y) << "\" x2=\"" << num(kLeft + pw)
           << "\" y2=\"" << num(y) << "\"/>\n"
           << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">"
           << tick_label(t) << "</text>\n";
    }
    os << "<rect class=\"axis\" x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(pw)
       << "\" height=\"" << num(ph) << "\" fill=\"none\"/>\n";
    os << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 18)
       << "\" text-anchor=\"middle\">" << escape(plot.x_label) << "</text>\n";
    os << "<text x=\"18\" y=\"" << num(kTop + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
       << num(kTop + ph / 2) << ")\">" << escape(plot.y_label) << "</text>\n";

    for (const auto& ov : plot.overlays) {
        std::string xs, ys, pts;
        const std::size_t count = std::min(ov.x.size(), ov.y.size());
        for (std::size_t i = 0; i < count; ++i) {
            if (i) {
                xs += ' ';
                ys += ' ';
                pts += ' ';
            }
            xs += csv::format_double(ov.x[i]);
            ys += csv::format_double(ov.y[i]);
            pts += num(sx(ov.x[i])) + ',' + num(sy(ov.y[i]));
        }
        os << "<polyline class=\"overlay\" data-label=\"" << escape(ov.label) << "\" data-x=\"" << xs
           << "\" data-y=\"" << ys << "\" points=\"" << pts << "\" fill=\"none\" stroke=\"#555\" stroke-width=\"1.5\""
           << (ov.dashed ? " stroke-dasharray=\"5,4\"" : "") << "/>\n";
    }

    for (const auto& pt : plot.points) marker(os, pt.marker, sx(pt.x), sy(pt.y));

    double ly = kTop + 14;
    const Marker kinds[] = {Marker::Dot, Marker::Triangle, Marker::Cross};
    for (std::size_t i = 0; i < plot.legend.size() && i < 3; ++i) {
        if (plot.legend[i].empty()) continue;
        os << "<g class=\"legend\">\n";
        marker(os, kinds[i], kLeft + 14, ly - 4, "legend-marker");
        os << "<text x=\"" << num(kLeft + 24) << "\" y=\"" << num(ly) << "\">" << escape(plot.legend[i])
           << "</text>\n</g>\n";
        ly += 16;
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace sfv::svg
