#pragma once

// Self-contained SVG line plot for hockey curves: axes, ticks, the sampled
// density path, and a dashed min(rho, zeta) reference overlay.

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <string>

#include "arw/experiments.hpp"

namespace arw {

namespace svg_detail {
inline std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}
} // namespace svg_detail

inline std::string hockey_svg(const HockeyCurve& curve, double zeta_ref) {
    using svg_detail::px;
    const double width = 900, height = 520;
    const double ml = 70, mr = 30, mt = 30, mb = 55;
    const double pw = width - ml - mr, ph = height - mt - mb;

    double xmax = 0.0;
    for (const auto& p : curve.points)
        xmax = std::max(xmax, p.rho);
    if (xmax <= 0)
        xmax = 1.0;
    const double ymax = 1.0;

    auto X = [&](double rho) { return ml + pw * rho / xmax; };
    auto Y = [&](double d) { return mt + ph * (1.0 - d / ymax); };

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n";
    os << "<svg width=\"" << width << "\" height=\"" << height
       << "\" version=\"1.1\" xmlns=\"http://www.w3.org/2000/svg\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height
       << "\" fill=\"white\"/>\n";

    // axes
    os << "<line x1=\"" << px(ml) << "\" y1=\"" << px(mt + ph) << "\" x2=\"" << px(ml + pw)
       << "\" y2=\"" << px(mt + ph) << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << px(ml) << "\" y1=\"" << px(mt) << "\" x2=\"" << px(ml) << "\" y2=\""
       << px(mt + ph) << "\" stroke=\"black\"/>\n";

    for (double t = 0.0; t <= xmax + 1e-9; t += 0.25) {
        os << "<line x1=\"" << px(X(t)) << "\" y1=\"" << px(mt + ph) << "\" x2=\"" << px(X(t))
           << "\" y2=\"" << px(mt + ph + 6) << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << px(X(t)) << "\" y=\"" << px(mt + ph + 22)
           << "\" font-size=\"13\" text-anchor=\"middle\">" << fmt_double(t) << "</text>\n";
    }
    for (double t = 0.0; t <= ymax + 1e-9; t += 0.25) {
        os << "<line x1=\"" << px(ml - 6) << "\" y1=\"" << px(Y(t)) << "\" x2=\"" << px(ml)
           << "\" y2=\"" << px(Y(t)) << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << px(ml - 10) << "\" y=\"" << px(Y(t) + 4)
           << "\" font-size=\"13\" text-anchor=\"end\">" << fmt_double(t) << "</text>\n";
    }
    os << "<text x=\"" << px(ml + pw / 2) << "\" y=\"" << px(height - 12)
       << "\" font-size=\"15\" text-anchor=\"middle\">rho</text>\n";
    os << "<text x=\"18\" y=\"" << px(mt + ph / 2)
       << "\" font-size=\"15\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << px(mt + ph / 2)
       << ")\">D</text>\n";

    // reference min(rho, zeta)
    if (zeta_ref > 0 && zeta_ref < 1) {
        os << "<polyline fill=\"none\" stroke=\"red\" stroke-dasharray=\"6,4\" points=\"";
        os << px(X(0)) << ',' << px(Y(0)) << ' ';
        if (zeta_ref < xmax) {
            os << px(X(zeta_ref)) << ',' << px(Y(zeta_ref)) << ' ';
            os << px(X(xmax)) << ',' << px(Y(zeta_ref));
        } else {
            os << px(X(xmax)) << ',' << px(Y(xmax));
        }
        os << "\"/>\n";
        os << "<text x=\"" << px(ml + pw - 4) << "\" y=\"" << px(Y(zeta_ref) - 6)
           << "\" font-size=\"13\" fill=\"red\" text-anchor=\"end\">zeta = " << fmt_double(zeta_ref)
           << "</text>\n";
    }

    // sampled curve
    if (!curve.points.empty()) {
        os << "<polyline fill=\"none\" stroke=\"blue\" stroke-width=\"1.5\" points=\"";
        for (const auto& p : curve.points)
            os << px(X(p.rho)) << ',' << px(Y(p.density)) << ' ';
        os << "\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace arw
