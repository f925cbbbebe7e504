#include "passdrop/report.hpp"

#include "passdrop/errors.hpp"
#include "passdrop/lexicon.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <vector>

#include <fmt/format.h>

namespace passdrop::report {

namespace {

constexpr double kWidth = 640, kHeight = 480;
constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 60;

constexpr std::array kClassColors{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#7f7f7f"};
constexpr std::array kExtraColors{"#e377c2", "#bcbd22", "#17becf", "#393b79", "#637939"};

std::string escape(std::string_view s) {
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
    double lo = 0, hi = 0;
    void widen(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
};

Range padded(Range r) {
    if (r.hi - r.lo < 1e-12) return {r.lo - 1, r.hi + 1};
    const double pad = 0.05 * (r.hi - r.lo);
    return {r.lo - pad, r.hi + pad};
}

void check_finite(double v, std::string_view what, std::string_view label) {
    if (!std::isfinite(v)) throw ReportError(fmt::format("non-finite {} for point '{}'", what, label));
}

std::string num(double v) { return fmt::format("{:.2f}", v); }

} // namespace

std::string group_color(std::string_view group) {
    for (std::size_t i = 0; i < kAllClasses.size(); ++i)
        if (to_string(kAllClasses[i]) == group) return kClassColors[i];
    std::size_t h = 0;
    for (char c : group) h = h * 31 + static_cast<unsigned char>(c);
    return kExtraColors[h % kExtraColors.size()];
}

std::string emit_scatter(std::span<const ScatterPoint> points, const AxesLabels& axes,
                         std::span<const ReferenceLine> references) {
    if (points.empty()) throw ReportError("scatter plot needs at least one point");
    Range rx{points[0].x, points[0].x}, ry{points[0].y, points[0].y};
    for (const auto& p : points) {
        check_finite(p.x, "x", p.label);
        check_finite(p.y, "y", p.label);
        rx.widen(p.x);
        ry.widen(p.y);
        if (p.ci_x) {
            check_finite(p.ci_x->first, "x interval", p.label);
            check_finite(p.ci_x->second, "x interval", p.label);
            rx.widen(p.ci_x->first);
            rx.widen(p.ci_x->second);
        }
        if (p.ci_y) {
            check_finite(p.ci_y->first, "y interval", p.label);
            check_finite(p.ci_y->second, "y interval", p.label);
            ry.widen(p.ci_y->first);
            ry.widen(p.ci_y->second);
        }
    }
    for (const auto& r : references) {
        check_finite(r.y, "reference", r.label);
        ry.widen(r.y);
    }
    rx = padded(rx);
    ry = padded(ry);
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    auto sx = [&](double v) { return kLeft + (v - rx.lo) / (rx.hi - rx.lo) * pw; };
    auto sy = [&](double v) { return kTop + ph - (v - ry.lo) / (ry.hi - ry.lo) * ph; };

    std::string svg;
    auto out = std::back_inserter(svg);
    fmt::format_to(out,
                   "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
                   "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
                   "font-family=\"sans-serif\" font-size=\"11\">\n"
                   "<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n",
                   kWidth, kHeight);
    if (!axes.title.empty())
        fmt::format_to(out, "<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
                       num(kLeft + pw / 2), escape(axes.title));

    // Frame, ticks and axis labels.
    fmt::format_to(out, "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", num(kLeft),
                   num(kTop), num(pw), num(ph));
    for (int i = 0; i <= 4; ++i) {
        const double vx = rx.lo + (rx.hi - rx.lo) * i / 4.0, vy = ry.lo + (ry.hi - ry.lo) * i / 4.0;
        fmt::format_to(out, "<line class=\"tick\" x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n",
                       num(sx(vx)), num(kTop + ph), num(kTop + ph + 5));
        fmt::format_to(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{:.3g}</text>\n", num(sx(vx)),
                       num(kTop + ph + 18), vx);
        fmt::format_to(out, "<line class=\"tick\" x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n",
                       num(kLeft - 5), num(sy(vy)), num(kLeft));
        fmt::format_to(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.3g}</text>\n", num(kLeft - 8),
                       num(sy(vy) + 4), vy);
    }
    fmt::format_to(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", num(kLeft + pw / 2),
                   num(kHeight - 15), escape(axes.x));
    fmt::format_to(out, "<text transform=\"translate(18 {}) rotate(-90)\" text-anchor=\"middle\">{}</text>\n",
                   num(kTop + ph / 2), escape(axes.y));

    for (const auto& r : references) {
        fmt::format_to(out,
                       "<line class=\"reference\" x1=\"{0}\" y1=\"{2}\" x2=\"{1}\" y2=\"{2}\" stroke=\"{3}\" "
                       "stroke-dasharray=\"4 3\"/>\n",
                       num(kLeft), num(kLeft + pw), num(sy(r.y)), group_color(r.group));
        fmt::format_to(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-size=\"9\">{}</text>\n",
                       num(kLeft + pw - 4), num(sy(r.y) - 3), escape(r.label));
    }

    // Error bars first so markers sit on top.
    for (const auto& p : points) {
        if (p.ci_x && p.ci_x->second - p.ci_x->first > 0)
            fmt::format_to(out,
                           "<line class=\"errbar\" x1=\"{0}\" y1=\"{2}\" x2=\"{1}\" y2=\"{2}\" stroke=\"{3}\" "
                           "stroke-opacity=\"0.6\"/>\n",
                           num(sx(p.ci_x->first)), num(sx(p.ci_x->second)), num(sy(p.y)), group_color(p.group));
        if (p.ci_y && p.ci_y->second - p.ci_y->first > 0)
            fmt::format_to(out,
                           "<line class=\"errbar\" x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"{3}\" "
                           "stroke-opacity=\"0.6\"/>\n",
                           num(sx(p.x)), num(sy(p.ci_y->first)), num(sy(p.ci_y->second)), group_color(p.group));
    }
    for (const auto& p : points) {
        fmt::format_to(out, "<circle class=\"marker\" cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"{}\"><title>{}</title></circle>\n",
                       num(sx(p.x)), num(sy(p.y)), group_color(p.group), escape(p.label));
        if (!p.label.empty())
            fmt::format_to(out, "<text x=\"{}\" y=\"{}\" font-size=\"9\">{}</text>\n", num(sx(p.x) + 6),
                           num(sy(p.y) - 4), escape(p.label));
    }

    // Legend in order of first appearance.
    std::vector<std::string> groups;
    for (const auto& p : points)
        if (std::find(groups.begin(), groups.end(), p.group) == groups.end()) groups.push_back(p.group);
    double ly = kTop + 10;
    for (const auto& g : groups) {
        fmt::format_to(out, "<rect class=\"legend\" x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{}\"/>\n",
                       num(kWidth - kRight + 15), num(ly - 9), group_color(g));
        fmt::format_to(out, "<text x=\"{}\" y=\"{}\">{}</text>\n", num(kWidth - kRight + 30), num(ly),
                       escape(g.empty() ? "(none)" : g));
        ly += 16;
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace passdrop::report
