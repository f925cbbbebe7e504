#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>

namespace passdrop::report {

struct ScatterPoint {
    double x = 0.0;
    double y = 0.0;
    std::string label;
    std::string group; // colour key, normally the verb class
    std::optional<std::pair<double, double>> ci_x;
    std::optional<std::pair<double, double>> ci_y;
};

struct AxesLabels {
    std::string x;
    std::string y;
    std::string title;
};

// Dashed horizontal line with a caption, e.g. a published reference value.
struct ReferenceLine {
    double y = 0.0;
    std::string label;
    std::string group;
};

// Standalone SVG scatter plot. Error bars are drawn only for CIs of positive
// width. Output depends on the inputs alone. Throws ReportError on an empty
// point list or any non-finite coordinate.
std::string emit_scatter(std::span<const ScatterPoint> points, const AxesLabels& axes,
                         std::span<const ReferenceLine> references = {});

// Fill colour for a group; the seven verb classes have fixed colours.
std::string group_color(std::string_view group);

} // namespace passdrop::report
