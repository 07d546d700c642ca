#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "reso/linalg.hpp"

namespace reso::cli {

struct ScatterSeries {
    std::string label;
    std::string color = "#1f77b4";
    bool hollow = false;
    std::vector<cd> points;
};

/// SVG 1.1 scatter of complex points (Re horizontal, Im vertical) with axes and a legend.
void write_scatter_svg(std::ostream& out, const std::vector<ScatterSeries>& series, const std::string& title);

}  // namespace reso::cli
