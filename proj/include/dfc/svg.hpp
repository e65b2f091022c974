#pragma once

#include <string>
#include <vector>

#include "dfc/types.hpp"

namespace dfc {

struct PlotSeries {
    std::string name;
    Vector y;
};

// Plain polyline line chart: axes box, ticks, one colored path per series.
void write_svg_plot(const std::string& path, const std::string& title,
                    const Vector& x, const std::vector<PlotSeries>& series);

}  // namespace dfc
