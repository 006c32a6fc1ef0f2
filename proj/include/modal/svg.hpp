#pragma once

#include <string>
#include <vector>

#include "modal/common.hpp"

namespace modal {

struct ScatterOptions {
    double limit = 8.0;       // data window [-limit, limit]^2, fixed viewBox
    double point_radius = 2.0;
    std::string title;
    std::vector<bool> highlight;  // optional per-point red override
};

// Scatter plot of the first two coordinates, colored by label (negative
// labels render gray). Output is deterministic text; no timestamps.
void write_scatter_svg(const std::string& path, const std::vector<Vec>& points,
                       const std::vector<int>& labels, const ScatterOptions& opt = {});

}  // namespace modal
