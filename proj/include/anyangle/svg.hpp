#pragma once

#include <string>
#include <vector>

#include "anyangle/grid.hpp"

namespace anyangle {

// Renders the raster and an optional path (any vertex order) as SVG 1.1:
// one rectangle per occupied cell, one polyline when the path is non-empty,
// circular markers on its endpoints.  The y axis is flipped into screen
// coordinates.
std::string render_svg(const OccupancyGrid& grid, const std::vector<Coord>& path = {});

}  // namespace anyangle
