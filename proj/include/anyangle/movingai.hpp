#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "anyangle/grid.hpp"

namespace anyangle {

// One line of a .scen file.  Coordinates are stored in this library's
// bottom-up cell convention (file row 0 maps to the topmost cell band),
// so they can be fed to scale_map/transform_point directly.
struct Scenario {
  int bucket = 0;
  std::string map_name;
  int64_t map_width = 0;
  int64_t map_height = 0;
  Coord start{0, 0};
  Coord goal{0, 0};
  double octile_ref = 0.0;  // reference octile length from the file; never an any-angle ground truth
};

struct MapCharPolicy {
  bool swamp_passable = true;  // 'S'
  bool water_passable = false; // 'W'
};

// Parses the standard grid-map text format: a `type octile` header,
// `height`/`width` lines, a `map` marker, then height rows of width cells.
// The first file row becomes the top band of the grid (cell y = height-1).
// Throws std::runtime_error on malformed-header / dimension-mismatch /
// unknown-cell-char.
OccupancyGrid parse_map(std::string_view text, MapCharPolicy policy = {});

// Emits the same format using '.' and '@' only; parse_map(serialize_map(g))
// reproduces the raster exactly.
std::string serialize_map(const OccupancyGrid& grid);

// Parses a `version 1` scenario file.  Throws std::runtime_error with the
// offending line number on malformed lines.
std::vector<Scenario> parse_scen(std::string_view text);

// Doubles the raster: every cell becomes a k x k block.  Only k = 2 is
// supported.
OccupancyGrid scale_map(const OccupancyGrid& grid, int k = 2);

// Maps an endpoint of an unscaled instance into the doubled map: 2p + (1,1),
// the centre vertex of the scaled block of the cell p names.
Coord transform_point(Coord p);

}  // namespace anyangle
