#pragma once

#include <optional>
#include <vector>

#include "anyangle/grid.hpp"

namespace anyangle {

// Reference visibility predicate, implemented independently of the ray
// walker: enumerates the cells touched by the open segment column by column
// with exact rational row intervals. Semantics match cast_ray: a segment is
// blocked by crossing a cell's open interior, or by running along a lattice
// edge both of whose flanking cells are occupied.
bool visible(const OccupancyGrid& g, Coord a, Coord b);

// Reference shortest-path machinery: Dijkstra over the visibility graph whose
// vertices are the start, the goal, and every convex or checkerboard corner.
// Building the corner adjacency is the expensive part, so it can be reused
// across queries on one grid.
class VisibilityGraph {
 public:
  explicit VisibilityGraph(const OccupancyGrid& g);

  std::optional<double> shortest_path_cost(Coord start, Coord goal,
                                           std::vector<Coord>* path = nullptr) const;

  const std::vector<Coord>& corners() const { return corners_; }

 private:
  const OccupancyGrid& grid_;
  std::vector<Coord> corners_;
  size_t words_per_row_;
  std::vector<uint64_t> adjacency_;  // corner-to-corner visibility bitmatrix

  bool adj(size_t i, size_t j) const {
    return adjacency_[i * words_per_row_ + j / 64] >> (j % 64) & 1;
  }
};

// One-shot convenience over VisibilityGraph.
std::optional<double> oracle_shortest_path(const OccupancyGrid& g, Coord start, Coord goal,
                                           std::vector<Coord>* path = nullptr);

// True when the polyline is a locally shortest route: every segment has
// line-of-sight and every interior vertex either continues straight or wraps
// an occupied quadrant on the inside of its turn.
bool is_taut_path(const OccupancyGrid& g, const std::vector<Coord>& path);

}  // namespace anyangle
