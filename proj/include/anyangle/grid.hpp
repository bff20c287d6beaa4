#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "anyangle/geometry.hpp"

namespace anyangle {

// Cell occupancy for a W x H grid, addressed by cell coordinates
// (0,0)..(W-1,H-1). Everything outside the stored rectangle reads as
// occupied — the map behaves as if fenced by a one-cell wall — so
// line-of-sight and contour queries need no out-of-bounds special cases.
//
// Vertices live on the integer lattice [0,W] x [0,H]. The four cells around
// a vertex are named by quadrant diagonals:
//
//        (-1,+1) | (+1,+1)
//        --------v--------      cell(quadrant q) = v + (q - (1,1))/2
//        (-1,-1) | (+1,-1)
//
class OccupancyGrid {
 public:
  OccupancyGrid(int64_t width, int64_t height)
      : width_(checked_dim(width)),
        height_(checked_dim(height)),
        cells_(size_t(width * height), 0) {}

  // Copies and moves carry the raster but start with a cold step cache (the
  // cache mutex is not transferable).
  OccupancyGrid(const OccupancyGrid& other)
      : width_(other.width_), height_(other.height_), cells_(other.cells_) {}
  OccupancyGrid(OccupancyGrid&& other) noexcept
      : width_(other.width_), height_(other.height_), cells_(std::move(other.cells_)) {}
  OccupancyGrid& operator=(const OccupancyGrid& other) {
    if (this != &other) {
      width_ = other.width_;
      height_ = other.height_;
      cells_ = other.cells_;
      std::lock_guard<std::mutex> lk(cache_mu_);
      step_cache_.clear();
    }
    return *this;
  }
  OccupancyGrid& operator=(OccupancyGrid&& other) noexcept {
    if (this != &other) {
      width_ = other.width_;
      height_ = other.height_;
      cells_ = std::move(other.cells_);
      std::lock_guard<std::mutex> lk(cache_mu_);
      step_cache_.clear();
    }
    return *this;
  }

  int64_t width() const { return width_; }
  int64_t height() const { return height_; }

  bool is_occupied(int64_t cx, int64_t cy) const {
    if (cx < 0 || cy < 0 || cx >= width_ || cy >= height_) return true;
    return cells_[size_t(cy * width_ + cx)] != 0;
  }
  bool is_occupied(Coord cell) const { return is_occupied(cell.x, cell.y); }

  void set_occupied(int64_t cx, int64_t cy, bool occ) {
    cells_.at(size_t(cy * width_ + cx)) = occ ? 1 : 0;
    std::lock_guard<std::mutex> lk(cache_mu_);
    step_cache_.clear();
  }

  bool vertex_in_map(Coord v) const {
    return v.x >= 0 && v.x <= width_ && v.y >= 0 && v.y <= height_;
  }

  // Occupancy of the cell in quadrant q (a diagonal (+-1,+-1)) around v.
  bool quadrant_occupied(Coord v, Coord q) const {
    return is_occupied(v.x + (q.x - 1) / 2, v.y + (q.y - 1) / 2);
  }

  // Bitmask over quadrants in the order NE, NW, SW, SE (bit 0 = NE).
  unsigned quadrant_mask(Coord v) const {
    unsigned m = 0;
    if (quadrant_occupied(v, {1, 1})) m |= 1;
    if (quadrant_occupied(v, {-1, 1})) m |= 2;
    if (quadrant_occupied(v, {-1, -1})) m |= 4;
    if (quadrant_occupied(v, {1, -1})) m |= 8;
    return m;
  }

  // Cache shared by contour stepping; guarded so concurrent planners can
  // share one grid.
  bool step_cache_lookup(uint64_t key, uint64_t* value) const {
    std::lock_guard<std::mutex> lk(cache_mu_);
    auto it = step_cache_.find(key);
    if (it == step_cache_.end()) return false;
    *value = it->second;
    return true;
  }
  void step_cache_store(uint64_t key, uint64_t value) const {
    std::lock_guard<std::mutex> lk(cache_mu_);
    step_cache_.emplace(key, value);
  }

 private:
  static int64_t checked_dim(int64_t d) {
    if (d < 1 || d > 60000)
      throw std::invalid_argument("grid dimensions out of range");
    return d;
  }

  int64_t width_, height_;
  std::vector<uint8_t> cells_;
  mutable std::mutex cache_mu_;
  mutable std::unordered_map<uint64_t, uint64_t> step_cache_;
};

enum class CornerKind { kNone, kConvex, kNonConvex, kCheckerboard };

// Classifies a vertex by the occupancy of its four quadrants: one occupied
// cell is a convex corner, three is a nonconvex corner, two sharing only the
// vertex is a checkerboard crossing. Everything else (including a flat run of
// wall) is kNone.
CornerKind corner_kind(const OccupancyGrid& g, Coord v);

// Unit diagonal pointing from a corner into its obstacle: the occupied
// quadrant at a convex corner, minus the free quadrant at a nonconvex one.
// Throws invalid-corner for other vertices (checkerboards are ambiguous
// without trace context).
Coord bisect(const OccupancyGrid& g, Coord v);

// Unit cardinal along the boundary edge a side-s contour departs a corner by.
// A Left trace keeps occupied cells on the right of travel, a Right trace on
// the left. At checkerboards the contour hugging the largest occupied
// quadrant (by lexicographic diagonal) is used.
Coord edge_dir(const OccupancyGrid& g, Coord v, Side s);

// Walks the contour one step from corner v: departs by edge_dir, passes
// straight through flat wall vertices, and stops at the next corner. Returns
// nullopt when the departure edge lies on a map boundary line — the contour
// leaves the map there. Throws invalid-corner when v is not a corner.
std::optional<Coord> contour_step(const OccupancyGrid& g, Coord v, Side s);

enum class RayStatus { kUnknown, kVisible, kBlocked };

// A directed ray between two vertices plus everything learned about it: the
// visibility status after casting and, after a collision or projection, the
// corner each side's contour walk ended at. hug_left/hug_right carry the
// occupied quadrant hugged at those corners so traces resume on the right
// contour at checkerboard vertices.
struct SectorRay {
  Coord x_s, x_t;
  RayStatus status = RayStatus::kUnknown;
  std::optional<Coord> x_left, x_right;
  Coord hug_left{0, 0}, hug_right{0, 0};
};

// Casts x_s -> x_t. On a clear segment sets status kVisible; on a collision
// sets kBlocked and fills x_left/x_right with the corners found by walking
// the blocking contour to either side of the ray. Rays already cast are
// returned unchanged. Vertices may graze the segment; a diagonal squeeze
// between two checkerboard cells is passable, sliding along a wall face is
// not.
SectorRay& cast_ray(const OccupancyGrid& g, SectorRay& ray);

// Extends a visible ray beyond x_t until the (always present) fence stops
// it, filling x_left/x_right with the collision corners. Status stays
// kVisible. Rays already projected, or not yet cast visible, are returned
// unchanged.
SectorRay& project_ray(const OccupancyGrid& g, SectorRay& ray);

namespace detail {

// A contour position: a vertex plus the occupied quadrant being hugged.
// The hug matters only at checkerboard vertices, where two contours cross;
// zero means "derive canonically".
struct Crn {
  Coord v;
  Coord hug{0, 0};
};

// Lexicographically largest occupied quadrant diagonal at v; zero if none.
Coord canonical_hug(const OccupancyGrid& g, Coord v);

// Sum of occupied quadrant diagonals (the generalized into-obstacle
// direction). Falls back to `fallback` when the sum cancels (checkerboard).
Coord generalized_bisect(const OccupancyGrid& g, Coord v, Coord fallback);

// Departure edge of the side-s contour at a corner/flat vertex, hug-aware.
Coord departure_edge(const OccupancyGrid& g, Crn at, Side s);

// Straight walk from `from` along unit cardinal w with the hugged obstacle
// on the right of travel for Left, left for Right; continues through flats
// and returns the first corner-kind vertex (with arrival hug). When
// stop_at_from is set and `from` is already a corner the walk returns it
// immediately with hug `from_hug`. Used by the ray walker; unlike the public
// contour step it may travel along map boundary lines.
Crn walk_straight(const OccupancyGrid& g, Coord from, Coord w, Side s,
                  bool stop_at_from, Coord from_hug);

// One contour step with hug threading and the boundary-exit rule.
std::optional<Crn> contour_next(const OccupancyGrid& g, Crn at, Side s);

// Forced step off a collision corner (no boundary-exit rule).
Crn los_step_from_corner(const OccupancyGrid& g, Crn at, Side s);

}  // namespace detail

}  // namespace anyangle
