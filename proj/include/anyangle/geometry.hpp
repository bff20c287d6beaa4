#pragma once

#include <cmath>
#include <cstdint>
#include <functional>

namespace anyangle {

// Integer lattice coordinate. The grid is W x H cells, so vertices live on
// [0, W] x [0, H]; x grows rightward and y grows upward.
struct Coord {
  int64_t x = 0;
  int64_t y = 0;

  friend constexpr Coord operator+(Coord a, Coord b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Coord operator-(Coord a, Coord b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Coord operator-(Coord a) { return {-a.x, -a.y}; }
  friend constexpr Coord operator*(int64_t k, Coord a) { return {k * a.x, k * a.y}; }
  friend constexpr bool operator==(Coord a, Coord b) { return a.x == b.x && a.y == b.y; }
  friend constexpr bool operator!=(Coord a, Coord b) { return !(a == b); }
  constexpr bool is_zero() const { return x == 0 && y == 0; }
};

constexpr int64_t cross(Coord a, Coord b) { return a.x * b.y - a.y * b.x; }
constexpr int64_t dot(Coord a, Coord b) { return a.x * b.x + a.y * b.y; }

inline double norm(Coord a) { return std::hypot(double(a.x), double(a.y)); }
inline double distance(Coord a, Coord b) { return norm(b - a); }

constexpr int sgn(int64_t v) { return (v > 0) - (v < 0); }

// Trace side: a Left trace walks its obstacle contour keeping occupied cells
// on the right of travel (counterclockwise around a lone obstacle), a Right
// trace is the mirror image. The numeric values act as winding signs.
enum class Side : int { kLeft = -1, kRight = 1 };
constexpr int sgn(Side s) { return static_cast<int>(s); }
constexpr Side opposite(Side s) { return s == Side::kLeft ? Side::kRight : Side::kLeft; }

// Tree direction: the source tree hangs off the start vertex, the target tree
// off the goal vertex. Values are winding signs like Side.
enum class Tree : int { kSource = -1, kTarget = 1 };
constexpr int sgn(Tree t) { return static_cast<int>(t); }
constexpr Tree opposite(Tree t) { return t == Tree::kSource ? Tree::kTarget : Tree::kSource; }

struct CoordHash {
  size_t operator()(Coord c) const {
    uint64_t h = (uint64_t(c.x) << 32) ^ uint64_t(uint32_t(c.y));
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdull;
    h ^= h >> 33;
    return size_t(h);
  }
};

}  // namespace anyangle
