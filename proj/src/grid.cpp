#include "anyangle/grid.hpp"

#include <cassert>
#include <cstdlib>

namespace anyangle {

namespace {

constexpr Coord kQuadrants[4] = {{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};

constexpr int64_t floor_div(int64_t a, int64_t b) {  // b > 0
  return a >= 0 ? a / b : -((-a + b - 1) / b);
}

[[noreturn]] void invalid_corner(Coord v) {
  throw std::invalid_argument("invalid-corner at (" + std::to_string(v.x) + "," +
                              std::to_string(v.y) + ")");
}

// Right normal of w for a Left walk (hug side), left normal for Right.
constexpr Coord hug_normal(Coord w, Side s) {
  return s == Side::kLeft ? Coord{w.y, -w.x} : Coord{-w.y, w.x};
}

}  // namespace

CornerKind corner_kind(const OccupancyGrid& g, Coord v) {
  unsigned m = g.quadrant_mask(v);
  switch (m) {
    case 0b0001: case 0b0010: case 0b0100: case 0b1000:
      return CornerKind::kConvex;
    case 0b0111: case 0b1011: case 0b1101: case 0b1110:
      return CornerKind::kNonConvex;
    case 0b0101: case 0b1010:
      return CornerKind::kCheckerboard;
    default:
      return CornerKind::kNone;
  }
}

Coord bisect(const OccupancyGrid& g, Coord v) {
  switch (corner_kind(g, v)) {
    case CornerKind::kConvex:
      for (Coord q : kQuadrants)
        if (g.quadrant_occupied(v, q)) return q;
      break;
    case CornerKind::kNonConvex:
      for (Coord q : kQuadrants)
        if (!g.quadrant_occupied(v, q)) return -q;
      break;
    default:
      break;
  }
  invalid_corner(v);
}

namespace detail {

Coord canonical_hug(const OccupancyGrid& g, Coord v) {
  Coord best{0, 0};
  bool any = false;
  for (Coord q : kQuadrants) {
    if (!g.quadrant_occupied(v, q)) continue;
    if (!any || q.x > best.x || (q.x == best.x && q.y > best.y)) best = q;
    any = true;
  }
  return best;
}

Coord generalized_bisect(const OccupancyGrid& g, Coord v, Coord fallback) {
  Coord sum{0, 0};
  for (Coord q : kQuadrants)
    if (g.quadrant_occupied(v, q)) sum = sum + q;
  return sum.is_zero() ? fallback : sum;
}

Coord departure_edge(const OccupancyGrid& g, Crn at, Side s) {
  Coord hug = at.hug;
  bool checker = corner_kind(g, at.v) == CornerKind::kCheckerboard;
  if (checker && (hug.is_zero() || !g.quadrant_occupied(at.v, hug)))
    hug = canonical_hug(g, at.v);
  static constexpr Coord kCardinals[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (Coord w : kCardinals) {
    Coord occ_q = w + hug_normal(w, s);        // flank that must be occupied
    Coord free_q = w - hug_normal(w, s);       // flank that must be free
    if (!g.quadrant_occupied(at.v, occ_q) || g.quadrant_occupied(at.v, free_q)) continue;
    if (checker && occ_q != hug) continue;     // stay on the hugged contour
    return w;
  }
  invalid_corner(at.v);
}

Crn walk_straight(const OccupancyGrid& g, Coord from, Coord w, Side s,
                  bool stop_at_from, Coord from_hug) {
  if (stop_at_from && corner_kind(g, from) != CornerKind::kNone)
    return {from, from_hug};
  Coord u = from;
  for (;;) {
    u = u + w;
    assert(g.vertex_in_map(u));
    if (corner_kind(g, u) != CornerKind::kNone)
      return {u, -w + hug_normal(w, s)};  // quadrant of the wall just walked
  }
}

std::optional<Crn> contour_next(const OccupancyGrid& g, Crn at, Side s) {
  // Cached: positions and hugs fit comfortably in 16-bit fields.
  auto pack = [](Crn c, Side side, bool valid) {
    uint64_t k = uint64_t(uint16_t(c.v.x)) | uint64_t(uint16_t(c.v.y)) << 16;
    k |= uint64_t((c.hug.x > 0 ? 1 : 0) | (c.hug.y > 0 ? 2 : 0) |
                  (c.hug.is_zero() ? 4 : 0)) << 32;
    k |= uint64_t(side == Side::kLeft ? 1 : 0) << 35;
    k |= uint64_t(valid ? 1 : 0) << 36;
    return k;
  };
  uint64_t key = pack(at, s, true), packed = 0;
  if (g.step_cache_lookup(key, &packed)) {
    if (!(packed >> 36 & 1)) return std::nullopt;
    Crn out;
    out.v = {int64_t(packed & 0xffff), int64_t(packed >> 16 & 0xffff)};
    out.hug = {(packed >> 32 & 1) ? 1 : -1, (packed >> 33 & 1) ? 1 : -1};
    if (packed >> 34 & 1) out.hug = {0, 0};
    return out;
  }
  auto remember = [&](std::optional<Crn> r) {
    uint64_t v;
    if (!r) {
      v = 0;
    } else {
      v = uint64_t(uint16_t(r->v.x)) | uint64_t(uint16_t(r->v.y)) << 16;
      v |= uint64_t((r->hug.x > 0 ? 1 : 0) | (r->hug.y > 0 ? 2 : 0) |
                    (r->hug.is_zero() ? 4 : 0)) << 32;
      v |= uint64_t(1) << 36;
    }
    g.step_cache_store(key, v);
    return r;
  };

  Coord w = departure_edge(g, at, s);
  // The trace leaves the map when its next edge runs along the outer frame.
  if ((w.x == 0 && (at.v.x == 0 || at.v.x == g.width())) ||
      (w.y == 0 && (at.v.y == 0 || at.v.y == g.height())))
    return remember(std::nullopt);
  return remember(walk_straight(g, at.v, w, s, false, {0, 0}));
}

Crn los_step_from_corner(const OccupancyGrid& g, Crn at, Side s) {
  Coord w = departure_edge(g, at, s);
  return walk_straight(g, at.v, w, s, false, {0, 0});
}

}  // namespace detail

Coord edge_dir(const OccupancyGrid& g, Coord v, Side s) {
  if (corner_kind(g, v) == CornerKind::kNone) invalid_corner(v);
  return detail::departure_edge(g, {v, {0, 0}}, s);
}

std::optional<Coord> contour_step(const OccupancyGrid& g, Coord v, Side s) {
  if (corner_kind(g, v) == CornerKind::kNone) invalid_corner(v);
  auto next = detail::contour_next(g, {v, {0, 0}}, s);
  if (!next) return std::nullopt;
  return next->v;
}

namespace {

// ----- exact segment marching ---------------------------------------------
//
// The ray a + t*d is cut at every lattice-line crossing; each open interval
// between consecutive crossings lies either strictly inside one cell or along
// one lattice edge. The first blocked interval stops the march:
//   - an interval inside an occupied cell (the segment crosses its interior);
//   - an interval along an edge whose両 flanking cells are both occupied
//     (sliding along a wall face; single-flank grazing passes).
// All parameters are exact int64 fractions, so vertex grazes and checkerboard
// squeezes are decided without rounding.

struct Frac {
  int64_t num, den;  // den > 0
};
bool frac_less(Frac a, Frac b) { return a.num * b.den < b.num * a.den; }

struct Collision {
  Frac t;            // parameter of the blocked interval's start
  bool at_vertex;    // entry point is a lattice vertex
  Coord vertex;      // valid when at_vertex
  bool vertical;     // else: orientation of the collision edge
  Coord edge_lo;     // lower/left endpoint of the collision edge
  Coord cell;        // blocking cell
};

std::optional<Collision> march(const OccupancyGrid& g, Coord a, Coord d, bool bounded) {
  const int64_t adx = std::abs(d.x), ady = std::abs(d.y);
  Frac t_prev{0, 1};
  int64_t i = 1, j = 1;  // next x-line / y-line crossing indices
  for (;;) {
    bool has_x = adx != 0, has_y = ady != 0;
    Frac tx = has_x ? Frac{i, adx} : Frac{0, 1};
    Frac ty = has_y ? Frac{j, ady} : Frac{0, 1};
    Frac t_next{};
    if (has_x && (!has_y || frac_less(tx, ty))) {
      t_next = tx;
      ++i;
    } else if (has_y && (!has_x || frac_less(ty, tx))) {
      t_next = ty;
      ++j;
    } else {  // both streams cross at once: a lattice vertex
      t_next = tx;
      ++i;
      ++j;
    }
    bool final_interval = false;
    if (bounded && !frac_less(t_next, {1, 1})) {
      t_next = {1, 1};
      final_interval = true;
    }
    if (frac_less(t_prev, t_next)) {
      // Midpoint of the open interval, over denominator q.
      int64_t q = 2 * t_prev.den * t_next.den;
      int64_t tm = t_prev.num * t_next.den + t_next.num * t_prev.den;
      int64_t mx = a.x * q + tm * d.x;
      int64_t my = a.y * q + tm * d.y;
      bool on_x_line = mx % q == 0, on_y_line = my % q == 0;
      bool blocked;
      Coord cell;
      if (on_x_line) {          // segment runs along a vertical lattice line
        int64_t x0 = mx / q, yf = floor_div(my, q);
        blocked = g.is_occupied(x0 - 1, yf) && g.is_occupied(x0, yf);
        cell = {x0, yf};
      } else if (on_y_line) {   // along a horizontal lattice line
        int64_t y0 = my / q, xf = floor_div(mx, q);
        blocked = g.is_occupied(xf, y0 - 1) && g.is_occupied(xf, y0);
        cell = {xf, y0};
      } else {
        cell = {floor_div(mx, q), floor_div(my, q)};
        blocked = g.is_occupied(cell);
      }
      if (blocked) {
        Collision c;
        c.t = t_prev;
        int64_t pq = t_prev.den;
        int64_t pxn = a.x * pq + t_prev.num * d.x;
        int64_t pyn = a.y * pq + t_prev.num * d.y;
        c.at_vertex = pxn % pq == 0 && pyn % pq == 0;
        if (c.at_vertex) {
          c.vertex = {pxn / pq, pyn / pq};
        } else if (pxn % pq == 0) {
          c.vertical = true;
          c.edge_lo = {pxn / pq, floor_div(pyn, pq)};
          c.cell = cell;
        } else {
          c.vertical = false;
          c.edge_lo = {floor_div(pxn, pq), pyn / pq};
          c.cell = cell;
        }
        return c;
      }
    }
    if (final_interval) return std::nullopt;
    t_prev = t_next;
  }
}

// Quadrant diagonal of cell relative to an adjacent vertex.
Coord cell_quadrant(Coord cell, Coord vertex) {
  return {cell.x >= vertex.x ? 1 : -1, cell.y >= vertex.y ? 1 : -1};
}

void resolve_collision(const OccupancyGrid& g, Coord d, const Collision& c, SectorRay& ray) {
  using detail::Crn;
  if (c.at_vertex) {
    Coord v = c.vertex;
    Coord entered{sgn(d.x), sgn(d.y)};
    Coord hug = (entered.x != 0 && entered.y != 0) ? entered : Coord{0, 0};
    Coord v_crn = detail::generalized_bisect(g, v, hug);
    int64_t u = cross(v_crn, d);
    ray.x_left = v;
    ray.x_right = v;
    ray.hug_left = hug;
    ray.hug_right = hug;
    if (u > 0) {
      Crn stepped = detail::los_step_from_corner(g, {v, hug}, Side::kLeft);
      ray.x_left = stepped.v;
      ray.hug_left = stepped.hug;
    } else if (u < 0) {
      Crn stepped = detail::los_step_from_corner(g, {v, hug}, Side::kRight);
      ray.x_right = stepped.v;
      ray.hug_right = stepped.hug;
    }
    return;
  }
  // Edge collision: walk each way along the edge line, hugging the blocking
  // cell, to the first corner. The left walk keeps the obstacle on the right
  // of travel (and vice versa), matching how traces depart these corners.
  Coord e = c.vertical ? Coord{0, 1} : Coord{1, 0};
  Coord w_left = cross(d, e) > 0 ? e : -e;
  for (Side s : {Side::kLeft, Side::kRight}) {
    Coord w = s == Side::kLeft ? w_left : -w_left;
    Coord start = c.edge_lo;
    if ((c.vertical && w.y > 0) || (!c.vertical && w.x > 0)) start = start + e;
    Crn hit = detail::walk_straight(g, start, w, s, true, cell_quadrant(c.cell, start));
    if (s == Side::kLeft) {
      ray.x_left = hit.v;
      ray.hug_left = hit.hug;
    } else {
      ray.x_right = hit.v;
      ray.hug_right = hit.hug;
    }
  }
}

}  // namespace

SectorRay& cast_ray(const OccupancyGrid& g, SectorRay& ray) {
  if (ray.status != RayStatus::kUnknown) return ray;
  Coord d = ray.x_t - ray.x_s;
  if (d.is_zero()) {
    ray.status = RayStatus::kVisible;
    return ray;
  }
  auto hit = march(g, ray.x_s, d, true);
  if (!hit) {
    ray.status = RayStatus::kVisible;
    return ray;
  }
  ray.status = RayStatus::kBlocked;
  resolve_collision(g, d, *hit, ray);
  return ray;
}

SectorRay& project_ray(const OccupancyGrid& g, SectorRay& ray) {
  if (ray.status != RayStatus::kVisible || ray.x_left || ray.x_right) return ray;
  Coord d = ray.x_t - ray.x_s;
  if (d.is_zero()) return ray;
  auto hit = march(g, ray.x_s, d, false);
  assert(hit);  // the outer fence always stops an unbounded march
  if (hit) resolve_collision(g, d, *hit, ray);
  return ray;
}

}  // namespace anyangle
