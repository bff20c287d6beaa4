#include "anyangle/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <queue>

namespace anyangle {

namespace {

constexpr int64_t floor_div(int64_t a, int64_t b) {  // b > 0
  return a >= 0 ? a / b : -((-a + b - 1) / b);
}

double euclid(Coord a, Coord b) {
  int64_t dx = b.x - a.x, dy = b.y - a.y;
  return std::sqrt(double(dx * dx + dy * dy));
}

}  // namespace

bool visible(const OccupancyGrid& g, Coord a, Coord b) {
  if (a == b) return true;
  if (a.x == b.x) {  // vertical: runs along a lattice line, wall faces block
    int64_t lo = std::min(a.y, b.y), hi = std::max(a.y, b.y);
    for (int64_t y = lo; y < hi; ++y)
      if (g.is_occupied(a.x - 1, y) && g.is_occupied(a.x, y)) return false;
    return true;
  }
  if (a.y == b.y) {
    int64_t lo = std::min(a.x, b.x), hi = std::max(a.x, b.x);
    for (int64_t x = lo; x < hi; ++x)
      if (g.is_occupied(x, a.y - 1) && g.is_occupied(x, a.y)) return false;
    return true;
  }
  if (a.x > b.x) std::swap(a, b);
  const int64_t dx = b.x - a.x, dy = b.y - a.y;  // dx > 0
  for (int64_t c = a.x; c < b.x; ++c) {
    // Row numbers the open piece inside column strip (c, c+1) sweeps, as
    // exact fractions y = num/dx.
    int64_t n0 = a.y * dx + (c - a.x) * dy;
    int64_t n1 = a.y * dx + (c + 1 - a.x) * dy;
    int64_t nmin = std::min(n0, n1), nmax = std::max(n0, n1);
    for (int64_t k = floor_div(nmin, dx); k * dx < nmax; ++k) {
      if ((k + 1) * dx <= nmin) continue;  // row entirely below the piece
      if (g.is_occupied(c, k)) return false;
    }
  }
  return true;
}

VisibilityGraph::VisibilityGraph(const OccupancyGrid& g) : grid_(g) {
  for (int64_t y = 0; y <= g.height(); ++y)
    for (int64_t x = 0; x <= g.width(); ++x) {
      CornerKind k = corner_kind(g, {x, y});
      if (k == CornerKind::kConvex || k == CornerKind::kCheckerboard)
        corners_.push_back({x, y});
    }
  size_t n = corners_.size();
  words_per_row_ = (n + 63) / 64;
  adjacency_.assign(n * words_per_row_, 0);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j)
      if (visible(g, corners_[i], corners_[j])) {
        adjacency_[i * words_per_row_ + j / 64] |= uint64_t(1) << (j % 64);
        adjacency_[j * words_per_row_ + i / 64] |= uint64_t(1) << (i % 64);
      }
}

std::optional<double> VisibilityGraph::shortest_path_cost(Coord start, Coord goal,
                                                          std::vector<Coord>* path) const {
  if (path) path->clear();
  if (start == goal) {
    if (path) path->push_back(start);
    return 0.0;
  }
  if (visible(grid_, start, goal)) {
    if (path) *path = {goal, start};
    return euclid(start, goal);
  }
  const size_t n = corners_.size();
  const size_t i_start = n, i_goal = n + 1;
  auto coord_of = [&](size_t i) {
    return i < n ? corners_[i] : (i == i_start ? start : goal);
  };
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n + 2, kInf);
  std::vector<size_t> prev(n + 2, size_t(-1));
  std::vector<char> done(n + 2, 0);
  std::vector<char> sees_goal(n, 0);
  for (size_t j = 0; j < n; ++j) sees_goal[j] = visible(grid_, corners_[j], goal) ? 1 : 0;

  using Entry = std::pair<double, size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  dist[i_start] = 0.0;
  open.push({0.0, i_start});
  while (!open.empty()) {
    auto [dc, u] = open.top();
    open.pop();
    if (done[u]) continue;
    done[u] = 1;
    if (u == i_goal) break;
    auto relax = [&](size_t v) {
      double nd = dc + euclid(coord_of(u), coord_of(v));
      if (nd < dist[v]) {
        dist[v] = nd;
        prev[v] = u;
        open.push({nd, v});
      }
    };
    if (u == i_start) {
      for (size_t j = 0; j < n; ++j)
        if (visible(grid_, start, corners_[j])) relax(j);
    } else {
      for (size_t j = 0; j < n; ++j)
        if (adj(u, j)) relax(j);
      if (sees_goal[u]) relax(i_goal);
    }
  }
  if (dist[i_goal] == kInf) return std::nullopt;
  if (path) {
    for (size_t u = i_goal; u != size_t(-1); u = prev[u]) path->push_back(coord_of(u));
  }
  return dist[i_goal];
}

std::optional<double> oracle_shortest_path(const OccupancyGrid& g, Coord start, Coord goal,
                                           std::vector<Coord>* path) {
  return VisibilityGraph(g).shortest_path_cost(start, goal, path);
}

bool is_taut_path(const OccupancyGrid& g, const std::vector<Coord>& path) {
  if (path.empty()) return false;
  if (path.size() == 1) return true;
  for (size_t i = 0; i + 1 < path.size(); ++i)
    if (!visible(g, path[i], path[i + 1])) return false;
  constexpr Coord kQuadrants[4] = {{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
  for (size_t i = 1; i + 1 < path.size(); ++i) {
    Coord u1 = path[i] - path[i - 1];
    Coord u2 = path[i + 1] - path[i];
    int s = sgn(cross(u1, u2));
    if (s == 0) {
      if (dot(u1, u2) <= 0) return false;  // reversal or duplicate vertex
      continue;
    }
    // A real turn must wrap an occupied quadrant on the inside of the elbow.
    bool wrapped = false;
    for (Coord q : kQuadrants) {
      if (!g.quadrant_occupied(path[i], q)) continue;
      if (s * cross(u1, q) >= 0 && s * cross(u2, q) >= 0) {
        wrapped = true;
        break;
      }
    }
    if (!wrapped) return false;
  }
  return true;
}

}  // namespace anyangle
