#include "anyangle/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <set>
#include <thread>

#include "anyangle/oracle.hpp"

namespace anyangle {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// mt19937_64 output mapped to [0,1) without going through the
// implementation-defined distribution adaptors, so rasters are reproducible
// across standard libraries.
double unit_double(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }

bool costs_match(double a, double b) {
  if (std::isinf(a) || std::isinf(b)) return std::isinf(a) && std::isinf(b);
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

OccupancyGrid random_grid(uint64_t seed, int64_t width, int64_t height, double density) {
  std::mt19937_64 rng(seed);
  OccupancyGrid grid(width, height);
  for (int64_t cy = 0; cy < height; ++cy)
    for (int64_t cx = 0; cx < width; ++cx)
      if (unit_double(rng) < density) grid.set_occupied(cx, cy, true);
  return grid;
}

std::vector<Scenario> random_scenarios(uint64_t seed, const OccupancyGrid& grid, int count,
                                       const std::string& map_name) {
  std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ULL + 1);
  auto draw_vertex = [&]() -> std::optional<Coord> {
    for (int attempt = 0; attempt < 4096; ++attempt) {
      Coord v{int64_t(rng() % uint64_t(grid.width() + 1)),
              int64_t(rng() % uint64_t(grid.height() + 1))};
      if (grid.quadrant_mask(v) != 0xF) return v;
    }
    return std::nullopt;  // grid is essentially full
  };

  std::vector<Scenario> scens;
  scens.reserve(size_t(count));
  for (int i = 0; i < count; ++i) {
    auto a = draw_vertex(), b = draw_vertex();
    if (!a || !b) break;
    if (*a == *b) {
      --i;
      continue;
    }
    Scenario s;
    s.map_name = map_name;
    s.map_width = grid.width();
    s.map_height = grid.height();
    s.start = *a;
    s.goal = *b;
    scens.push_back(std::move(s));
  }
  return scens;
}

namespace {

void run_one(const std::map<std::string, OccupancyGrid>& maps, const Scenario& s, int index,
             bool o67, const BenchConfig& cfg, BenchRecord& rec) {
  rec.map_name = s.map_name;
  rec.index = index;
  rec.start = s.start;
  rec.goal = s.goal;
  rec.o67 = o67;
  rec.solved = false;
  rec.cost = kInf;

  auto it = maps.find(s.map_name);
  if (it == maps.end()) {
    rec.error = "unknown-map: " + s.map_name;
    return;
  }
  const OccupancyGrid& grid = it->second;

  PlannerConfig pc = cfg.planner;
  pc.enable_o67 = o67;
  try {
    auto t0 = std::chrono::steady_clock::now();
    PlanResult res = plan(grid, s.start, s.goal, pc);
    auto t1 = std::chrono::steady_clock::now();
    rec.time_us = std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0).count();
    rec.stats = res.stats;
    if (res.cost) {
      rec.solved = true;
      rec.cost = *res.cost;
      auto stripped = strip_colinear(res.path);
      rec.turning_points = stripped.size() > 2 ? int(stripped.size()) - 2 : 0;
    }
  } catch (const std::exception& ex) {
    rec.error = ex.what();
    return;
  }

  if (cfg.oracle_area_bound > 0 && grid.width() * grid.height() <= cfg.oracle_area_bound) {
    auto oc = oracle_shortest_path(grid, s.start, s.goal);
    double oracle_cost = oc ? *oc : kInf;
    if (!costs_match(rec.cost, oracle_cost)) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "oracle-mismatch: planner %.12g vs oracle %.12g", rec.cost,
                    oracle_cost);
      rec.error = buf;
    }
  }
  if (rec.solved && s.octile_ref > 0 &&
      rec.cost > s.octile_ref * (1 + 1e-9) + 1e-6) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "octile-sanity: cost %.12g exceeds octile reference %.12g",
                  rec.cost, s.octile_ref);
    rec.error = buf;
  }
}

MapStats compute_stats(const std::map<std::string, OccupancyGrid>& maps,
                       const std::vector<BenchRecord>& records) {
  MapStats st;

  // Raster shape: convex corners per free cell, over the maps actually used.
  std::set<std::string> used;
  for (const auto& r : records) used.insert(r.map_name);
  int64_t corners = 0, free_cells = 0;
  for (const auto& name : used) {
    auto it = maps.find(name);
    if (it == maps.end()) continue;
    const OccupancyGrid& g = it->second;
    for (int64_t cy = 0; cy < g.height(); ++cy)
      for (int64_t cx = 0; cx < g.width(); ++cx)
        if (!g.is_occupied(cx, cy)) ++free_cells;
    for (int64_t y = 0; y <= g.height(); ++y)
      for (int64_t x = 0; x <= g.width(); ++x) {
        unsigned mask = g.quadrant_mask({x, y});
        int pop = __builtin_popcount(mask);
        if (pop == 1) ++corners;
        else if (mask == 0x5 || mask == 0xA) corners += 2;  // checkerboard vertex
      }
  }
  if (free_cells > 0) st.corner_ratio = double(corners) / double(free_cells);

  double sum_t = 0, sum_c = 0, sum_tt = 0, sum_cc = 0, sum_tc = 0;
  int64_t n = 0;
  for (const auto& r : records) {
    if (!r.solved) continue;
    st.max_turning_points = std::max(st.max_turning_points, r.turning_points);
    st.max_cost = std::max(st.max_cost, r.cost);
    double t = r.turning_points, c = r.cost;
    sum_t += t;
    sum_c += c;
    sum_tt += t * t;
    sum_cc += c * c;
    sum_tc += t * c;
    ++n;
  }
  if (n >= 2) {
    double cov = sum_tc - sum_t * sum_c / double(n);
    double var_t = sum_tt - sum_t * sum_t / double(n);
    double var_c = sum_cc - sum_c * sum_c / double(n);
    if (var_t > 0 && var_c > 0) st.r = cov / std::sqrt(var_t * var_c);
  }

  st.g_by_points.assign(size_t(st.max_turning_points) + 1, 0.0);
  std::vector<int64_t> bucket_n(st.g_by_points.size(), 0);
  for (const auto& r : records) {
    if (!r.solved) continue;
    st.g_by_points[size_t(r.turning_points)] += r.cost;
    ++bucket_n[size_t(r.turning_points)];
  }
  for (size_t i = 0; i < st.g_by_points.size(); ++i)
    if (bucket_n[i] > 0) st.g_by_points[i] /= double(bucket_n[i]);

  return st;
}

}  // namespace

BenchResult run_benchmark(const std::map<std::string, OccupancyGrid>& maps,
                          const std::vector<Scenario>& scens, const BenchConfig& cfg) {
  size_t count = scens.size();
  if (cfg.limit >= 0) count = std::min(count, size_t(cfg.limit));
  const int variants = cfg.compare_o67 ? 2 : 1;

  BenchResult out;
  out.records.resize(count * size_t(variants));

  auto task = [&](size_t t) {
    size_t si = t / size_t(variants);
    bool o67 = cfg.compare_o67 ? (t % 2 == 0) : cfg.planner.enable_o67;
    run_one(maps, scens[si], int(si), o67, cfg, out.records[t]);
  };

  size_t total = out.records.size();
  if (cfg.threads > 1 && total > 1) {
    std::atomic<size_t> next{0};
    auto worker = [&] {
      for (size_t t = next.fetch_add(1); t < total; t = next.fetch_add(1)) task(t);
    };
    std::vector<std::thread> pool;
    int nthreads = std::min<int>(cfg.threads, int(total));
    pool.reserve(size_t(nthreads));
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  } else {
    for (size_t t = 0; t < total; ++t) task(t);
  }

  out.stats = compute_stats(maps, out.records);
  return out;
}

void write_csv(std::ostream& os, const std::vector<BenchRecord>& records) {
  os << "map,index,sx,sy,gx,gy,solved,cost,turning_points,time_us,polls,casts,traces\n";
  char cost_buf[64];
  for (const auto& r : records) {
    if (std::isfinite(r.cost))
      std::snprintf(cost_buf, sizeof cost_buf, "%.9f", r.cost);
    else
      std::snprintf(cost_buf, sizeof cost_buf, "inf");
    os << r.map_name << ',' << r.index << ',' << r.start.x << ',' << r.start.y << ',' << r.goal.x
       << ',' << r.goal.y << ',' << (r.solved ? 1 : 0) << ',' << cost_buf << ','
       << r.turning_points << ',' << r.time_us << ',' << r.stats.polls << ',' << r.stats.casts
       << ',' << r.stats.traces << '\n';
  }
}

}  // namespace anyangle
