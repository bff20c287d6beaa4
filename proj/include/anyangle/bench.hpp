#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "anyangle/grid.hpp"
#include "anyangle/movingai.hpp"
#include "anyangle/planner.hpp"

namespace anyangle {

// Deterministic random raster: each cell is occupied independently with
// probability `density`, driven by the standard mt19937_64 sequence so the
// same seed reproduces the same grid everywhere.
OccupancyGrid random_grid(uint64_t seed, int64_t width, int64_t height, double density);

// Draws `count` valid endpoint pairs on the grid (vertices not fully
// surrounded by obstacle), labelled with `map_name` so they can be fed to
// run_benchmark.
std::vector<Scenario> random_scenarios(uint64_t seed, const OccupancyGrid& grid, int count,
                                       const std::string& map_name);

struct BenchConfig {
  PlannerConfig planner{};
  bool compare_o67 = false;       // run each scenario with the O6/O7 pruning both on and off
  int64_t oracle_area_bound = 0;  // cross-check against the oracle when width*height <= bound
  int limit = -1;                 // cap on scenarios taken from the list; -1 = all
  int threads = 1;
};

struct BenchRecord {
  std::string map_name;
  int index = 0;  // position in the scenario list
  Coord start{0, 0};
  Coord goal{0, 0};
  bool o67 = true;  // which planner variant produced this record
  bool solved = false;
  double cost = 0.0;  // +infinity when unsolved
  int turning_points = 0;  // interior vertices after colinear stripping
  int64_t time_us = 0;     // wall time of the plan() call alone
  InstrumentationCounters stats;
  std::string error;  // per-record diagnostics; the run never aborts
};

struct MapStats {
  double r = 0.0;             // Pearson correlation of cost vs. turning points (solved only)
  double corner_ratio = 0.0;  // convex corners per free cell across the referenced maps
  int max_turning_points = 0;
  double max_cost = 0.0;
  std::vector<double> g_by_points;  // mean solved cost per turning-point count
};

struct BenchResult {
  std::vector<BenchRecord> records;
  MapStats stats;
};

// Runs plan() for every scenario against its named map.  Only the plan()
// call is timed.  Errors (missing map, planner exceptions, oracle or octile
// mismatches when cross-checking) land in the record's error field.
BenchResult run_benchmark(const std::map<std::string, OccupancyGrid>& maps,
                          const std::vector<Scenario>& scens, const BenchConfig& cfg = {});

// Fixed column layout: map,index,sx,sy,gx,gy,solved,cost,turning_points,
// time_us,polls,casts,traces.  UTF-8, '.' decimal separator.
void write_csv(std::ostream& os, const std::vector<BenchRecord>& records);

}  // namespace anyangle
