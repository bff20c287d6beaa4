// Command-line front end: plan / verify / bench / random / render.
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "anyangle/bench.hpp"
#include "anyangle/movingai.hpp"
#include "anyangle/oracle.hpp"
#include "anyangle/planner.hpp"
#include "anyangle/svg.hpp"

namespace {

using namespace anyangle;

Coord parse_coord(const std::string& s) {
  size_t comma = s.find(',');
  if (comma == std::string::npos) throw std::runtime_error("expected x,y: " + s);
  try {
    return {std::stoll(s.substr(0, comma)), std::stoll(s.substr(comma + 1))};
  } catch (const std::exception&) {
    throw std::runtime_error("expected x,y: " + s);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << text;
}

// Options shared by every subcommand that needs a grid: either a map file or
// a seeded random raster.
struct GridSource {
  std::string map_path;
  uint64_t seed = 1;
  double density = 0.1;
  std::string size;  // "WxH" or "N"

  void add_to(CLI::App* cmd, bool want_random) {
    auto* map = cmd->add_option("--map", map_path, "map file to load");
    if (want_random) {
      auto* seed_o = cmd->add_option("--seed", seed, "random grid seed");
      auto* dens_o = cmd->add_option("--density", density, "random grid obstacle density");
      auto* size_o = cmd->add_option("--size", size, "random grid size, WxH or N");
      map->excludes(seed_o)->excludes(dens_o)->excludes(size_o);
    }
  }

  std::pair<std::string, OccupancyGrid> load() const {
    if (!map_path.empty()) return {map_path, parse_map(read_file(map_path))};
    if (size.empty())
      throw std::runtime_error("no input: give --map FILE or --size (with --seed/--density)");
    int64_t w, h;
    size_t x = size.find('x');
    if (x == std::string::npos) {
      w = h = std::stoll(size);
    } else {
      w = std::stoll(size.substr(0, x));
      h = std::stoll(size.substr(x + 1));
    }
    std::string name = "random-" + std::to_string(seed) + "-" + std::to_string(w) + "x" +
                       std::to_string(h);
    return {name, random_grid(seed, w, h, density)};
  }
};

void print_path(const PlanResult& res) {
  if (!res.cost) {
    std::cout << "no path found\n";
    return;
  }
  std::cout.precision(12);
  std::cout << "cost " << *res.cost << "\n";
  // results arrive goal-first; print start to goal
  for (auto it = res.path.rbegin(); it != res.path.rend(); ++it)
    std::cout << it->x << "," << it->y << "\n";
}

int run_plan(const GridSource& src, const std::string& start_s, const std::string& goal_s,
             bool scale2, const PlannerConfig& pc, const std::string& svg_path) {
  auto [name, grid] = src.load();
  Coord start = parse_coord(start_s), goal = parse_coord(goal_s);
  if (scale2) {
    grid = scale_map(grid);
    start = transform_point(start);
    goal = transform_point(goal);
  }
  PlanResult res = plan(grid, start, goal, pc);
  print_path(res);
  if (!svg_path.empty()) write_file(svg_path, render_svg(grid, res.path));
  return 0;
}

int run_verify(const GridSource& src, const std::string& scen_path, int count, int limit,
               bool scale2, const PlannerConfig& pc) {
  auto [name, grid] = src.load();
  std::vector<Scenario> scens;
  if (!scen_path.empty())
    scens = parse_scen(read_file(scen_path));
  else
    scens = random_scenarios(src.seed + 1, grid, count, name);
  if (scale2) {
    grid = scale_map(grid);
    for (auto& s : scens) {
      s.start = transform_point(s.start);
      s.goal = transform_point(s.goal);
      s.octile_ref *= 2;
    }
  }
  if (limit >= 0 && size_t(limit) < scens.size()) scens.resize(size_t(limit));

  VisibilityGraph vg(grid);
  for (size_t i = 0; i < scens.size(); ++i) {
    const Scenario& s = scens[i];
    PlanResult res;
    try {
      res = plan(grid, s.start, s.goal, pc);
    } catch (const std::exception& ex) {
      std::cout << "mismatch: scenario " << i << " start " << s.start.x << "," << s.start.y
                << " goal " << s.goal.x << "," << s.goal.y << ": " << ex.what() << "\n";
      return 2;
    }
    auto oracle = vg.shortest_path_cost(s.start, s.goal);
    bool both_unsolved = !res.cost && !oracle;
    bool both_solved = res.cost && oracle;
    double pc_cost = res.cost ? *res.cost : -1, oc_cost = oracle ? *oracle : -1;
    bool ok = both_unsolved ||
              (both_solved &&
               std::abs(pc_cost - oc_cost) <= 1e-9 * std::max({1.0, pc_cost, oc_cost}));
    if (ok && res.cost && !is_taut_path(grid, strip_colinear(res.path))) {
      std::cout << "mismatch: scenario " << i << " path is not taut\n";
      return 2;
    }
    if (!ok) {
      std::cout.precision(12);
      std::cout << "mismatch: scenario " << i << " start " << s.start.x << "," << s.start.y
                << " goal " << s.goal.x << "," << s.goal.y << " planner ";
      if (res.cost)
        std::cout << pc_cost;
      else
        std::cout << "unsolved";
      std::cout << " reference ";
      if (oracle)
        std::cout << oc_cost;
      else
        std::cout << "unsolved";
      std::cout << "\n";
      return 2;
    }
  }
  std::cout << "verified " << scens.size() << " scenarios\n";
  return 0;
}

int run_bench(const GridSource& src, const std::string& scen_path, int count, int limit,
              bool scale2, bool compare, int64_t oracle_bound, int threads,
              const PlannerConfig& pc, const std::string& csv_path) {
  auto [name, grid] = src.load();
  std::vector<Scenario> scens;
  if (!scen_path.empty())
    scens = parse_scen(read_file(scen_path));
  else
    scens = random_scenarios(src.seed + 1, grid, count, name);
  for (auto& s : scens) s.map_name = name;  // single-map run: bind to the loaded grid
  if (scale2) {
    grid = scale_map(grid);
    for (auto& s : scens) {
      s.start = transform_point(s.start);
      s.goal = transform_point(s.goal);
      s.octile_ref *= 2;
    }
  }

  std::map<std::string, OccupancyGrid> maps;
  maps.emplace(name, std::move(grid));

  BenchConfig cfg;
  cfg.planner = pc;
  cfg.compare_o67 = compare;
  cfg.oracle_area_bound = oracle_bound;
  cfg.limit = limit;
  cfg.threads = threads;
  BenchResult result = run_benchmark(maps, scens, cfg);

  if (csv_path.empty()) {
    write_csv(std::cout, result.records);
  } else {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + csv_path);
    write_csv(out, result.records);
  }

  std::ostream& log = csv_path.empty() ? std::cerr : std::cout;
  size_t solved = 0;
  for (const auto& r : result.records)
    if (r.solved) ++solved;
  log.precision(6);
  log << "records " << result.records.size() << " solved " << solved << " | r " << result.stats.r
      << " corner_ratio " << result.stats.corner_ratio << " max_turning_points "
      << result.stats.max_turning_points << " max_cost " << result.stats.max_cost << "\n";
  if (compare) {
    uint64_t polls_on = 0, polls_off = 0;
    for (const auto& r : result.records) (r.o67 ? polls_on : polls_off) += r.stats.polls;
    log << "polls with pruning " << polls_on << ", without " << polls_off;
    if (polls_off > 0)
      log << " (" << 100.0 * (1.0 - double(polls_on) / double(polls_off)) << "% fewer)";
    log << "\n";
  }
  for (const auto& r : result.records)
    if (!r.error.empty()) {
      log << "errors present; first: scenario " << r.index << ": " << r.error << "\n";
      break;
    }
  return 0;
}

int run_random(const GridSource& src, const std::string& out_path, const std::string& svg_path) {
  auto [name, grid] = src.load();
  std::string text = serialize_map(grid);
  if (out_path.empty())
    std::cout << text;
  else
    write_file(out_path, text);
  if (!svg_path.empty()) write_file(svg_path, render_svg(grid));
  return 0;
}

int run_render(const GridSource& src, const std::string& start_s, const std::string& goal_s,
               bool scale2, const PlannerConfig& pc, const std::string& svg_path) {
  auto [name, grid] = src.load();
  if (scale2) grid = scale_map(grid);
  std::vector<Coord> path;
  if (!start_s.empty() && !goal_s.empty()) {
    Coord start = parse_coord(start_s), goal = parse_coord(goal_s);
    if (scale2) {
      start = transform_point(start);
      goal = transform_point(goal);
    }
    path = plan(grid, start, goal, pc).path;
  }
  std::string text = render_svg(grid, path);
  if (svg_path.empty())
    std::cout << text;
  else
    write_file(svg_path, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"any-angle grid path planner"};
  app.require_subcommand(1);

  GridSource src;
  std::string start_s, goal_s, scen_path, svg_path, csv_path, out_path;
  bool scale2 = false, strip = false, disable_o67 = false, compare = false;
  int interrupt = 10, limit = -1, count = 100, threads = 1;
  int64_t oracle_bound = 0;

  auto add_planner_flags = [&](CLI::App* cmd) {
    cmd->add_flag("--scale2", scale2, "double the raster, endpoints mapped to 2p+1");
    cmd->add_flag("--strip-colinear", strip, "drop pass-through vertices from results");
    cmd->add_flag("--disable-o67", disable_o67, "turn off best-path pruning at reached nodes");
    cmd->add_option("--interrupt", interrupt, "corners traced before a trace is re-queued");
  };

  auto* c_plan = app.add_subcommand("plan", "plan one query and print the path");
  src.add_to(c_plan, true);
  c_plan->add_option("--start", start_s, "start vertex x,y")->required();
  c_plan->add_option("--goal", goal_s, "goal vertex x,y")->required();
  add_planner_flags(c_plan);
  c_plan->add_option("--svg", svg_path, "write an SVG rendering here");

  auto* c_verify = app.add_subcommand("verify", "check planner costs against the reference");
  src.add_to(c_verify, true);
  c_verify->add_option("--scen", scen_path, "scenario file");
  c_verify->add_option("--count", count, "random scenario count when no --scen");
  c_verify->add_option("--limit", limit, "verify at most this many scenarios");
  add_planner_flags(c_verify);

  auto* c_bench = app.add_subcommand("bench", "run a scenario suite and emit CSV");
  src.add_to(c_bench, true);
  c_bench->add_option("--scen", scen_path, "scenario file");
  c_bench->add_option("--count", count, "random scenario count when no --scen");
  c_bench->add_option("--limit", limit, "run at most this many scenarios");
  c_bench->add_option("--csv", csv_path, "write records here instead of stdout");
  c_bench->add_flag("--compare-o67", compare, "run every query with pruning on and off");
  c_bench->add_option("--oracle-bound", oracle_bound,
                      "cross-check costs when map area is at most this many cells");
  c_bench->add_option("--threads", threads, "worker threads");
  add_planner_flags(c_bench);

  auto* c_random = app.add_subcommand("random", "emit a seeded random map");
  src.add_to(c_random, true);
  c_random->add_option("--out", out_path, "write the map here instead of stdout");
  c_random->add_option("--svg", svg_path, "also write an SVG rendering");

  auto* c_render = app.add_subcommand("render", "render a map (and optional query) as SVG");
  src.add_to(c_render, true);
  c_render->add_option("--start", start_s, "start vertex x,y");
  c_render->add_option("--goal", goal_s, "goal vertex x,y");
  add_planner_flags(c_render);
  c_render->add_option("--svg", svg_path, "output file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  PlannerConfig pc;
  pc.enable_o67 = !disable_o67;
  pc.strip_colinear = strip;
  pc.num_interrupt = interrupt;

  try {
    if (app.got_subcommand(c_plan)) return run_plan(src, start_s, goal_s, scale2, pc, svg_path);
    if (app.got_subcommand(c_verify))
      return run_verify(src, scen_path, count, limit, scale2, pc);
    if (app.got_subcommand(c_bench))
      return run_bench(src, scen_path, count, limit, scale2, compare, oracle_bound, threads, pc,
                       csv_path);
    if (app.got_subcommand(c_random)) return run_random(src, out_path, svg_path);
    if (app.got_subcommand(c_render))
      return run_render(src, start_s, goal_s, scale2, pc, svg_path);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 1;
}
