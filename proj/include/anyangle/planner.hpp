#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "anyangle/grid.hpp"

namespace anyangle {

struct PlannerConfig {
  int num_interrupt = 10;       // corners a trace walks before yielding
  bool enable_o67 = true;       // crossing-based discards of costlier routes
  bool strip_colinear = false;  // drop pass-through vertices from the result
  bool heap_open_list = false;  // binary-heap queue instead of sorted list
  bool minor_trace_refinement = false;
  uint64_t poll_budget = 10'000'000;
};

struct InstrumentationCounters {
  uint64_t polls = 0;           // open-list polls
  uint64_t casts = 0;           // line-of-sight walks actually executed
  uint64_t traces = 0;          // tracing runs started (including resumed)
  uint64_t corners_traced = 0;  // contour corners visited across all traces
  uint64_t links_created = 0;
};

struct PlanResult {
  std::vector<Coord> path;  // goal first; empty when unreachable
  std::optional<double> cost;
  InstrumentationCounters stats;
};

// Any-angle shortest path between two vertices. Endpoints must be vertices of
// the map not strictly inside an obstacle (invalid-endpoint otherwise).
// Start equal to goal yields the one-vertex path at cost zero; an empty path
// means the goal is unreachable (or the poll budget ran out).
PlanResult plan(const OccupancyGrid& g, Coord start, Coord goal,
                const PlannerConfig& cfg = {});

// --- decision rules shared with the property tests ---

// True when a route into an anchor that is costlier than the best-known one
// would have to cross that best route to reach its tree, and so can be
// discarded. v_e points from the costlier route's previous vertex to the
// anchor, v_c from the cheaper route's previous vertex.
bool crossing_discard(Tree k, Side s, Coord v_e, Coord v_c);

// True when parent->anchor->grandparent keeps winding the way a side-s node
// of tree k must; links that fail are pruned as slack.
bool taut_turn(Tree k, Side s, Coord v_par, Coord v_gpar);

// True when a bend at vertex v squeezes through a corner where two obstacle
// cells meet only diagonally: travel arrives through one free quadrant
// (moving along v_in) and leaves through the opposite one (along v_out).
// Such a bend is forced by the passage itself rather than by wrapping one
// obstacle, so it is legal in either turn direction and exempt from the
// one-sided tautness of taut_turn.
bool pinch_threading_turn(const OccupancyGrid& g, Coord v, Coord v_in, Coord v_out);

// Winding bookkeeping of one trace against one parent: v_prog is the last
// direction of progress, i_prog counts accumulated reversals. A trace only
// acts on a parent while it progresses (i_prog zero, moving away).
struct Progression {
  Coord v_prog{0, 0};
  int i_prog = 0;
};
struct ProgressionOutcome {
  bool progressed;
  Progression next;
};
ProgressionOutcome progression_rule(Tree k_par, Side s_d, Coord v_par, Coord v_prev,
                                    Progression state);

// Removes interior vertices a path passes straight through.
std::vector<Coord> strip_colinear(std::vector<Coord> path);

}  // namespace anyangle
