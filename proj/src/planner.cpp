#include "anyangle/planner.hpp"

#include <algorithm>
#include <cassert>
#include <cstdio>
#include <deque>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "anyangle/model.hpp"

namespace anyangle {

bool crossing_discard(Tree k, Side s, Coord v_e, Coord v_c) {
  return sgn(k) * sgn(s) * cross(v_e, v_c) < 0;
}

bool taut_turn(Tree k, Side s, Coord v_par, Coord v_gpar) {
  const int64_t u = sgn(k) * sgn(s) * cross(v_par, v_gpar);
  if (u == 0) return dot(v_par, v_gpar) >= 0;
  return u > 0;
}

bool pinch_threading_turn(const OccupancyGrid& g, Coord v, Coord v_in, Coord v_out) {
  if (v_in.x == 0 || v_in.y == 0 || v_out.x == 0 || v_out.y == 0) return false;
  const Coord q_from{-sgn(v_in.x), -sgn(v_in.y)};  // quadrant travel arrives from
  const Coord q_to{sgn(v_out.x), sgn(v_out.y)};    // quadrant travel leaves into
  if (q_to.x != -q_from.x || q_to.y != -q_from.y) return false;
  if (g.quadrant_occupied(v, q_from) || g.quadrant_occupied(v, q_to)) return false;
  return g.quadrant_occupied(v, {q_from.x, -q_from.y}) &&
         g.quadrant_occupied(v, {-q_from.x, q_from.y});
}

ProgressionOutcome progression_rule(Tree k_par, Side s_d, Coord v_par, Coord v_prev,
                                    Progression st) {
  const int64_t u = sgn(k_par) * sgn(s_d) * cross(v_par, st.v_prog);
  bool is_prog = u < 0 || (u == 0 && dot(v_par, st.v_prog) > 0);
  const bool was_prog = st.i_prog == 0;
  // Sign of the interaction between the arrival direction and the two
  // candidate progress directions decides whether a flip is a real reversal
  // or the parent swinging past the trace.
  const int itx = sgn(cross(v_prev, v_par)) * sgn(cross(v_prev, st.v_prog));
  if (is_prog && was_prog) {
    st.v_prog = v_par;
  } else if (is_prog && !was_prog) {
    if (itx >= 0) {
      if (--st.i_prog > 0) {
        st.v_prog = -st.v_prog;
        is_prog = false;
      } else {
        st.v_prog = v_par;
      }
    } else {
      ++st.i_prog;
      st.v_prog = -st.v_prog;
      is_prog = false;
    }
  } else if (!is_prog && was_prog) {
    if (itx <= 0) {
      st.v_prog = -st.v_prog;
      is_prog = true;
    } else {
      ++st.i_prog;
    }
  }
  return {is_prog, st};
}

std::vector<Coord> strip_colinear(std::vector<Coord> path) {
  if (path.size() < 3) return path;
  std::vector<Coord> out;
  out.push_back(path.front());
  for (size_t i = 1; i + 1 < path.size(); ++i) {
    const Coord u = path[i] - out.back();
    const Coord v = path[i + 1] - path[i];
    if (cross(u, v) == 0 && dot(u, v) > 0) continue;
    out.push_back(path[i]);
  }
  out.push_back(path.back());
  return out;
}

namespace {

using detail::Crn;

// True when the segment x -> x+v is blocked in its very first step: it enters
// an occupied quadrant, or runs along an edge walled on both flanks.
bool blocked_at_origin(const OccupancyGrid& g, Coord x, Coord v) {
  if (v.is_zero()) return false;
  const int64_t sx = v.x > 0 ? 1 : (v.x < 0 ? -1 : 0);
  const int64_t sy = v.y > 0 ? 1 : (v.y < 0 ? -1 : 0);
  if (sx != 0 && sy != 0) return g.quadrant_occupied(x, {sx, sy});
  if (sx != 0) {
    return g.quadrant_occupied(x, {sx, 1}) && g.quadrant_occupied(x, {sx, -1});
  }
  return g.quadrant_occupied(x, {1, sy}) && g.quadrant_occupied(x, {-1, sy});
}

// One parent followed by a trace: the trace-side link, plus its winding state.
struct Nodelet {
  LinkId link = kNil;
  Coord v_prog{0, 0};
  int i_prog = 0;
};

struct TraceState {
  std::optional<Crn> crn;  // current corner; nullopt once the contour leaves the map
  Side sigma = Side::kLeft;
  NodeId head_s = kNil;  // anonymous anchors for links still owned by the trace
  NodeId head_t = kNil;
  std::deque<Nodelet> m_s;
  std::deque<Nodelet> m_t;
  int i_crn = 0;
  int i_crn0 = 0;           // corners already walked before an interrupt parked us
  bool b_over = false;      // placement overlapped existing structure
  bool passed_src = false;  // walked through the source's own position once
};

class Engine {
 public:
  Engine(const OccupancyGrid& g, Coord start, Coord goal, const PlannerConfig& cfg)
      : g_(g), start_(start), goal_(goal), cfg_(cfg), m_(cfg.heap_open_list) {}

  PlanResult run();

 private:
  const OccupancyGrid& g_;
  Coord start_;
  Coord goal_;
  PlannerConfig cfg_;
  SearchModel m_;
  InstrumentationCounters stats_;
  std::vector<Coord> path_;
  bool found_ = false;
  // Nesting depth of recursive traces (angular-sector and occupied-sector
  // restarts). Termination holds without it, but runaway nesting from an
  // unforeseen degeneracy should fail a branch, not the stack.
  int trace_depth_ = 0;
  static constexpr int kMaxTraceDepth = 220;
  // Rays that collided in their first step and already spawned their detour
  // traces once. The walk is a function of the segment alone, so a repeat
  // can only rebuild identical structure (and, unchecked, loop forever).
  std::unordered_set<RayId> origin_collision_spawned_;

  // --- shorthands over the model ---
  Coord xof(NodeId n) { return m_.pos(m_.node(n).pos).x; }
  NodeId anchor_node(LinkId e) { return m_.link(e).anchor; }
  // Node a link hangs from on the given side (its side-k parent's anchor).
  NodeId side_node(Tree k, LinkId e) { return anchor_node(m_.first_neighbor(k, e)); }
  static bool cumvis(NodeKind k) { return has_cumulative_visibility(k); }

  NodeId get_node(Coord x, NodeKind kind, Side s, Tree k, Coord hug) {
    const NodeId n = m_.get_node(x, kind, s, k);
    if (m_.node(n).hug.is_zero() && !hug.is_zero()) m_.node(n).hug = hug;
    return n;
  }
  Crn node_crn(NodeId n) { return Crn{xof(n), m_.node(n).hug}; }

  static bool is_rev(Tree k_par, Side s_d, Coord v_par, Coord v_next) {
    return sgn(k_par) * sgn(s_d) * cross(v_par, v_next) < 0;
  }
  static bool is_vis(Side s_d, Coord v_par, Coord v_next) {
    return sgn(s_d) * cross(v_par, v_next) <= 0;
  }

  // --- ray helpers ---
  SectorRay& cast(RayId r) {
    SectorRay& ray = m_.ray(r);
    if (ray.status == RayStatus::kUnknown) {
      cast_ray(g_, ray);
      ++stats_.casts;
    }
    return ray;
  }
  SectorRay& project(RayId r) {
    SectorRay& ray = cast(r);
    if (ray.status == RayStatus::kVisible && !ray.x_left && !ray.x_right) {
      project_ray(g_, ray);
    }
    return ray;
  }
  Crn collision_crn(const SectorRay& ray, Side s) {
    if (s == Side::kLeft) return Crn{*ray.x_left, ray.hug_left};
    return Crn{*ray.x_right, ray.hug_right};
  }

  // --- traces ---
  TraceState make_trace(Crn crn, Side s) {
    TraceState d;
    d.crn = crn;
    d.sigma = s;
    d.head_s = m_.create_trace_node();
    d.head_t = m_.create_trace_node();
    return d;
  }
  std::deque<Nodelet>& nlets(Tree k, TraceState& d) {
    return k == Tree::kSource ? d.m_s : d.m_t;
  }
  NodeId head(Tree k, TraceState& d) { return k == Tree::kSource ? d.head_s : d.head_t; }

  // --- engine stages ---
  void initial_cast();
  void initial_trace(Side s_d, RayId lam, RayId lam_rev, NodeId n_goal);
  bool caster(LinkId e);
  bool cast_reached(RayId lam, LinkId e);
  void path_found(LinkId e);
  std::pair<Tree, NodeId> no_cumulative_visibility(RayId lam, LinkId e);
  std::pair<Tree, NodeId> single_cumulative_visibility(RayId lam, LinkId e);
  bool continuation_sig(Tree k, LinkId e, Coord x_land, int* budget,
                        std::string* out);
  void discard_reached_cast(LinkId e);
  void finish_reached_cast(Tree k_next, NodeId n_next, LinkId e, RayId lam);
  void queue_reached_cast(Tree k_next, LinkId e);
  void reached_tm(RayId lam, LinkId e);
  std::vector<LinkId> cast_from_tm(LinkId e, Crn crn, Side s_tr, Coord v_next);
  void trace_from_tm(LinkId e, Crn crn, Side s_tr, Coord v_next,
                     const std::vector<LinkId>& parked);
  void cast_collided(RayId lam, LinkId e);
  void minor_trace(RayId lam, LinkId e);
  void third_trace(RayId lam, LinkId e, bool skip_hint);
  void major_trace(RayId lam, LinkId e);
  void tracer_from_link(LinkId e);
  void tracer(TraceState& d);
  bool refound_src(TraceState& d);
  bool prog_apply(TraceState& d, Nodelet& m, Tree k_list);
  bool tracer_proc(Tree k_par, TraceState& d);
  bool src_prog_cast(TraceState& d);
  bool prune_rule(TraceState& d, Tree k_par, size_t i);
  bool oc_sec_rule(TraceState& d, Tree k_par, size_t i);
  bool ang_sec_rule(TraceState& d, size_t i);
  bool ray_not_crossed(RayId lam, TraceState& d, Nodelet& m);
  void ang_sec_prune(const SectorRay& lam, TraceState& d, Nodelet& m);
  void recur_ang_sec_trace(RayId lam, TraceState& d, size_t i);
  bool interrupt_rule(TraceState& d);
  bool place_rule(TraceState& d);
  std::optional<size_t> place_node(Tree k_par, TraceState& d);
  void cast_from_trace(TraceState& d, size_t first_idx);
  void shrink_source_tree();
  void conv_to_tgt_branch(LinkId e);
  void conv_to_ex_branch(Tree k, PosId p);
  void conv_to_ex_branch_aux(Tree k, LinkId e_par, LinkId e, Side s);
};

PlanResult Engine::run() {
  initial_cast();
  while (!found_ && stats_.polls < cfg_.poll_budget) {
    // Traces park their castable connections in the overlap buffer whenever
    // they land on structure from other queries; drain it before polling or
    // those connections are orphaned when the open list runs dry.
    if (!m_.overlap_empty()) shrink_source_tree();
    auto q = m_.poll();
    if (!q) break;
    ++stats_.polls;
    if (q->kind == QueryKind::kTrace) {
      tracer_from_link(q->link);
    } else if (caster(q->link)) {
      break;
    }
  }
  PlanResult out;
  out.path = std::move(path_);
  if (found_) {
    double c = 0;
    for (size_t i = 0; i + 1 < out.path.size(); ++i) {
      c += distance(out.path[i], out.path[i + 1]);
    }
    out.cost = c;
  }
  stats_.links_created = m_.links_created();
  out.stats = stats_;
  return out;
}

void Engine::initial_cast() {
  const RayId lam = m_.get_ray(start_, goal_);
  SectorRay& ray = cast(lam);
  if (ray.status == RayStatus::kVisible) {
    path_ = {goal_, start_};
    found_ = true;
    return;
  }
  const RayId lam_rev = m_.get_ray(goal_, start_);
  const NodeId n_goal =
      get_node(goal_, NodeKind::kVerified, Side::kLeft, Tree::kTarget, {0, 0});
  m_.best(Tree::kTarget, m_.node(n_goal).pos) = {0.0, n_goal, goal_};
  initial_trace(Side::kLeft, lam, lam_rev, n_goal);
  initial_trace(Side::kRight, lam, lam_rev, n_goal);
}

void Engine::initial_trace(Side s_d, RayId lam, RayId lam_rev, NodeId n_goal) {
  SectorRay& ray = m_.ray(lam);
  TraceState d = make_trace(collision_crn(ray, s_d), s_d);
  const Coord v_ray = ray.x_t - ray.x_s;

  const LinkId e_hat_s = m_.create_link(d.head_s);
  m_.ray_slot(s_d, e_hat_s) = lam_rev;
  m_.ray_slot(opposite(s_d), e_hat_s) = lam;

  const NodeId n_s = get_node(start_, NodeKind::kVerified, s_d, Tree::kSource, {0, 0});
  m_.best(Tree::kSource, m_.node(n_s).pos) = {0.0, n_s, start_};
  const LinkId e_s = m_.create_link(n_s);
  m_.ray_slot(s_d, e_s) = lam;
  m_.ray_slot(opposite(s_d), e_s) = lam_rev;
  m_.link(e_s).c = 0;
  m_.connect(Tree::kTarget, e_s, e_hat_s);
  const LinkId e_ss = m_.create_link(n_s);
  m_.link(e_ss).c = 0;
  m_.connect(Tree::kTarget, e_ss, e_s);

  const LinkId e_hat_t = m_.create_link(d.head_t);
  const LinkId e_t = m_.create_link(n_goal);
  m_.link(e_t).c = 0;
  m_.connect(Tree::kTarget, e_hat_t, e_t);

  d.m_s.push_back({e_hat_s, v_ray, 0});
  d.m_t.push_back({e_hat_t, -v_ray, 0});
  tracer(d);
}

bool Engine::caster(LinkId e) {
  const NodeId n_s = side_node(Tree::kSource, e);
  const NodeId n_t = side_node(Tree::kTarget, e);
  const RayId lam = m_.get_ray(xof(n_s), xof(n_t));
  SectorRay& ray = cast(lam);
  if (ray.status == RayStatus::kVisible) return cast_reached(lam, e);
  cast_collided(lam, e);
  return false;
}

bool Engine::cast_reached(RayId lam, LinkId e) {
  const NodeId n_s = side_node(Tree::kSource, e);
  const NodeId n_t = side_node(Tree::kTarget, e);
  const NodeKind ks = m_.node(n_s).kind;
  const NodeKind kt = m_.node(n_t).kind;
  if (cumvis(ks) && cumvis(kt)) {
    path_found(e);
    return true;
  }
  if (kt == NodeKind::kPhantom) {
    discard_reached_cast(e);
  } else if (kt == NodeKind::kTemporary) {
    reached_tm(lam, e);
  } else if (!cumvis(ks) && !cumvis(kt)) {
    auto [k_next, n_next] = no_cumulative_visibility(lam, e);
    (void)n_next;
    queue_reached_cast(k_next, e);
  } else {
    auto [k_next, n_next] = single_cumulative_visibility(lam, e);
    if (n_next != kNil) queue_reached_cast(k_next, e);
  }
  return false;
}

void Engine::path_found(LinkId e) {
  std::deque<Coord> p;
  LinkId e_i = m_.first_neighbor(Tree::kTarget, e);
  p.push_back(xof(anchor_node(e_i)));
  while (p.front() != goal_) {
    e_i = m_.first_neighbor(Tree::kTarget, e_i);
    p.push_front(xof(anchor_node(e_i)));
  }
  e_i = m_.first_neighbor(Tree::kSource, e);
  p.push_back(xof(anchor_node(e_i)));
  while (p.back() != start_) {
    e_i = m_.first_neighbor(Tree::kSource, e_i);
    p.push_back(xof(anchor_node(e_i)));
  }
  path_.clear();
  for (const Coord& x : p) {
    if (path_.empty() || path_.back() != x) path_.push_back(x);
  }
  found_ = true;
}

std::pair<Tree, NodeId> Engine::no_cumulative_visibility(RayId lam, LinkId e) {
  const NodeId n_t = side_node(Tree::kTarget, e);
  const NodeId n_next = get_node(xof(n_t), NodeKind::kUnverified, m_.node(n_t).sigma,
                                 Tree::kSource, m_.node(n_t).hug);
  finish_reached_cast(Tree::kTarget, n_next, e, lam);
  return {Tree::kTarget, n_next};
}

// Canonical signature of the continuation hanging off link e on side k: the
// tree of corner positions it still routes through, children sorted so that
// shape alone decides equality. Links parked at the landing corner itself are
// collapsed out — a freshly reached cast holds its continuation one level
// deeper than a previously anchored sibling does. Returns false when the
// continuation holds an anonymous trace head or exceeds the budget; callers
// must then treat it as unique.
bool Engine::continuation_sig(Tree k, LinkId e, Coord x_land, int* budget,
                              std::string* out) {
  std::vector<std::string> parts;
  for (const LinkId e_next : m_.neighbors(k, e)) {
    if (--*budget < 0) return false;
    const NodeId n = m_.link(e_next).anchor;
    if (n == kNil || m_.node(n).pos == kNil) return false;
    const Coord x = xof(n);
    std::string sub;
    if (!continuation_sig(k, e_next, x_land, budget, &sub)) return false;
    if (x == x_land) {
      parts.push_back(std::move(sub));
    } else {
      parts.push_back("(" + std::to_string(x.x) + "," + std::to_string(x.y) +
                      sub + ")");
    }
  }
  std::sort(parts.begin(), parts.end());
  for (const std::string& p : parts) *out += p;
  return true;
}

std::pair<Tree, NodeId> Engine::single_cumulative_visibility(RayId lam, LinkId e) {
  const NodeId n_s = side_node(Tree::kSource, e);
  const NodeId n_t = side_node(Tree::kTarget, e);
  const bool src_vis = cumvis(m_.node(n_s).kind);
  const Tree k_next = src_vis ? Tree::kTarget : Tree::kSource;
  const NodeId n_prev = src_vis ? n_s : n_t;
  const NodeId n_unv = src_vis ? n_t : n_s;
  const Side s_unv = m_.node(n_unv).sigma;

  if (m_.node(n_prev).kind == NodeKind::kVerifiedExpensive &&
      m_.node(n_prev).sigma != s_unv) {
    discard_reached_cast(e);
    return {k_next, kNil};
  }

  SectorRay& ray = m_.ray(lam);
  const double c_next =
      m_.min_cost(opposite(k_next), e) + distance(ray.x_s, ray.x_t);
  const Coord x_next = xof(n_unv);
  const Coord hug_next = m_.node(n_unv).hug;
  const PosId p_next = m_.get_pos(x_next);
  Best& b = m_.best(opposite(k_next), p_next);
  const Coord v_test = x_next - xof(n_prev);

  // A corner can be re-reached endlessly at the same cost: a trace that wraps
  // an obstacle back onto the corner rebuilds the same connection, the
  // overlap machinery re-verifies it, and the cycle repeats. Expansion is
  // deterministic, so an arrival is redundant exactly when an arrival with
  // the same cost, side, previous corner, and continuation was anchored here
  // before — the structure already grew everything this one could seed. An
  // equal-cost arrival routing through new corners must survive: it may carry
  // the only route to the optimum.
  std::string arrival_key;
  {
    char head[96];
    std::snprintf(head, sizeof head, "%.17g|%c|%lld,%lld|", c_next,
                  s_unv == Side::kLeft ? 'L' : 'R',
                  static_cast<long long>(xof(n_prev).x),
                  static_cast<long long>(xof(n_prev).y));
    arrival_key = head;
    int budget = 256;
    if (!continuation_sig(k_next, e, x_next, &budget, &arrival_key)) {
      arrival_key.clear();  // not comparable; never treated as a duplicate
    }
  }

  NodeId n_new = kNil;
  if (b.c < c_next) {
    const Side s_b = m_.node(b.node).sigma;
    const Coord v_b = x_next - b.x_from;
    if (cfg_.enable_o67 && s_unv == s_b &&
        crossing_discard(opposite(k_next), s_b, v_test, v_b)) {
      discard_reached_cast(e);
      return {k_next, kNil};
    }
    if (!arrival_key.empty()) b.seen.insert(std::move(arrival_key));
    n_new = get_node(x_next, NodeKind::kVerifiedExpensive, s_unv, opposite(k_next),
                     hug_next);
  } else if (b.c > c_next) {
    if (!arrival_key.empty()) b.seen.insert(std::move(arrival_key));
    n_new = get_node(x_next, NodeKind::kVerified, s_unv, opposite(k_next), hug_next);
    b.c = c_next;
    b.node = n_new;
    b.x_from = xof(n_prev);
    conv_to_ex_branch(opposite(k_next), p_next);
  } else {
    if (!arrival_key.empty() && !b.seen.insert(std::move(arrival_key)).second) {
      discard_reached_cast(e);
      return {k_next, kNil};
    }
    const Side s_b = m_.node(b.node).sigma;
    const Coord v_b = x_next - b.x_from;
    if (s_unv == s_b && !crossing_discard(opposite(k_next), s_b, v_test, v_b)) {
      b.x_from = xof(n_prev);
    }
    n_new = get_node(x_next, m_.node(n_prev).kind, s_unv, opposite(k_next), hug_next);
  }
  finish_reached_cast(k_next, n_new, e, lam);
  return {k_next, n_new};
}

void Engine::discard_reached_cast(LinkId e) {
  const LinkId e_s = m_.first_neighbor(Tree::kSource, e);
  m_.disconnect(Tree::kTarget, e_s, e);
  m_.erase_tree(Tree::kSource, e_s);
  m_.erase_tree(Tree::kTarget, e);
}

void Engine::finish_reached_cast(Tree k_next, NodeId n_next, LinkId e, RayId lam) {
  m_.anchor(e, n_next);
  m_.link(e).c = m_.link_cost(e);
  const auto nexts = m_.neighbors(k_next, e);
  for (const LinkId e_next : nexts) m_.isolate(opposite(k_next), e_next, e);

  if (cumvis(m_.node(side_node(Tree::kSource, e)).kind)) {
    const Side s_n = m_.node(n_next).sigma;
    m_.merge_ray(opposite(s_n), e, lam);
    for (const LinkId e_next : m_.neighbors(Tree::kTarget, e)) {
      m_.merge_ray(s_n, e_next, lam);
    }
  }

  const PosId p = m_.node(n_next).pos;
  size_t links_all = 0;
  for (const NodeId n : m_.pos(p).nodes) links_all += m_.node(n).links.size();
  const size_t links_mine = 1 + m_.neighbors(k_next, e).size();
  if (links_all > links_mine) m_.push_overlap(p);
}

void Engine::queue_reached_cast(Tree k_next, LinkId e) {
  const auto nexts = m_.neighbors(k_next, e);
  for (const LinkId e_next : nexts) {
    m_.queue(QueryKind::kCast, m_.link(e).c + m_.link(e_next).c, e_next);
  }
}

void Engine::reached_tm(RayId lam, LinkId e) {
  SectorRay& ray = m_.ray(lam);
  const Coord v_ray = ray.x_t - ray.x_s;
  const NodeId n_t = side_node(Tree::kTarget, e);
  const Coord x_tr = xof(n_t);
  const Side s_tr = m_.node(n_t).sigma;
  const Crn crn{x_tr, m_.node(n_t).hug};

  const CornerKind ck = corner_kind(g_, x_tr);
  const bool convex_like =
      ck == CornerKind::kConvex ||
      (ck == CornerKind::kCheckerboard && !crn.hug.is_zero());
  if (!convex_like) {
    tracer_from_link(e);
    return;
  }
  const Coord v_next = detail::departure_edge(g_, crn, s_tr);
  if (!is_rev(Tree::kSource, s_tr, v_ray, v_next)) {
    tracer_from_link(e);
    return;
  }

  const NodeId n_s = side_node(Tree::kSource, e);
  NodeId n_next;
  if (!cumvis(m_.node(n_s).kind)) {
    n_next = no_cumulative_visibility(lam, e).second;
  } else {
    n_next = single_cumulative_visibility(lam, e).second;
    if (n_next == kNil) return;
  }

  const auto parked = cast_from_tm(e, crn, s_tr, v_next);
  if (!parked.empty()) trace_from_tm(e, crn, s_tr, v_next, parked);
}

std::vector<LinkId> Engine::cast_from_tm(LinkId e, Crn crn, Side s_tr,
                                         Coord v_next) {
  std::vector<LinkId> parked;
  const auto targets = m_.neighbors(Tree::kTarget, e);
  for (const LinkId e_t : targets) {
    const NodeId n_par = side_node(Tree::kTarget, e_t);
    const Coord v_par = crn.v - xof(n_par);
    if (is_vis(s_tr, v_par, v_next)) {
      const NodeId n_new =
          get_node(crn.v, NodeKind::kUnverified, s_tr, Tree::kTarget, crn.hug);
      m_.anchor(e_t, n_new);
      m_.queue(QueryKind::kCast, m_.link(e).c + m_.link(e_t).c, e_t);
    } else {
      parked.push_back(e_t);
    }
  }
  return parked;
}

void Engine::trace_from_tm(LinkId e, Crn crn, Side s_tr, Coord v_next,
                           const std::vector<LinkId>& parked) {
  TraceState d = make_trace(crn, s_tr);
  const LinkId e_hat_s = m_.create_link(d.head_s);
  m_.connect(Tree::kTarget, e, e_hat_s);
  d.m_s.push_back({e_hat_s, v_next, 0});
  for (const LinkId h : parked) {
    const NodeId n_new_t = side_node(Tree::kTarget, h);
    m_.anchor(h, d.head_t);
    m_.disconnect(Tree::kTarget, e, h);
    d.m_t.push_back({h, crn.v - xof(n_new_t), 0});
  }
  d.crn = detail::contour_next(g_, crn, s_tr);
  tracer(d);
}

void Engine::cast_collided(RayId lam, LinkId e) {
  const NodeId n_s = side_node(Tree::kSource, e);
  SectorRay& ray = m_.ray(lam);
  // A cast blocked in its very first step detours around the source's own
  // hugging obstacle, a walk that depends on the segment alone. Let it run
  // once; a repeat of the same ray can only rebuild identical structure and
  // requeue itself forever.
  if (blocked_at_origin(g_, ray.x_s, ray.x_t - ray.x_s) &&
      !origin_collision_spawned_.insert(lam).second) {
    discard_reached_cast(e);
    return;
  }
  // Refinement: a hugging run launched against the source's own corner dies
  // on arrival, so the backstop trace it pairs with can be skipped.
  const Side s_mnr = opposite(m_.node(n_s).sigma);
  const bool minor_refound =
      m_.node(n_s).kind != NodeKind::kVerifiedExpensive &&
      collision_crn(ray, s_mnr).v == xof(n_s);
  const bool skip_third = cfg_.minor_trace_refinement && minor_refound;
  minor_trace(lam, e);
  third_trace(lam, e, skip_third);
  major_trace(lam, e);
}

void Engine::minor_trace(RayId lam, LinkId e) {
  const NodeId n_s = side_node(Tree::kSource, e);
  if (m_.node(n_s).kind == NodeKind::kVerifiedExpensive) return;
  const Side s_mnr = opposite(m_.node(n_s).sigma);
  SectorRay& ray = m_.ray(lam);
  const Coord v_ray = ray.x_t - ray.x_s;
  TraceState d = make_trace(collision_crn(ray, s_mnr), s_mnr);
  const LinkId e_new_s = m_.copy_link(e, d.head_s, true, false);
  m_.merge_ray(opposite(s_mnr), e_new_s, lam);
  d.m_s.push_back({e_new_s, v_ray, 0});
  const LinkId h_new_t = m_.create_link(d.head_t);
  const auto targets = m_.neighbors(Tree::kTarget, e);
  for (const LinkId e_t : targets) m_.connect(Tree::kTarget, h_new_t, e_t);
  d.m_t.push_back({h_new_t, -v_ray, 0});
  tracer(d);
}

void Engine::third_trace(RayId lam, LinkId e, bool skip_hint) {
  SectorRay& ray = m_.ray(lam);
  const NodeId n_s = side_node(Tree::kSource, e);
  if (ray.x_t != goal_ || m_.node(n_s).kind == NodeKind::kVerifiedExpensive) return;
  if (skip_hint) return;
  const Side s_thd = m_.node(n_s).sigma;
  const Crn src_crn = node_crn(n_s);
  const auto fwd = detail::contour_next(g_, src_crn, s_thd);
  const auto bwd = detail::contour_next(g_, src_crn, opposite(s_thd));
  if (!fwd || !bwd) return;

  TraceState d = make_trace(src_crn, s_thd);
  d.crn = fwd;
  const LinkId e_new_s = m_.copy_link(e, d.head_s, true, false);
  m_.merge_ray(s_thd, e_new_s, lam);
  d.m_s.push_back({e_new_s, fwd->v - src_crn.v, 0});

  const NodeId n_new_un =
      get_node(src_crn.v, NodeKind::kPhantom, s_thd, Tree::kTarget, src_crn.hug);
  const LinkId e_new_un = m_.create_link(n_new_un);
  const auto targets = m_.neighbors(Tree::kTarget, e);
  for (const LinkId e_t : targets) m_.connect(Tree::kTarget, e_new_un, e_t);
  m_.link(e_new_un).c = m_.link_cost(e_new_un);

  const NodeId n_new_oc =
      get_node(bwd->v, NodeKind::kOccluded, s_thd, Tree::kTarget, bwd->hug);
  const LinkId e_new_oc = m_.create_link(n_new_oc);
  m_.connect(Tree::kTarget, e_new_oc, e_new_un);
  m_.link(e_new_oc).c = m_.link_cost(e_new_oc);

  const LinkId h_new_t = m_.create_link(d.head_t);
  m_.connect(Tree::kTarget, h_new_t, e_new_oc);
  d.m_t.push_back({h_new_t, fwd->v - bwd->v, 0});
  tracer(d);
}

void Engine::major_trace(RayId lam, LinkId e) {
  const NodeId n_s = side_node(Tree::kSource, e);
  const Side s_maj = m_.node(n_s).sigma;
  SectorRay& ray = m_.ray(lam);
  const Coord v_ray = ray.x_t - ray.x_s;
  TraceState d = make_trace(collision_crn(ray, s_maj), s_maj);
  m_.anchor(e, d.head_s);
  m_.merge_ray(opposite(s_maj), e, lam);
  d.m_s.push_back({e, v_ray, 0});
  const LinkId h_new_t = m_.create_link(d.head_t);
  const auto targets = m_.neighbors(Tree::kTarget, e);
  for (const LinkId e_t : targets) {
    m_.disconnect(Tree::kTarget, e, e_t);
    m_.connect(Tree::kTarget, h_new_t, e_t);
  }
  d.m_t.push_back({h_new_t, -v_ray, 0});
  tracer(d);
}

void Engine::tracer_from_link(LinkId e) {
  const NodeId n_t = side_node(Tree::kTarget, e);
  const NodeId n_s = side_node(Tree::kSource, e);
  TraceState d = make_trace(node_crn(n_t), m_.node(n_t).sigma);
  d.i_crn0 = m_.node(n_t).steps;
  m_.anchor(e, d.head_s);
  d.m_s.push_back({e, xof(n_t) - xof(n_s), 0});
  const auto targets = m_.neighbors(Tree::kTarget, e);
  for (const LinkId e_t : targets) {
    const NodeId n_parent = side_node(Tree::kTarget, e_t);
    m_.disconnect(Tree::kTarget, e, e_t);
    m_.anchor(e_t, d.head_t);
    d.m_t.push_back({e_t, xof(n_t) - xof(n_parent), 0});
  }
  tracer(d);
}

void Engine::tracer(TraceState& d) {
  ++stats_.traces;
  ++trace_depth_;
  // A trace can never legitimately outlast a few laps of the largest contour.
  const int64_t corner_cap =
      std::min<int64_t>(64 + 8 * (g_.width() + 1) * (g_.height() + 1),
                        1'000'000'000);
  while (true) {
    if (!d.crn) break;
    ++d.i_crn;
    ++stats_.corners_traced;
    if (static_cast<int64_t>(d.i_crn0) + d.i_crn > corner_cap) break;
    if (d.m_s.empty() || d.m_t.empty()) break;
    // The contour can pass through the source's own position when an endpoint
    // sits on an obstacle corner or a cast grazed a wall incident to it. A
    // corner co-located with the source adds nothing the source cannot do, so
    // step over it; meeting it a second time means a full wrap-around.
    if (refound_src(d)) {
      if (d.passed_src) break;
      d.passed_src = true;
      d.crn = detail::contour_next(g_, *d.crn, d.sigma);
      continue;
    }
    if (!prog_apply(d, d.m_s.front(), Tree::kSource)) {
      if (src_prog_cast(d)) break;
    } else {
      if (tracer_proc(Tree::kTarget, d)) break;
      if (tracer_proc(Tree::kSource, d)) break;
      if (interrupt_rule(d)) break;
      if (place_rule(d)) break;
    }
    d.crn = detail::contour_next(g_, *d.crn, d.sigma);
  }
  for (const Tree k : {Tree::kSource, Tree::kTarget}) {
    for (const Nodelet& m : nlets(k, d)) m_.erase_tree(k, m.link);
  }
  --trace_depth_;
}

bool Engine::refound_src(TraceState& d) {
  return xof(side_node(Tree::kSource, d.m_s.front().link)) == d.crn->v;
}

bool Engine::prog_apply(TraceState& d, Nodelet& m, Tree k_list) {
  const NodeId n_par = side_node(k_list, m.link);
  const Tree k_par = m_.node(n_par).kappa;
  const Coord x_d = d.crn->v;
  Coord v_par = x_d - xof(n_par);
  if (v_par.is_zero()) v_par = detail::generalized_bisect(g_, x_d, d.crn->hug);
  const Coord v_prev = -detail::departure_edge(g_, *d.crn, opposite(d.sigma));
  const auto out =
      progression_rule(k_par, d.sigma, v_par, v_prev, {m.v_prog, m.i_prog});
  m.v_prog = out.next.v_prog;
  m.i_prog = out.next.i_prog;
  return out.progressed;
}

bool Engine::tracer_proc(Tree k_par, TraceState& d) {
  auto& nl = nlets(k_par, d);
  size_t i = 0;
  while (i < nl.size()) {
    const NodeId n_par = side_node(k_par, nl[i].link);
    bool advance = true;
    if (k_par == Tree::kTarget && !prog_apply(d, nl[i], k_par)) {
      // parent not progressing: leave it alone this corner
    } else if (k_par == Tree::kSource && ang_sec_rule(d, i)) {
      advance = false;
    } else if (xof(n_par) == start_ || xof(n_par) == goal_) {
      // endpoints are never pruned away
    } else if (m_.node(n_par).sigma == d.sigma) {
      advance = !prune_rule(d, k_par, i);
    } else {
      advance = !oc_sec_rule(d, k_par, i);
    }
    if (advance) ++i;
  }
  return nl.empty();
}

bool Engine::src_prog_cast(TraceState& d) {
  Nodelet& m_src = d.m_s.front();
  if (m_src.i_prog <= 1) return false;
  if (d.m_t.size() != 1) return false;
  Nodelet& m_tgt = d.m_t.front();
  const LinkId e_t = m_.first_neighbor(Tree::kTarget, m_tgt.link);
  const NodeId n_t = anchor_node(e_t);
  m_.anchor(e_t, get_node(xof(n_t), NodeKind::kPhantom, m_.node(n_t).sigma,
                          Tree::kTarget, m_.node(n_t).hug));
  const LinkId e_new_vu = m_src.link;
  const LinkId e_s = m_.first_neighbor(Tree::kSource, e_new_vu);
  const NodeId n_s = anchor_node(e_s);
  m_.anchor(e_new_vu, get_node(xof(n_s), NodeKind::kUnverified, m_.node(n_s).sigma,
                               Tree::kTarget, m_.node(n_s).hug));
  m_.connect(Tree::kTarget, e_new_vu, e_t);
  m_.link(e_new_vu).c = m_.link_cost(e_new_vu);
  m_.queue(QueryKind::kCast, m_.link(e_s).c + m_.link(e_new_vu).c, e_new_vu);
  return true;
}

bool Engine::prune_rule(TraceState& d, Tree k_par, size_t i) {
  auto& nl = nlets(k_par, d);
  const LinkId e_hat = nl[i].link;
  const NodeId n_par = side_node(k_par, e_hat);
  if (k_par == Tree::kSource && m_.node(n_par).kind == NodeKind::kVerified) {
    return false;
  }
  const Side s_par = m_.node(n_par).sigma;
  const Coord x_d = d.crn->v;
  const Coord v_par = x_d - xof(n_par);
  const auto parents = m_.neighbors(k_par, e_hat);
  for (const LinkId e_par : parents) {
    const NodeId n_gpar = side_node(k_par, e_par);
    const Coord v_gpar = xof(n_par) - xof(n_gpar);
    if (taut_turn(k_par, s_par, v_par, v_gpar)) continue;
    // A bend squeezing through a pinched corner is legal in either turn
    // direction; one-sided tautness does not apply there.
    if (pinch_threading_turn(g_, xof(n_par), v_gpar, v_par)) continue;
    m_.disconnect(opposite(k_par), e_par, e_hat);
    const LinkId e_new = m_.isolate(opposite(k_par), e_par, kNil, head(k_par, d));
    if (k_par == Tree::kTarget) {
      m_.ray_slot(Side::kLeft, e_new) = kNil;
      m_.ray_slot(Side::kRight, e_new) = kNil;
    }
    nl.push_back({e_new, x_d - xof(n_gpar), 0});
  }
  if (m_.neighbors(k_par, e_hat).empty()) {
    m_.delete_link(e_hat);
    nl.erase(nl.begin() + static_cast<ptrdiff_t>(i));
    return true;
  }
  return false;
}

bool Engine::oc_sec_rule(TraceState& d, Tree k_par, size_t i) {
  auto& nl = nlets(k_par, d);
  const LinkId e_hat = nl[i].link;
  const NodeId n_par = side_node(k_par, e_hat);
  const Side s_par = m_.node(n_par).sigma;
  const Coord x_d = d.crn->v;
  const Coord v_par = x_d - xof(n_par);

  if (m_.node(n_par).kind == NodeKind::kOccluded) {
    const LinkId e_oc = m_.first_neighbor(Tree::kTarget, e_hat);
    const NodeId n_gpar = side_node(Tree::kTarget, e_oc);
    const Coord v_gpar = xof(n_par) - xof(n_gpar);
    if (sgn(s_par) * cross(v_par, v_gpar) <= 0) {
      m_.erase_tree(Tree::kTarget, e_hat);
      nl.erase(nl.begin() + static_cast<ptrdiff_t>(i));
      return true;
    }
    return false;
  }

  // The contour edge the parent's obstacle leaves by, on the side the parent
  // occludes: side sign is -kappa*sigma.
  const Side s_oc =
      (sgn(k_par) * sgn(s_par)) < 0 ? Side::kRight : Side::kLeft;
  const Coord v_ocpar = detail::departure_edge(g_, node_crn(n_par), s_oc);
  if (sgn(k_par) * sgn(s_par) * cross(v_par, v_ocpar) <= 0) return false;

  if (k_par == Tree::kSource) {
    if (trace_depth_ >= kMaxTraceDepth) {
      m_.erase_tree(Tree::kSource, e_hat);
      nl.erase(nl.begin() + static_cast<ptrdiff_t>(i));
      return true;
    }
    // The parent fell behind its own contour: restart a trace from it and
    // park the current targets at a temporary node for the new run.
    TraceState d_new = make_trace(node_crn(n_par), s_par);
    m_.anchor(e_hat, d_new.head_s);
    Nodelet moved = nl[i];
    moved.v_prog = v_ocpar;
    nl.erase(nl.begin() + static_cast<ptrdiff_t>(i));
    d_new.m_s.push_back(moved);

    const NodeId n_tm =
        get_node(x_d, NodeKind::kTemporary, d.sigma, Tree::kTarget, d.crn->hug);
    const LinkId h_new_t = m_.create_link(d_new.head_t);
    d_new.m_t.push_back({h_new_t, -v_par, 0});
    for (Nodelet& m_t : d.m_t) {
      m_.anchor(m_t.link, n_tm);
      m_.link(m_t.link).c = m_.link_cost(m_t.link);
      m_.connect(Tree::kTarget, h_new_t, m_t.link);
    }
    d_new.crn = detail::contour_next(g_, *d_new.crn, s_par);
    tracer(d_new);
    // The whole target side was handed to the new trace; this one is done.
    d.m_t.clear();
    return true;
  }

  // Target-side parent occluded: park it behind an occlusion marker one
  // contour step back and keep following with a fresh trace link.
  const auto oc_crn = detail::contour_next(g_, node_crn(n_par), opposite(s_par));
  if (!oc_crn) {
    m_.erase_tree(Tree::kTarget, e_hat);
    nl.erase(nl.begin() + static_cast<ptrdiff_t>(i));
    return true;
  }
  const NodeId n_new_oc =
      get_node(oc_crn->v, NodeKind::kOccluded, s_par, Tree::kTarget, oc_crn->hug);
  m_.anchor(e_hat, n_new_oc);
  m_.link(e_hat).c = m_.link_cost(e_hat);
  const LinkId h_new_t = m_.create_link(d.head_t);
  m_.connect(Tree::kTarget, h_new_t, e_hat);
  nl[i].link = h_new_t;
  nl[i].v_prog = v_par;
  return false;
}

bool Engine::ang_sec_rule(TraceState& d, size_t i) {
  Nodelet& m = d.m_s[i];
  const RayId lam = m_.ray_of(d.sigma, m.link);
  if (ray_not_crossed(lam, d, m)) return false;
  {
    // Crossing the bound that runs into the source node is legal when the
    // bend squeezes through a pinched corner there: the straight shortcut
    // past the node is blocked by the pinch itself, so no ancestor can own
    // the region beyond. Leave the bend to the pruning rule.
    const SectorRay& ray = m_.ray(lam);
    const NodeId n_s = side_node(Tree::kSource, m.link);
    const Coord x_p = xof(n_s);
    if (ray.x_t == x_p &&
        pinch_threading_turn(g_, x_p, ray.x_t - ray.x_s, d.crn->v - x_p)) {
      return false;
    }
  }
  ang_sec_prune(m_.ray(lam), d, m);
  project(lam);
  recur_ang_sec_trace(lam, d, i);
  return true;
}

bool Engine::ray_not_crossed(RayId lam, TraceState& d, Nodelet& m) {
  if (lam == kNil) return true;
  SectorRay& ray = m_.ray(lam);
  const Coord v_ray = ray.x_t - ray.x_s;
  const NodeId n_s = side_node(Tree::kSource, m.link);
  const Coord x_d = d.crn->v;
  const Coord v_par = x_d - xof(n_s);
  if (v_par.is_zero()) return true;  // standing on the node: inside its sector
  const int64_t u = sgn(d.sigma) * cross(v_ray, v_par);
  if (u > 0) return true;
  if (u == 0) {
    // The corner sits on the ray's line, so sidedness alone cannot decide.
    // The ray counts as crossed only if the trace stands exactly on the
    // ray's own same-side collision corner; anything else (including the
    // degenerate endpoint-hugging-an-obstacle rays, whose projection dies
    // at their source) stays inside the sector.
    project(lam);
    return collision_crn(m_.ray(lam), d.sigma).v != x_d;
  }
  return false;
}

void Engine::ang_sec_prune(const SectorRay& lam, TraceState& d, Nodelet& m) {
  const LinkId e_s = m_.first_neighbor(Tree::kSource, m.link);
  const NodeId n_s = anchor_node(e_s);
  // Pruning re-parents the trace one node down the source tree, so the
  // start's root link, which has nothing behind it, can never be pruned.
  if (m_.neighbors(Tree::kSource, e_s).empty()) return;
  const bool prunable =
      lam.x_t == xof(n_s) ||
      (lam.x_t == start_ && lam.x_s == goal_ && d.sigma == m_.node(n_s).sigma);
  if (!prunable) return;
  const LinkId e_new_s = m_.isolate(Tree::kTarget, e_s, kNil, d.head_s);
  const NodeId n_new_s = side_node(Tree::kSource, e_new_s);
  d.m_s.push_back({e_new_s, d.crn->v - xof(n_new_s), 0});
}

void Engine::recur_ang_sec_trace(RayId lam, TraceState& d, size_t i) {
  const LinkId e_hat = d.m_s[i].link;
  const NodeId n_s = side_node(Tree::kSource, e_hat);
  SectorRay& ray = m_.ray(lam);
  const Coord x_d = d.crn->v;
  const Crn same_side = collision_crn(ray, d.sigma);
  const Crn other_side = collision_crn(ray, opposite(d.sigma));
  std::optional<Crn> x_new_un = same_side;
  if (same_side.v == other_side.v) {
    x_new_un = detail::contour_next(g_, same_side, d.sigma);
  }
  // A recursive trace continues the sweep of the source's sector past the
  // obstacle blocking the crossed ray, so it must start inside the sector's
  // other bound. When obstacles crowd the source, the landing corner can
  // already lie beyond that bound; such a trace serves nothing and only
  // bounces back across the first ray forever.
  bool born_outside = false;
  const RayId mu = m_.ray_of(opposite(d.sigma), e_hat);
  if (mu != kNil) {
    const SectorRay& ray_mu = m_.ray(mu);
    const Coord v_mu = ray_mu.x_t - ray_mu.x_s;
    const Coord v_land = other_side.v - xof(n_s);
    if (!v_land.is_zero() &&
        sgn(opposite(d.sigma)) * cross(v_mu, v_land) < 0) {
      born_outside = true;
    }
  }
  // Discard when the trace already passed the projected ray's collision
  // corner, when the projection makes no headway (it dies on the obstacle
  // its own source corner hugs, or the recursion would restart at the ray's
  // own origin, whose opposite rotation the sibling trace already sweeps),
  // when the parent is already expensive, or when the contour past the
  // collision leaves the map.
  if (same_side.v == x_d || same_side.v == ray.x_s ||
      other_side.v == ray.x_s || born_outside ||
      m_.node(n_s).kind == NodeKind::kVerifiedExpensive || !x_new_un ||
      trace_depth_ >= kMaxTraceDepth) {
    m_.erase_tree(Tree::kSource, e_hat);
    d.m_s.erase(d.m_s.begin() + static_cast<ptrdiff_t>(i));
    return;
  }

  TraceState d_new = make_trace(other_side, opposite(d.sigma));
  Nodelet moved = d.m_s[i];
  d.m_s.erase(d.m_s.begin() + static_cast<ptrdiff_t>(i));
  m_.anchor(moved.link, d_new.head_s);
  moved.v_prog = d_new.crn->v - xof(n_s);
  d_new.m_s.push_back(moved);

  const NodeId n_new_un = get_node(x_new_un->v, NodeKind::kPhantom,
                                   opposite(d.sigma), Tree::kTarget, x_new_un->hug);
  const LinkId e_new_t = m_.create_link(n_new_un);
  const NodeId n_tm =
      get_node(x_d, NodeKind::kTemporary, d.sigma, Tree::kTarget, d.crn->hug);
  for (Nodelet& m_t : d.m_t) {
    const LinkId e_new_tt = m_.copy_link(m_t.link, n_tm, false, true);
    m_.link(e_new_tt).c = m_.link_cost(e_new_tt);
    m_.connect(Tree::kTarget, e_new_t, e_new_tt);
  }
  m_.link(e_new_t).c = m_.link_cost(e_new_t);
  const LinkId h_new_t = m_.create_link(d_new.head_t);
  m_.connect(Tree::kTarget, h_new_t, e_new_t);
  d_new.m_t.push_front({h_new_t, d_new.crn->v - x_new_un->v, 0});
  tracer(d_new);
}

bool Engine::interrupt_rule(TraceState& d) {
  if (d.i_crn < cfg_.num_interrupt) return false;
  if (d.m_s.empty() || d.m_t.empty()) return false;
  for (const Nodelet& m : d.m_s) {
    if (m.i_prog != 0) return false;
  }
  for (const Nodelet& m : d.m_t) {
    if (m.i_prog != 0) return false;
  }
  const Coord x_d = d.crn->v;
  const NodeId n_vu =
      get_node(x_d, NodeKind::kUnverified, d.sigma, Tree::kSource, d.crn->hug);
  const LinkId e_new_s = d.m_s.front().link;
  m_.anchor(e_new_s, n_vu);
  m_.link(e_new_s).c = m_.link_cost(e_new_s);
  const NodeId n_tm =
      get_node(x_d, NodeKind::kTemporary, d.sigma, Tree::kTarget, d.crn->hug);
  // Pass the corner odometer to the resumed trace; without it a trace circling
  // a small closed contour is reborn fresh at every interrupt and never dies.
  m_.node(n_tm).steps = std::max(m_.node(n_tm).steps, d.i_crn0 + d.i_crn);
  for (Nodelet& m_t : d.m_t) {
    m_.anchor(m_t.link, n_tm);
    m_.link(m_t.link).c = m_.link_cost(m_t.link);
    m_.connect(Tree::kTarget, e_new_s, m_t.link);
  }
  if (d.b_over) {
    m_.push_overlap(m_.get_pos(x_d));
  } else {
    m_.queue(QueryKind::kTrace, m_.link(e_new_s).c + m_.min_cost(Tree::kTarget, e_new_s),
             e_new_s);
  }
  return true;
}

bool Engine::place_rule(TraceState& d) {
  const Coord x_d = d.crn->v;
  const CornerKind ck = corner_kind(g_, x_d);
  const bool convex_like =
      ck == CornerKind::kConvex ||
      (ck == CornerKind::kCheckerboard && !d.crn->hug.is_zero());
  const Tree k_par = convex_like ? Tree::kSource : Tree::kTarget;
  const auto m_new = place_node(k_par, d);
  if (!m_new || k_par == Tree::kTarget) return false;
  const PosId p = m_.get_pos(x_d);
  size_t links_all = 0;
  for (const NodeId n : m_.pos(p).nodes) links_all += m_.node(n).links.size();
  if (links_all > 1) d.b_over = true;
  cast_from_trace(d, *m_new);
  return d.m_t.empty();
}

std::optional<size_t> Engine::place_node(Tree k_par, TraceState& d) {
  const Coord x_d = d.crn->v;
  const Coord v_next = detail::departure_edge(g_, *d.crn, d.sigma);
  auto& nl = nlets(k_par, d);
  std::optional<size_t> first;
  NodeId n_new_par = kNil;
  size_t i = 0;
  while (i < nl.size()) {
    Nodelet& m = nl[i];
    const NodeId n_par = side_node(k_par, m.link);
    const Coord v_par = x_d - xof(n_par);
    if (m.i_prog > 0 || !is_rev(k_par, d.sigma, v_par, v_next)) {
      ++i;
      continue;
    }
    const LinkId e_new_par = m.link;
    if (!first) {
      NodeKind kind = NodeKind::kUnverified;
      if (k_par == Tree::kTarget) {
        kind = NodeKind::kTemporary;
      } else if (is_expensive(m_.node(n_par).kind)) {
        kind = NodeKind::kUnverifiedExpensive;
      }
      n_new_par = get_node(x_d, kind, d.sigma, k_par, d.crn->hug);
      m_.anchor(e_new_par, n_new_par);
      m_.link(e_new_par).c = m_.link_cost(e_new_par);
      const LinkId fresh = m_.create_link(head(k_par, d));
      m_.connect(k_par, fresh, e_new_par);
      m.link = fresh;
      m.v_prog = v_next;
      m.i_prog = 0;
      first = i;
      ++i;
    } else {
      m_.anchor(e_new_par, n_new_par);
      m_.link(e_new_par).c = m_.link_cost(e_new_par);
      m_.connect(k_par, nl[*first].link, e_new_par);
      nl.erase(nl.begin() + static_cast<ptrdiff_t>(i));
    }
  }
  return first;
}

void Engine::cast_from_trace(TraceState& d, size_t first_idx) {
  const Coord x_d = d.crn->v;
  const Coord v_next = detail::departure_edge(g_, *d.crn, d.sigma);
  const LinkId e_s = m_.first_neighbor(Tree::kSource, d.m_s[first_idx].link);
  const NodeId n_s = anchor_node(e_s);
  NodeId n_new_vu = kNil;
  size_t j = 0;
  while (j < d.m_t.size()) {
    const LinkId e_new_t = d.m_t[j].link;
    const NodeId n_t = side_node(Tree::kTarget, e_new_t);
    const Coord v_par = x_d - xof(n_t);
    if (!is_vis(d.sigma, v_par, v_next)) {
      ++j;
      continue;
    }
    if (n_new_vu == kNil) {
      n_new_vu =
          get_node(x_d, NodeKind::kUnverified, d.sigma, Tree::kTarget, d.crn->hug);
    }
    m_.anchor(e_new_t, n_new_vu);
    m_.link(e_new_t).c = m_.link_cost(e_new_t);
    m_.connect(Tree::kTarget, e_s, e_new_t);
    if (d.b_over || m_.node(n_s).kind == NodeKind::kUnverifiedExpensive) {
      d.b_over = false;
      m_.push_overlap(m_.get_pos(x_d));
    } else {
      m_.queue(QueryKind::kCast, m_.link(e_s).c + m_.link(e_new_t).c, e_new_t);
    }
    d.m_t.erase(d.m_t.begin() + static_cast<ptrdiff_t>(j));
  }
}

void Engine::shrink_source_tree() {
  for (const PosId p : m_.drain_overlaps()) {
    const auto nodes = m_.pos(p).nodes;
    for (const NodeId n : nodes) {
      if (m_.node(n).kappa == Tree::kTarget) continue;
      const NodeKind kind = m_.node(n).kind;
      if (kind != NodeKind::kUnverified && kind != NodeKind::kUnverifiedExpensive) {
        continue;
      }
      const auto links = m_.node(n).links;
      for (const LinkId e : links) {
        if (m_.link(e).dead) continue;
        if (m_.link(e).anchor != n) continue;  // moved by an earlier conversion
        LinkId e_i = e;
        LinkId e_sy = m_.first_neighbor(Tree::kSource, e_i);
        while (!cumvis(m_.node(anchor_node(e_sy)).kind)) {
          e_i = e_sy;
          e_sy = m_.first_neighbor(Tree::kSource, e_i);
        }
        conv_to_tgt_branch(e_i);
        m_.queue(QueryKind::kCast, m_.link(e_sy).c + m_.link(e_i).c, e_i);
      }
    }
  }
}

void Engine::conv_to_tgt_branch(LinkId e) {
  m_.unqueue(e);
  const NodeId n = anchor_node(e);
  if (m_.node(n).kappa == Tree::kTarget) return;
  const auto children = m_.neighbors(Tree::kTarget, e);
  for (const LinkId e_t : children) conv_to_tgt_branch(e_t);
  const NodeId n_s = side_node(Tree::kSource, e);
  m_.anchor(e, get_node(xof(n_s), NodeKind::kUnverified, m_.node(n_s).sigma,
                        Tree::kTarget, m_.node(n_s).hug));
  m_.link(e).c = m_.link_cost(e);
}

void Engine::conv_to_ex_branch(Tree k, PosId p) {
  const auto nodes = m_.pos(p).nodes;
  for (const NodeId n : nodes) {
    if (m_.node(n).kind != NodeKind::kVerified || m_.node(n).kappa != k) continue;
    const Best& b = m_.best(k, p);
    const Side s_b = m_.node(b.node).sigma;
    const Coord v_b = m_.pos(p).x - b.x_from;
    const auto links = m_.node(n).links;
    for (const LinkId e : links) {
      if (m_.link(e).dead || m_.link(e).anchor != n) continue;
      if (m_.neighbors(k, e).empty()) continue;  // tree root: origin cost is final
      const LinkId e_par = m_.first_neighbor(k, e);
      const Coord v_par = m_.pos(p).x - xof(anchor_node(e_par));
      if (cfg_.enable_o67 && m_.node(n).sigma == s_b &&
          crossing_discard(k, s_b, v_par, v_b)) {
        m_.disconnect(k, e, e_par);
        m_.erase_tree(opposite(k), e);
      } else {
        conv_to_ex_branch_aux(k, e_par, e, m_.node(n).sigma);
      }
      m_.erase_tree(k, e_par);
    }
  }
}

void Engine::conv_to_ex_branch_aux(Tree k, LinkId e_par, LinkId e, Side s) {
  const NodeId n = anchor_node(e);
  if (m_.node(n).sigma != s && cumvis(m_.node(n).kind)) {
    m_.disconnect(k, e, e_par);
    m_.erase_tree(opposite(k), e);
    return;
  }
  if (m_.node(n).kind != NodeKind::kVerified) {
    if (k == Tree::kSource && m_.node(n).kind == NodeKind::kUnverified) {
      conv_to_tgt_branch(e);
      m_.queue(QueryKind::kCast, m_.link(e).c + m_.link(e_par).c, e);
    }
    return;
  }
  const auto children = m_.neighbors(opposite(k), e);
  for (const LinkId e_chd : children) conv_to_ex_branch_aux(k, e, e_chd, s);
  if (m_.neighbors(opposite(k), e).empty()) {
    m_.disconnect(k, e, e_par);
    m_.erase_tree(opposite(k), e);
  } else {
    m_.anchor(e, get_node(xof(n), NodeKind::kVerifiedExpensive, s, k, m_.node(n).hug));
  }
}

// Any-angle travel stays inside one connected region of free cells. Segments
// may slide along obstacle boundaries and squeeze through a corner where two
// free cells meet only diagonally, so regions join across edge and corner
// adjacency alike (8-connectivity). When the endpoints share no region, no
// path exists; the search machinery assumes every expansion can eventually be
// verified by a line of sight and never settles otherwise, so answer directly.
bool endpoints_connected(const OccupancyGrid& g, Coord s, Coord t) {
  const int64_t w = g.width();
  const int64_t h = g.height();
  const auto each_incident_free = [&](Coord v, auto&& take) {
    for (int64_t cy = v.y - 1; cy <= v.y; ++cy) {
      for (int64_t cx = v.x - 1; cx <= v.x; ++cx) {
        if (cx < 0 || cy < 0 || cx >= w || cy >= h) continue;
        if (!g.is_occupied(cx, cy)) take(Coord{cx, cy});
      }
    }
  };
  // 0 = unvisited, 1 = frontier/visited from the start side, 2 = goal-incident.
  std::vector<uint8_t> mark(static_cast<size_t>(w * h), 0);
  const auto at = [&](int64_t cx, int64_t cy) -> uint8_t& {
    return mark[static_cast<size_t>(cy * w + cx)];
  };
  each_incident_free(t, [&](Coord c) { at(c.x, c.y) = 2; });
  bool met = false;
  std::vector<Coord> stack;
  each_incident_free(s, [&](Coord c) {
    if (at(c.x, c.y) == 2) met = true;
    at(c.x, c.y) = 1;
    stack.push_back(c);
  });
  while (!met && !stack.empty()) {
    const Coord c = stack.back();
    stack.pop_back();
    for (int64_t dy = -1; dy <= 1; ++dy) {
      for (int64_t dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const int64_t nx = c.x + dx;
        const int64_t ny = c.y + dy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        if (g.is_occupied(nx, ny)) continue;
        uint8_t& m = at(nx, ny);
        if (m == 2) {
          met = true;
        } else if (m == 0) {
          m = 1;
          stack.push_back({nx, ny});
        }
      }
    }
  }
  return met;
}

}  // namespace

PlanResult plan(const OccupancyGrid& g, Coord start, Coord goal,
                const PlannerConfig& cfg) {
  for (const Coord& v : {start, goal}) {
    if (!g.vertex_in_map(v)) {
      throw std::invalid_argument("invalid-endpoint: vertex outside map");
    }
    if (g.quadrant_mask(v) == 0xF) {
      throw std::invalid_argument("invalid-endpoint: vertex inside an obstacle");
    }
  }
  if (cfg.num_interrupt < 1) {
    throw std::invalid_argument("num_interrupt must be at least 1");
  }
  if (start == goal) {
    PlanResult out;
    out.path = {start};
    out.cost = 0.0;
    return out;
  }
  if (!endpoints_connected(g, start, goal)) return {};
  Engine eng(g, start, goal, cfg);
  PlanResult out = eng.run();
  if (cfg.strip_colinear && !out.path.empty()) {
    out.path = strip_colinear(std::move(out.path));
  }
  return out;
}

}  // namespace anyangle
