#pragma once

#include <cstdint>
#include <deque>
#include <limits>
#include <list>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "anyangle/grid.hpp"

namespace anyangle {

using NodeId = uint32_t;
using LinkId = uint32_t;
using PosId = uint32_t;
using RayId = uint32_t;
using QueryId = uint32_t;
inline constexpr uint32_t kNil = 0xffffffffu;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Search-node flavors. Verified kinds have cumulative visibility: the chain
// from them to their tree root has been line-of-sight checked. Expensive
// kinds survive being undercut by a cheaper route at the same position so
// they can still win past a crossing. Temporary, phantom and occluded nodes
// park links mid-trace: at the trace head, at the far target of an
// interrupted sector, and just past an occluding corner respectively.
enum class NodeKind : uint8_t {
  kVerified,
  kUnverified,
  kVerifiedExpensive,
  kUnverifiedExpensive,
  kTemporary,
  kPhantom,
  kOccluded,
};

constexpr bool has_cumulative_visibility(NodeKind k) {
  return k == NodeKind::kVerified || k == NodeKind::kVerifiedExpensive;
}
constexpr bool is_expensive(NodeKind k) {
  return k == NodeKind::kVerifiedExpensive || k == NodeKind::kUnverifiedExpensive;
}

// Cheapest route seen through a position from one tree's direction, used to
// arbitrate when search branches land on the same vertex.
struct Best {
  double c = kInf;
  NodeId node = kNil;
  Coord x_from{0, 0};  // previous vertex of the route that set the record
  // Arrivals anchored at this position, keyed by cost, approach, and the
  // continuation they carried. Expansion is deterministic, so a later arrival
  // with a key seen before can only rebuild what the structure already grew
  // from the first one.
  std::unordered_set<std::string> seen;
};

struct PositionRec {
  Coord x;
  std::vector<NodeId> nodes;
  Best best_s, best_t;
  bool in_overlap = false;
};

struct NodeRec {
  NodeKind kind;
  Side sigma;
  Tree kappa;
  PosId pos;                  // kNil for anonymous trace heads
  std::vector<LinkId> links;  // links anchored here
  Coord hug{0, 0};            // contour quadrant recorded when first placed
  int steps = 0;              // corner odometer carried across trace interrupts
};

// Links carry the search state: cost, the sector rays bounding future casts,
// neighbors toward the source tree (E_S) and target tree (E_T), and the
// open-list entry owning them.
struct LinkRec {
  NodeId anchor = kNil;
  std::vector<LinkId> neighbors[2];  // [0] source side, [1] target side
  double c = kInf;
  RayId rays[2] = {kNil, kNil};  // [0] left, [1] right
  QueryId query = kNil;
  bool dead = false;
};

enum class QueryKind : uint8_t { kCast, kTrace };

struct Polled {
  QueryKind kind;
  double f;
  LinkId link;
};

// Priority queue over pending casts and traces. The default store is a
// sorted list scanned from the back on insert (ties keep FIFO order); the
// alternative is a binary heap keyed (f, insertion seq) with lazy deletion.
class OpenList {
 public:
  explicit OpenList(bool use_heap) : use_heap_(use_heap) {}

  QueryId push(QueryKind kind, double f, LinkId link);
  void erase(QueryId q);
  std::optional<Polled> poll();
  bool empty() const { return alive_ == 0; }

 private:
  struct Rec {
    QueryKind kind;
    double f;
    LinkId link;
    bool alive;
    std::list<QueryId>::iterator where;  // list mode only
  };
  bool use_heap_;
  std::deque<Rec> recs_;
  std::list<QueryId> sorted_;
  struct HeapEntry {
    double f;
    uint64_t seq;
    QueryId q;
    bool operator>(const HeapEntry& o) const {
      return f != o.f ? f > o.f : seq > o.seq;
    }
  };
  std::vector<HeapEntry> heap_;
  uint64_t next_seq_ = 0;
  size_t alive_ = 0;
};

// Arena-backed registry for one plan: positions, nodes, links, sector rays,
// the open list and the overlap buffer. Ids are stable; removed records are
// tombstoned, never reused.
class SearchModel {
 public:
  explicit SearchModel(bool heap_open_list) : open_(heap_open_list) {}

  NodeRec& node(NodeId n) { return nodes_[n]; }
  const NodeRec& node(NodeId n) const { return nodes_[n]; }
  LinkRec& link(LinkId e) { return links_[e]; }
  const LinkRec& link(LinkId e) const { return links_[e]; }
  PositionRec& pos(PosId p) { return positions_[p]; }
  const PositionRec& pos(PosId p) const { return positions_[p]; }
  SectorRay& ray(RayId r) { return rays_[r]; }

  size_t node_count() const { return nodes_.size(); }
  size_t link_count() const { return links_.size(); }
  uint64_t links_created() const { return links_created_; }

  PosId get_pos(Coord x);
  std::optional<PosId> find_pos(Coord x) const;

  // Finds or creates the node of this flavor at x; one node per
  // (kind, side, tree) triple lives at each position.
  NodeId get_node(Coord x, NodeKind kind, Side sigma, Tree kappa);
  NodeId create_trace_node();

  Best& best(Tree k, PosId p) {
    return k == Tree::kSource ? positions_[p].best_s : positions_[p].best_t;
  }

  LinkId create_link(NodeId anchor);
  void delete_link(LinkId e);
  void anchor(LinkId e, NodeId n);

  std::vector<LinkId>& neighbors(Tree k, LinkId e) {
    return links_[e].neighbors[k == Tree::kSource ? 0 : 1];
  }
  const std::vector<LinkId>& neighbors(Tree k, LinkId e) const {
    return links_[e].neighbors[k == Tree::kSource ? 0 : 1];
  }
  // The single k-side neighbor of a link expected to have exactly one.
  LinkId first_neighbor(Tree k, LinkId e) const { return neighbors(k, e).front(); }

  void connect(Tree k, LinkId a, LinkId b);
  void disconnect(Tree k, LinkId a, LinkId b);

  RayId& ray_slot(Side s, LinkId e) {
    return links_[e].rays[s == Side::kLeft ? 0 : 1];
  }
  RayId ray_of(Side s, LinkId e) const {
    return links_[e].rays[s == Side::kLeft ? 0 : 1];
  }

  // Widens (or sets) the side-s sector ray of a link: the incoming ray
  // replaces the stored one when it lies no further s-ward than it.
  void merge_ray(Side s, LinkId e, RayId incoming);

  double min_cost(Tree k, LinkId e) const;

  // Cost of a link at node n: distance to its parents' shared position on
  // n's tree side plus the cheapest parent cost.
  double link_cost(LinkId e) const;

  // Copies anchor-independent state (cost, rays) and, per tree side
  // requested, the neighbor connections of e onto a fresh link at `at`.
  LinkId copy_link(LinkId e, NodeId at, bool with_sources, bool with_targets);

  // Reduces e's k-side connections to just `keep` (or none when keep is
  // kNil). Returns e itself when already reduced; otherwise returns a fresh
  // copy carrying all opposite-side connections plus the (e, keep) edge,
  // which moves to the copy. The result is re-anchored at new_anchor when
  // given.
  LinkId isolate(Tree k, LinkId e, LinkId keep, NodeId new_anchor = kNil);

  // Deletes a leaf and cascades toward the k side: a link with surviving
  // opposite-side neighbors is left untouched.
  void erase_tree(Tree k, LinkId e);

  // Directional ray lookup; creates an uncast ray on first use.
  RayId get_ray(Coord x_s, Coord x_t);

  // Open list.
  void queue(QueryKind kind, double f, LinkId e);
  void unqueue(LinkId e);
  std::optional<Polled> poll();
  bool open_empty() const { return open_.empty(); }

  // Overlap buffer (deduplicated).
  void push_overlap(PosId p);
  bool overlap_empty() const { return overlap_.empty(); }
  std::vector<PosId> drain_overlaps();

 private:
  std::deque<PositionRec> positions_;
  std::deque<NodeRec> nodes_;
  std::deque<LinkRec> links_;
  std::deque<SectorRay> rays_;
  std::unordered_map<Coord, PosId, CoordHash> pos_index_;
  std::unordered_map<uint64_t, RayId> ray_index_;
  OpenList open_;
  std::vector<PosId> overlap_;
  uint64_t links_created_ = 0;
};

}  // namespace anyangle
