#include "anyangle/model.hpp"

#include <algorithm>
#include <cassert>

namespace anyangle {

QueryId OpenList::push(QueryKind kind, double f, LinkId link) {
  QueryId q = QueryId(recs_.size());
  recs_.push_back({kind, f, link, true, sorted_.end()});
  if (use_heap_) {
    heap_.push_back({f, next_seq_++, q});
    std::push_heap(heap_.begin(), heap_.end(), std::greater<>());
  } else {
    auto it = sorted_.end();
    while (it != sorted_.begin()) {
      auto before = std::prev(it);
      if (recs_[*before].f <= f) break;
      it = before;
    }
    recs_[q].where = sorted_.insert(it, q);
  }
  ++alive_;
  return q;
}

void OpenList::erase(QueryId q) {
  Rec& r = recs_[q];
  if (!r.alive) return;
  r.alive = false;
  --alive_;
  if (!use_heap_) sorted_.erase(r.where);
  // Heap entries are reaped lazily on poll.
}

std::optional<Polled> OpenList::poll() {
  if (use_heap_) {
    while (!heap_.empty()) {
      std::pop_heap(heap_.begin(), heap_.end(), std::greater<>());
      HeapEntry top = heap_.back();
      heap_.pop_back();
      if (!recs_[top.q].alive) continue;
      Rec& r = recs_[top.q];
      r.alive = false;
      --alive_;
      return Polled{r.kind, r.f, r.link};
    }
    return std::nullopt;
  }
  if (sorted_.empty()) return std::nullopt;
  QueryId q = sorted_.front();
  sorted_.pop_front();
  Rec& r = recs_[q];
  r.alive = false;
  --alive_;
  return Polled{r.kind, r.f, r.link};
}

PosId SearchModel::get_pos(Coord x) {
  auto it = pos_index_.find(x);
  if (it != pos_index_.end()) return it->second;
  PosId p = PosId(positions_.size());
  positions_.push_back(PositionRec{x, {}, {}, {}, false});
  pos_index_.emplace(x, p);
  return p;
}

std::optional<PosId> SearchModel::find_pos(Coord x) const {
  auto it = pos_index_.find(x);
  if (it == pos_index_.end()) return std::nullopt;
  return it->second;
}

NodeId SearchModel::get_node(Coord x, NodeKind kind, Side sigma, Tree kappa) {
  PosId p = get_pos(x);
  for (NodeId n : positions_[p].nodes) {
    const NodeRec& r = nodes_[n];
    if (r.kind == kind && r.sigma == sigma && r.kappa == kappa) return n;
  }
  NodeId n = NodeId(nodes_.size());
  nodes_.push_back(NodeRec{kind, sigma, kappa, p, {}, {0, 0}});
  positions_[p].nodes.push_back(n);
  return n;
}

NodeId SearchModel::create_trace_node() {
  NodeId n = NodeId(nodes_.size());
  nodes_.push_back(NodeRec{NodeKind::kTemporary, Side::kLeft, Tree::kSource, kNil, {}, {0, 0}});
  return n;
}

LinkId SearchModel::create_link(NodeId at) {
  LinkId e = LinkId(links_.size());
  links_.push_back(LinkRec{});
  links_[e].anchor = at;
  nodes_[at].links.push_back(e);
  ++links_created_;
  return e;
}

void SearchModel::delete_link(LinkId e) {
  LinkRec& r = links_[e];
  assert(r.neighbors[0].empty() && r.neighbors[1].empty());
  unqueue(e);
  if (r.anchor != kNil) {
    auto& owned = nodes_[r.anchor].links;
    auto it = std::find(owned.begin(), owned.end(), e);
    if (it != owned.end()) {
      *it = owned.back();
      owned.pop_back();
    }
    r.anchor = kNil;
  }
  r.dead = true;
}

void SearchModel::anchor(LinkId e, NodeId n) {
  LinkRec& r = links_[e];
  if (r.anchor == n) return;
  if (r.anchor != kNil) {
    auto& owned = nodes_[r.anchor].links;
    auto it = std::find(owned.begin(), owned.end(), e);
    if (it != owned.end()) {
      *it = owned.back();
      owned.pop_back();
    }
  }
  r.anchor = n;
  nodes_[n].links.push_back(e);
}

void SearchModel::connect(Tree k, LinkId a, LinkId b) {
  neighbors(k, a).push_back(b);
  neighbors(opposite(k), b).push_back(a);
}

void SearchModel::disconnect(Tree k, LinkId a, LinkId b) {
  auto drop = [](std::vector<LinkId>& v, LinkId x) {
    auto it = std::find(v.begin(), v.end(), x);
    assert(it != v.end());
    *it = v.back();
    v.pop_back();
  };
  drop(neighbors(k, a), b);
  drop(neighbors(opposite(k), b), a);
}

void SearchModel::merge_ray(Side s, LinkId e, RayId incoming) {
  RayId& slot = ray_slot(s, e);
  if (slot == kNil || incoming == kNil) {
    slot = incoming;
    return;
  }
  Coord v_old = rays_[slot].x_t - rays_[slot].x_s;
  Coord v_new = rays_[incoming].x_t - rays_[incoming].x_s;
  if (sgn(s) * cross(v_old, v_new) >= 0) slot = incoming;
}

double SearchModel::min_cost(Tree k, LinkId e) const {
  double m = kInf;
  for (LinkId p : neighbors(k, e)) m = std::min(m, links_[p].c);
  return m;
}

double SearchModel::link_cost(LinkId e) const {
  const LinkRec& r = links_[e];
  const NodeRec& n = nodes_[r.anchor];
  assert(n.pos != kNil);
  Tree k = n.kappa;
  const auto& parents = neighbors(k, e);
  assert(!parents.empty());
#ifndef NDEBUG
  for (LinkId p : parents)
    assert(nodes_[links_[p].anchor].pos == nodes_[links_[parents.front()].anchor].pos);
#endif
  Coord x_par = positions_[nodes_[links_[parents.front()].anchor].pos].x;
  return distance(positions_[n.pos].x, x_par) + min_cost(k, e);
}

LinkId SearchModel::copy_link(LinkId e, NodeId at, bool with_sources, bool with_targets) {
  LinkId f = create_link(at);
  links_[f].c = links_[e].c;
  links_[f].rays[0] = links_[e].rays[0];
  links_[f].rays[1] = links_[e].rays[1];
  if (with_sources)
    for (LinkId b : std::vector<LinkId>(neighbors(Tree::kSource, e)))
      connect(Tree::kSource, f, b);
  if (with_targets)
    for (LinkId b : std::vector<LinkId>(neighbors(Tree::kTarget, e)))
      connect(Tree::kTarget, f, b);
  return f;
}

LinkId SearchModel::isolate(Tree k, LinkId e, LinkId keep, NodeId new_anchor) {
  auto& ks = neighbors(k, e);
  bool already = keep == kNil ? ks.empty() : (ks.size() == 1 && ks.front() == keep);
  if (already) {
    if (new_anchor != kNil) anchor(e, new_anchor);
    return e;
  }
  LinkId f = create_link(new_anchor != kNil ? new_anchor : links_[e].anchor);
  links_[f].c = links_[e].c;
  links_[f].rays[0] = links_[e].rays[0];
  links_[f].rays[1] = links_[e].rays[1];
  for (LinkId b : std::vector<LinkId>(neighbors(opposite(k), e)))
    connect(opposite(k), f, b);
  if (keep != kNil) {
    disconnect(k, e, keep);
    connect(k, f, keep);
  }
  return f;
}

void SearchModel::erase_tree(Tree k, LinkId e) {
  if (links_[e].dead) return;
  if (!neighbors(opposite(k), e).empty()) return;
  std::vector<LinkId> parents(neighbors(k, e));
  for (LinkId p : parents) disconnect(k, e, p);
  delete_link(e);
  for (LinkId p : parents) erase_tree(k, p);
}

RayId SearchModel::get_ray(Coord x_s, Coord x_t) {
  uint64_t key = uint64_t(uint16_t(x_s.x)) | uint64_t(uint16_t(x_s.y)) << 16 |
                 uint64_t(uint16_t(x_t.x)) << 32 | uint64_t(uint16_t(x_t.y)) << 48;
  auto it = ray_index_.find(key);
  if (it != ray_index_.end()) return it->second;
  RayId r = RayId(rays_.size());
  rays_.push_back(SectorRay{x_s, x_t, RayStatus::kUnknown, {}, {}, {0, 0}, {0, 0}});
  ray_index_.emplace(key, r);
  return r;
}

void SearchModel::queue(QueryKind kind, double f, LinkId e) {
  if (links_[e].query != kNil) open_.erase(links_[e].query);
  links_[e].query = open_.push(kind, f, e);
}

void SearchModel::unqueue(LinkId e) {
  if (links_[e].query == kNil) return;
  open_.erase(links_[e].query);
  links_[e].query = kNil;
}

std::optional<Polled> SearchModel::poll() {
  auto p = open_.poll();
  if (p) links_[p->link].query = kNil;
  return p;
}

void SearchModel::push_overlap(PosId p) {
  if (positions_[p].in_overlap) return;
  positions_[p].in_overlap = true;
  overlap_.push_back(p);
}

std::vector<PosId> SearchModel::drain_overlaps() {
  std::vector<PosId> out;
  out.swap(overlap_);
  for (PosId p : out) positions_[p].in_overlap = false;
  return out;
}

}  // namespace anyangle
