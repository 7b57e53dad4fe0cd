#include "sheaflens/finspace.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <sstream>

namespace sheaflens {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::missing_empty_or_whole: return "MissingEmptyOrWhole";
    case ErrorCode::not_closed_under_union: return "NotClosedUnderUnion";
    case ErrorCode::not_closed_under_intersection: return "NotClosedUnderIntersection";
    case ErrorCode::cap_exceeded: return "CapExceeded";
    case ErrorCode::space_mismatch: return "SpaceMismatch";
    case ErrorCode::partial_assignment: return "PartialAssignment";
    case ErrorCode::commutativity_violation: return "CommutativityViolation";
    case ErrorCode::stalk_shape_mismatch: return "StalkShapeMismatch";
    case ErrorCode::invalid_pseudometric: return "InvalidPseudometric";
    case ErrorCode::sheaf_mismatch: return "SheafMismatch";
    case ErrorCode::no_support: return "NoSupport";
    case ErrorCode::non_convergence: return "NonConvergence";
    case ErrorCode::base_map_not_continuous: return "BaseMapNotContinuous";
    case ErrorCode::square_violation: return "SquareViolation";
    case ErrorCode::chain_mismatch: return "ChainMismatch";
    case ErrorCode::not_a_refinement: return "NotARefinement";
    case ErrorCode::invalid_tau: return "InvalidTau";
    case ErrorCode::non_composable: return "NonComposable";
    case ErrorCode::infinite_mismatch: return "InfiniteMismatch";
    case ErrorCode::empty_input: return "EmptyInput";
    case ErrorCode::schema_error: return "SchemaError";
  }
  return "UnknownError";
}

int PointSet::count() const {
  int c = 0;
  for (auto w : words_) c += std::popcount(w);
  return c;
}

std::vector<int> PointSet::elements() const {
  std::vector<int> out;
  for (int i = 0; i < size_; ++i)
    if (contains(i)) out.push_back(i);
  return out;
}

namespace {

std::string set_to_string(const FiniteSpace& space, const PointSet& s) {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (int i : s.elements()) {
    if (!first) os << ',';
    os << space.point_labels()[i];
    first = false;
  }
  os << '}';
  return os.str();
}

}  // namespace

int FiniteSpace::point_index(const std::string& label) const {
  auto it = point_index_.find(label);
  if (it == point_index_.end()) fail(ErrorCode::schema_error, "unknown point label '" + label + "'");
  return it->second;
}

std::optional<int> FiniteSpace::open_id(const PointSet& members) const {
  auto it = open_index_.find(members);
  if (it == open_index_.end()) return std::nullopt;
  return it->second;
}

std::string FiniteSpace::open_label(int id) const { return set_to_string(*this, opens_[id]); }

PointSet FiniteSpace::make_point_set(const std::vector<std::string>& labels) const {
  PointSet s(point_count());
  for (const auto& l : labels) s.insert(point_index(l));
  return s;
}

int FiniteSpace::star_of(const PointSet& subset) const {
  PointSet acc = opens_[whole_id_];
  for (const auto& open : opens_) {
    if (subset.subset_of(open)) acc = acc.intersect_with(open);
  }
  auto id = open_id(acc);
  if (!id) fail(ErrorCode::not_closed_under_intersection, "star is not an open set");
  return *id;
}

int FiniteSpace::star_of_point(int point) const {
  PointSet s(point_count());
  s.insert(point);
  return star_of(s);
}

bool FiniteSpace::same_space(const FiniteSpace& other) const {
  if (this == &other) return true;
  if (points_ != other.points_) return false;
  if (opens_.size() != other.opens_.size()) return false;
  for (const auto& o : opens_)
    if (!other.open_id(o)) return false;
  return true;
}

void FiniteSpace::finalize() {
  const int n = open_count();
  open_index_.clear();
  for (int i = 0; i < n; ++i) open_index_[opens_[i]] = i;
  point_index_.clear();
  for (int i = 0; i < point_count(); ++i) point_index_[points_[i]] = i;

  subset_.assign(n, std::vector<char>(n, 0));
  inclusion_pairs_.clear();
  inside_.assign(n, {});
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v) {
      if (opens_[u].subset_of(opens_[v])) {
        subset_[u][v] = 1;
        inside_[v].push_back(u);
        if (u != v) inclusion_pairs_.push_back({u, v});
      }
    }

  // Hasse diagram: covering pairs of the inclusion order.
  hasse_.clear();
  for (auto [u, v] : inclusion_pairs_) {
    bool covering = true;
    for (int w = 0; w < n && covering; ++w) {
      if (w == u || w == v) continue;
      if (subset_[u][w] && subset_[w][v]) covering = false;
    }
    if (covering) hasse_.push_back({u, v});
  }
}

FiniteSpace FiniteSpace::explicit_topology(std::vector<std::string> points,
                                           const std::vector<std::vector<std::string>>& open_list) {
  if (open_list.empty()) fail(ErrorCode::missing_empty_or_whole, "no open sets listed");
  FiniteSpace sp;
  sp.points_ = std::move(points);
  for (int i = 0; i < sp.point_count(); ++i) {
    if (sp.point_index_.count(sp.points_[i]))
      fail(ErrorCode::schema_error, "duplicate point label '" + sp.points_[i] + "'");
    sp.point_index_[sp.points_[i]] = i;
  }

  std::unordered_map<PointSet, int, PointSetHash> seen;
  for (const auto& labels : open_list) {
    PointSet s = sp.make_point_set(labels);
    if (!seen.count(s)) {
      seen[s] = static_cast<int>(sp.opens_.size());
      sp.opens_.push_back(s);
    }
  }

  auto find = [&](const PointSet& s) {
    auto it = seen.find(s);
    return it == seen.end() ? -1 : it->second;
  };
  for (std::size_t i = 0; i < sp.opens_.size(); ++i)
    for (std::size_t j = i + 1; j < sp.opens_.size(); ++j) {
      if (find(sp.opens_[i].union_with(sp.opens_[j])) < 0)
        fail(ErrorCode::not_closed_under_union,
             "union of " + set_to_string(sp, sp.opens_[i]) + " and " +
                 set_to_string(sp, sp.opens_[j]) + " is missing");
      if (find(sp.opens_[i].intersect_with(sp.opens_[j])) < 0)
        fail(ErrorCode::not_closed_under_intersection,
             "intersection of " + set_to_string(sp, sp.opens_[i]) + " and " +
                 set_to_string(sp, sp.opens_[j]) + " is missing");
    }

  PointSet empty(sp.point_count());
  PointSet whole(sp.point_count());
  for (int i = 0; i < sp.point_count(); ++i) whole.insert(i);
  sp.empty_id_ = find(empty);
  sp.whole_id_ = find(whole);
  if (sp.empty_id_ < 0 || sp.whole_id_ < 0)
    fail(ErrorCode::missing_empty_or_whole,
         sp.empty_id_ < 0 ? "empty set is not listed" : "whole point set is not listed");

  sp.finalize();
  return sp;
}

FiniteSpace FiniteSpace::alexandrov(std::vector<std::string> points,
                                    const std::vector<std::pair<std::string, std::string>>& leq_pairs,
                                    std::size_t cap, OrderConvention conv) {
  FiniteSpace sp;
  sp.points_ = std::move(points);
  const int n = sp.point_count();
  for (int i = 0; i < n; ++i) {
    if (sp.point_index_.count(sp.points_[i]))
      fail(ErrorCode::schema_error, "duplicate point label '" + sp.points_[i] + "'");
    sp.point_index_[sp.points_[i]] = i;
  }

  // Reflexive-transitive closure of the given relation.
  std::vector<std::vector<char>> leq(n, std::vector<char>(n, 0));
  for (int i = 0; i < n; ++i) leq[i][i] = 1;
  for (const auto& [a, b] : leq_pairs) leq[sp.point_index(a)][sp.point_index(b)] = 1;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      if (leq[i][k])
        for (int j = 0; j < n; ++j)
          if (leq[k][j]) leq[i][j] = 1;

  // star(y) = {x : x <= y} under the lower_sets convention.
  std::vector<PointSet> stars(n, PointSet(n));
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      bool in = conv == OrderConvention::lower_sets ? leq[x][y] : leq[y][x];
      if (in) stars[y].insert(x);
    }

  // All unions of stars, by worklist closure.
  std::unordered_map<PointSet, int, PointSetHash> seen;
  std::deque<PointSet> queue;
  PointSet empty(n);
  seen[empty] = 0;
  sp.opens_.push_back(empty);
  queue.push_back(empty);
  while (!queue.empty()) {
    PointSet cur = queue.front();
    queue.pop_front();
    for (const auto& st : stars) {
      PointSet next = cur.union_with(st);
      if (seen.count(next)) continue;
      if (sp.opens_.size() >= cap)
        fail(ErrorCode::cap_exceeded, "open-set count exceeds cap " + std::to_string(cap));
      seen[next] = static_cast<int>(sp.opens_.size());
      sp.opens_.push_back(next);
      queue.push_back(next);
    }
  }

  std::sort(sp.opens_.begin(), sp.opens_.end(), [](const PointSet& a, const PointSet& b) {
    if (a.count() != b.count()) return a.count() < b.count();
    return a < b;
  });

  PointSet whole(n);
  for (int i = 0; i < n; ++i) whole.insert(i);
  sp.finalize();
  sp.empty_id_ = *sp.open_id(empty);
  sp.whole_id_ = n == 0 ? sp.empty_id_ : *sp.open_id(whole);
  return sp;
}

FiniteSpace FiniteSpace::star_family(std::vector<std::string> points, std::vector<PointSet> opens) {
  FiniteSpace sp;
  sp.points_ = std::move(points);
  const int n = sp.point_count();

  PointSet empty(n);
  PointSet whole(n);
  for (int i = 0; i < n; ++i) whole.insert(i);

  std::unordered_map<PointSet, int, PointSetHash> seen;
  auto add = [&](const PointSet& s) {
    if (!seen.count(s)) {
      seen[s] = static_cast<int>(sp.opens_.size());
      sp.opens_.push_back(s);
    }
  };
  add(empty);
  add(whole);
  for (auto& o : opens) add(o);

  for (std::size_t i = 0; i < sp.opens_.size(); ++i)
    for (std::size_t j = i + 1; j < sp.opens_.size(); ++j)
      if (!seen.count(sp.opens_[i].intersect_with(sp.opens_[j])))
        fail(ErrorCode::not_closed_under_intersection, "star family not intersection-closed");

  std::sort(sp.opens_.begin(), sp.opens_.end(), [](const PointSet& a, const PointSet& b) {
    if (a.count() != b.count()) return a.count() < b.count();
    return a < b;
  });
  sp.finalize();
  sp.empty_id_ = *sp.open_id(empty);
  sp.whole_id_ = *sp.open_id(whole);
  return sp;
}

void PartialCover::normalize() {
  std::sort(members.begin(), members.end());
  members.erase(std::unique(members.begin(), members.end()), members.end());
}

PartialCover make_cover(std::shared_ptr<const FiniteSpace> space, std::vector<int> members) {
  PartialCover c{std::move(space), std::move(members)};
  for (int m : c.members)
    if (m < 0 || m >= c.space->open_count())
      fail(ErrorCode::schema_error, "cover member is not an open id");
  c.normalize();
  return c;
}

bool refines(const PartialCover& fine, const PartialCover& coarse) {
  if (!fine.space || !coarse.space || !fine.space->same_space(*coarse.space))
    fail(ErrorCode::space_mismatch, "covers live on different spaces");
  for (int v : fine.members) {
    bool ok = false;
    for (int u : coarse.members) {
      if (fine.space->open_subset(v, u)) {
        ok = true;
        break;
      }
    }
    if (!ok) return false;
  }
  return true;
}

PointMap PointMap::identity(std::shared_ptr<const FiniteSpace> space) {
  PointMap f{space, space, {}};
  f.to.resize(space->point_count());
  for (int i = 0; i < space->point_count(); ++i) f.to[i] = i;
  return f;
}

PointSet PointMap::preimage(const PointSet& codomain_subset) const {
  PointSet s(domain->point_count());
  for (int i = 0; i < domain->point_count(); ++i)
    if (codomain_subset.contains(to[i])) s.insert(i);
  return s;
}

bool is_continuous(const PointMap& f) {
  for (int v = 0; v < f.codomain->open_count(); ++v)
    if (!f.domain->open_id(f.preimage(f.codomain->open_members(v)))) return false;
  return true;
}

PointMap compose(const PointMap& g, const PointMap& f) {
  if (!f.codomain->same_space(*g.domain)) fail(ErrorCode::chain_mismatch, "point maps do not chain");
  PointMap h{f.domain, g.codomain, {}};
  h.to.resize(f.to.size());
  for (std::size_t i = 0; i < f.to.size(); ++i) h.to[i] = g.to[f.to[i]];
  return h;
}

PartialCover preimage_cover(const PointMap& f, const PartialCover& cover) {
  std::vector<int> members;
  for (int u : cover.members) {
    auto id = f.domain->open_id(f.preimage(cover.space->open_members(u)));
    if (!id) fail(ErrorCode::base_map_not_continuous, "preimage of an open is not open");
    members.push_back(*id);
  }
  return make_cover(f.domain, std::move(members));
}

}  // namespace sheaflens
