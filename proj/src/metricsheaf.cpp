#include "sheaflens/metricsheaf.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sheaflens {

namespace {

std::string pair_label(const FiniteSpace& sp, int sub, int sup) {
  return sp.open_label(sub) + " inside " + sp.open_label(sup);
}

}  // namespace

MetricSheaf MetricSheaf::build(std::shared_ptr<const FiniteSpace> space,
                               std::vector<PseudometricSpace> stalks_by_open,
                               const std::map<std::pair<int, int>, MapBody>& generators,
                               double commutativity_tol) {
  MetricSheaf sh;
  sh.space_ = std::move(space);
  sh.stalks_ = std::move(stalks_by_open);
  sh.tol_ = commutativity_tol;
  const FiniteSpace& sp = *sh.space_;

  if (static_cast<int>(sh.stalks_.size()) != sp.open_count())
    fail(ErrorCode::stalk_shape_mismatch, "need exactly one stalk per open set");
  for (const auto& st : sh.stalks_) validate_space(st);
  if (!std::holds_alternative<OnePointSpace>(sh.stalks_[sp.empty_id()]))
    fail(ErrorCode::stalk_shape_mismatch, "stalk over the empty set must be the one-point space");

  // One generator per Hasse edge, matching the stalk shapes.
  std::map<std::pair<int, int>, RestrictionMap> edge_maps;
  for (const auto& e : sp.hasse_edges()) {
    auto it = generators.find({e.sup, e.sub});
    if (it == generators.end())
      fail(ErrorCode::stalk_shape_mismatch,
           "missing generator for covering inclusion " + pair_label(sp, e.sub, e.sup));
    if (!shape_matches(it->second, sh.stalks_[e.sup], sh.stalks_[e.sub]))
      fail(ErrorCode::stalk_shape_mismatch,
           "generator shape mismatch on " + pair_label(sp, e.sub, e.sup));
    edge_maps[{e.sup, e.sub}] = make_map(it->second, sh.stalks_[e.sup], sh.stalks_[e.sub]);
  }
  for (const auto& [key, body] : generators) {
    (void)body;
    if (!edge_maps.count(key))
      fail(ErrorCode::stalk_shape_mismatch,
           "generator given for a non-covering pair " + pair_label(sp, key.second, key.first));
  }

  // Compose down the inclusion order.  Whenever two edge routes reach the
  // same pair, they must agree within tolerance (exactly for tables).
  for (int v = 0; v < sp.open_count(); ++v)
    sh.composed_[{v, v}] = identity_restriction(sh.stalks_[v]);

  // Process targets in an order where all intermediate opens of any route
  // from v are handled first: by decreasing member count.
  std::vector<int> order(sp.open_count());
  for (int i = 0; i < sp.open_count(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return sp.open_members(a).count() > sp.open_members(b).count();
  });

  for (int v : order) {
    for (int u : order) {
      if (u == v || !sp.open_subset(u, v)) continue;
      std::optional<RestrictionMap> best;
      for (const auto& e : sp.hasse_edges()) {
        // route v -> ... -> e.sup -> e.sub = u
        if (e.sub != u || !sp.open_subset(e.sup, v)) continue;
        const RestrictionMap& upper = sh.composed_.at({v, e.sup});
        RestrictionMap candidate = compose(edge_maps.at({e.sup, e.sub}), upper);
        if (!best) {
          best = std::move(candidate);
          continue;
        }
        double dev = map_deviation(*best, candidate, sh.stalks_[v], sh.stalks_[u]);
        bool exact = std::holds_alternative<FiniteTableSpace>(sh.stalks_[v]);
        if (dev > (exact ? 0.0 : sh.tol_)) {
          std::ostringstream os;
          os << "restrictions from " << sp.open_label(v) << " to " << sp.open_label(u)
             << " disagree along two routes, max deviation " << dev;
          fail(ErrorCode::commutativity_violation, os.str());
        }
      }
      if (!best)
        fail(ErrorCode::stalk_shape_mismatch,
             "no covering route for " + pair_label(sp, u, v));
      sh.composed_[{v, u}] = std::move(*best);
    }
  }
  return sh;
}

const RestrictionMap& MetricSheaf::restriction(int from_open, int to_open) const {
  auto it = composed_.find({from_open, to_open});
  if (it == composed_.end())
    fail(ErrorCode::sheaf_mismatch, "no restriction for the requested pair");
  return it->second;
}

Assignment Assignment::empty(const MetricSheaf& sheaf) {
  Assignment a;
  a.values.resize(sheaf.space().open_count());
  a.support.assign(sheaf.space().open_count(), 0);
  // The empty open always carries the unique one-point value.
  a.values[sheaf.space().empty_id()] = std::monostate{};
  return a;
}

void Assignment::set(int open_id, StalkValue v, bool supported) {
  values[open_id] = std::move(v);
  support[open_id] = supported ? 1 : 0;
}

bool Assignment::is_total() const {
  for (const auto& v : values)
    if (!v) return false;
  return true;
}

bool Assignment::defined_on(const std::vector<int>& opens) const {
  for (int id : opens)
    if (!values[id]) return false;
  return true;
}

Assignment make_total_assignment(const MetricSheaf& sheaf, const std::map<int, StalkValue>& values) {
  Assignment a = Assignment::empty(sheaf);
  for (const auto& [id, v] : values) a.set(id, v);
  if (!a.is_total()) fail(ErrorCode::partial_assignment, "assignment does not cover every open set");
  check_bound(sheaf, a);
  return a;
}

void check_bound(const MetricSheaf& sheaf, const Assignment& a) {
  if (static_cast<int>(a.values.size()) != sheaf.space().open_count())
    fail(ErrorCode::sheaf_mismatch, "assignment size does not match the sheaf");
  for (int id = 0; id < sheaf.space().open_count(); ++id)
    if (a.values[id] && !in_carrier(sheaf.stalk(id), *a.values[id]))
      fail(ErrorCode::stalk_shape_mismatch,
           "value at " + sheaf.space().open_label(id) + " is outside its stalk carrier");
}

namespace {

void require_total(const MetricSheaf& sheaf, const Assignment& a) {
  check_bound(sheaf, a);
  if (!a.is_total())
    fail(ErrorCode::partial_assignment, "operation requires a total assignment; extend first");
}

double pair_threshold(const MetricSheaf& sheaf, const Assignment& a, int sub, int sup) {
  const RestrictionMap& r = sheaf.restriction(sup, sub);
  return distance(sheaf.stalk(sub), apply_map(r, *a.values[sup]), *a.values[sub]);
}

}  // namespace

std::vector<CriticalThreshold> critical_thresholds(const MetricSheaf& sheaf, const Assignment& a) {
  require_total(sheaf, a);
  const FiniteSpace& sp = sheaf.space();
  std::vector<CriticalThreshold> out;
  for (auto [u, v] : sp.inclusion_pairs()) {
    if (u == sp.empty_id()) continue;
    out.push_back({u, v, pair_threshold(sheaf, a, u, v)});
  }
  return out;
}

double consistency_radius(const MetricSheaf& sheaf, const Assignment& a) {
  double r = 0.0;
  for (const auto& t : critical_thresholds(sheaf, a)) r = std::max(r, t.value);
  return r;
}

double consistency_radius_l2(const MetricSheaf& sheaf, const Assignment& a) {
  double acc = 0.0;
  for (const auto& t : critical_thresholds(sheaf, a)) acc += t.value * t.value;
  return std::sqrt(acc);
}

double consistency_diameter(const MetricSheaf& sheaf, const Assignment& a) {
  require_total(sheaf, a);
  const FiniteSpace& sp = sheaf.space();
  double d = 0.0;
  for (int u = 0; u < sp.open_count(); ++u) {
    if (u == sp.empty_id()) continue;
    std::vector<int> sups;
    for (int v = 0; v < sp.open_count(); ++v)
      if (sp.open_subset(u, v)) sups.push_back(v);
    for (std::size_t i = 0; i < sups.size(); ++i) {
      StalkValue vi = apply_map(sheaf.restriction(sups[i], u), *a.values[sups[i]]);
      for (std::size_t j = i; j < sups.size(); ++j) {
        StalkValue vj = apply_map(sheaf.restriction(sups[j], u), *a.values[sups[j]]);
        d = std::max(d, distance(sheaf.stalk(u), vi, vj));
      }
    }
  }
  return d;
}

double local_consistency_radius(const MetricSheaf& sheaf, const Assignment& a, int open_id) {
  check_bound(sheaf, a);
  const FiniteSpace& sp = sheaf.space();
  const auto& inside = sp.opens_inside(open_id);
  if (!a.defined_on(inside))
    fail(ErrorCode::partial_assignment,
         "assignment must be defined on every open inside " + sp.open_label(open_id));
  double r = 0.0;
  for (int v1 : inside) {
    if (v1 == sp.empty_id()) continue;
    for (int v2 : inside) {
      if (v1 == v2 || !sp.open_subset(v1, v2)) continue;
      r = std::max(r, pair_threshold(sheaf, a, v1, v2));
    }
  }
  return r;
}

double star_consistency_radius(const MetricSheaf& sheaf, const Assignment& a, int open_id) {
  check_bound(sheaf, a);
  const FiniteSpace& sp = sheaf.space();
  const PointSet& u = sp.open_members(open_id);
  std::vector<int> pts = u.elements();
  std::vector<int> star(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    star[i] = sp.star_of_point(pts[i]);
    if (!a.values[star[i]])
      fail(ErrorCode::partial_assignment,
           "assignment must be defined on the star of every point of " + sp.open_label(open_id));
  }
  auto star_index_of_point = [&](int p) {
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (pts[i] == p) return static_cast<int>(i);
    return -1;
  };

  double first = 0.0, second = 0.0;
  for (std::size_t yi = 0; yi < pts.size(); ++yi) {
    // x ranges over star(y): then star(x) is contained in star(y).
    for (int x : sp.open_members(star[yi]).elements()) {
      int xi = star_index_of_point(x);
      const RestrictionMap& r = sheaf.restriction(star[yi], star[xi]);
      first = std::max(first, distance(sheaf.stalk(star[xi]), apply_map(r, *a.values[star[yi]]),
                                       *a.values[star[xi]]));
    }
    for (std::size_t xi = 0; xi < pts.size(); ++xi) {
      PointSet common = sp.open_members(star[xi]).intersect_with(sp.open_members(star[yi]));
      for (int z : common.elements()) {
        int zi = star_index_of_point(z);
        StalkValue from_y = apply_map(sheaf.restriction(star[yi], star[zi]), *a.values[star[yi]]);
        StalkValue from_x = apply_map(sheaf.restriction(star[xi], star[zi]), *a.values[star[xi]]);
        second = std::max(second, 0.5 * distance(sheaf.stalk(star[zi]), from_y, from_x));
      }
    }
  }
  return std::max(first, second);
}

double assignment_distance(const MetricSheaf& sheaf, const Assignment& a, const Assignment& b) {
  require_total(sheaf, a);
  require_total(sheaf, b);
  double d = 0.0;
  for (int id = 0; id < sheaf.space().open_count(); ++id)
    d = std::max(d, distance(sheaf.stalk(id), *a.values[id], *b.values[id]));
  return d;
}

bool is_global_section(const MetricSheaf& sheaf, const Assignment& a, double tol) {
  for (const auto& t : critical_thresholds(sheaf, a))
    if (t.value > tol) return false;
  return true;
}

double sheaf_lipschitz(const MetricSheaf& sheaf) {
  double k = 0.0;
  for (auto [u, v] : sheaf.space().inclusion_pairs())
    k = std::max(k, sheaf.restriction(v, u).lipschitz);
  return k;
}

}  // namespace sheaflens
