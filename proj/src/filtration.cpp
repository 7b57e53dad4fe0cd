#include "sheaflens/filtration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace sheaflens {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

PartialCover CoarseningFiltration::at(double t) const {
  if (t <= 0.0) return PartialCover{space, {}};  // below every threshold
  std::size_t i = 0;
  while (i < breakpoints.size() && t > breakpoints[i]) ++i;
  return covers[i];
}

double ShiftMap::eval(double t) const {
  if (nodes.empty()) return t + delta;
  if (t <= nodes.front().first) return nodes.front().second + (t - nodes.front().first);
  if (t >= nodes.back().first) return nodes.back().second + (t - nodes.back().first);
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    if (t <= nodes[i + 1].first) {
      double w = nodes[i + 1].first - nodes[i].first;
      double s = w == 0.0 ? 0.0 : (t - nodes[i].first) / w;
      return nodes[i].second + s * (nodes[i + 1].second - nodes[i].second);
    }
  }
  return t + delta;
}

double ShiftMap::inf_preimage(double t) const {
  if (nodes.empty()) return t - delta;
  if (t <= nodes.front().second) return nodes.front().first + (t - nodes.front().second);
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    if (t <= nodes[i + 1].second) {
      double rise = nodes[i + 1].second - nodes[i].second;
      if (rise == 0.0) return nodes[i].first;  // flat segment: left endpoint
      double s = (t - nodes[i].second) / rise;
      return nodes[i].first + s * (nodes[i + 1].first - nodes[i].first);
    }
  }
  return nodes.back().first + (t - nodes.back().second);
}

double ShiftMap::sup_preimage(double t) const {
  if (nodes.empty()) return t - delta;
  if (t < nodes.front().second) return nodes.front().first + (t - nodes.front().second);
  double res = nodes.back().first + (t - nodes.back().second);
  for (std::size_t i = nodes.size(); i-- > 1;) {
    if (t >= nodes[i - 1].second && t <= nodes[i].second) {
      double rise = nodes[i].second - nodes[i - 1].second;
      if (rise == 0.0) return nodes[i].first;  // flat segment: right endpoint
      double s = (t - nodes[i - 1].second) / rise;
      return nodes[i - 1].first + s * (nodes[i].first - nodes[i - 1].first);
    }
  }
  return res;
}

double ShiftMap::max_displacement() const {
  if (nodes.empty()) return std::fabs(delta);
  double d = 0.0;
  for (const auto& [t, ft] : nodes) d = std::max(d, std::fabs(ft - t));
  return d;
}

std::vector<int> epsilon_consistent_opens(const MetricSheaf& sheaf, const Assignment& a,
                                          double epsilon) {
  check_bound(sheaf, a);
  if (!a.is_total())
    fail(ErrorCode::partial_assignment, "consistent opens need a total assignment");
  std::vector<int> out;
  for (int id = 0; id < sheaf.space().open_count(); ++id)
    if (local_consistency_radius(sheaf, a, id) < epsilon) out.push_back(id);
  return out;
}

namespace {

PartialCover maximal_members(const MetricSheaf& sheaf, std::vector<int> consistent) {
  const FiniteSpace& sp = sheaf.space();
  std::vector<int> keep;
  for (int u : consistent) {
    bool maximal = true;
    for (int v : consistent)
      if (u != v && sp.open_subset(u, v)) {
        maximal = false;
        break;
      }
    if (maximal) keep.push_back(u);
  }
  if (keep.size() > 1) {
    keep.erase(std::remove(keep.begin(), keep.end(), sp.empty_id()), keep.end());
  } else if (keep.size() == 1 && keep[0] == sp.empty_id()) {
    keep.clear();  // only the empty open is consistent: report an empty cover
  }
  return make_cover(sheaf.space_ptr(), std::move(keep));
}

}  // namespace

PartialCover maximal_consistent_collection(const MetricSheaf& sheaf, const Assignment& a,
                                           double epsilon) {
  return maximal_members(sheaf, epsilon_consistent_opens(sheaf, a, epsilon));
}

CoarseningFiltration consistency_filtration(const MetricSheaf& sheaf, const Assignment& a) {
  check_bound(sheaf, a);
  if (!a.is_total())
    fail(ErrorCode::partial_assignment, "the filtration needs a total assignment");
  const FiniteSpace& sp = sheaf.space();

  std::vector<double> radius(sp.open_count());
  std::set<double> values;
  for (int id = 0; id < sp.open_count(); ++id) {
    radius[id] = local_consistency_radius(sheaf, a, id);
    if (radius[id] > 0.0) values.insert(radius[id]);
  }

  CoarseningFiltration filt;
  filt.space = sheaf.space_ptr();
  filt.breakpoints.assign(values.begin(), values.end());

  for (std::size_t i = 0; i <= filt.breakpoints.size(); ++i) {
    // Opens consistent throughout (t_i, t_{i+1}]: radius <= t_i.
    double level = i == 0 ? 0.0 : filt.breakpoints[i - 1];
    std::vector<int> consistent;
    for (int id = 0; id < sp.open_count(); ++id)
      if (radius[id] <= level) consistent.push_back(id);
    filt.covers.push_back(maximal_members(sheaf, std::move(consistent)));
  }

  for (std::size_t i = 0; i + 1 < filt.covers.size(); ++i)
    if (!refines(filt.covers[i], filt.covers[i + 1]))
      fail(ErrorCode::not_a_refinement, "constructed filtration failed the coarsening invariant");
  return filt;
}

namespace {

// Sample thresholds at which piecewise-constant conditions can change.
std::vector<double> sample_points(const CoarseningFiltration& F, const CoarseningFiltration& G,
                                  const InterleavingCandidate& c) {
  std::set<double> pts;
  auto add = [&](double t) {
    if (std::isfinite(t)) pts.insert(t);
  };
  add(1e-9);
  for (const auto& filt : {&F, &G})
    for (double t : filt->breakpoints) {
      add(t);
      for (const ShiftMap* m : {&c.phi, &c.psi}) {
        add(m->eval(t));
        add(m->inf_preimage(t));
        add(m->sup_preimage(t));
        add(m->eval(m->eval(t)));
        add(m->inf_preimage(m->inf_preimage(t)));
      }
      add(c.phi.eval(c.psi.eval(t)));
      add(c.psi.eval(c.phi.eval(t)));
    }
  double top = 1.0;
  if (!pts.empty()) top = *pts.rbegin();
  add(top + 1.0 + 2.0 * std::fabs(c.epsilon));
  std::vector<double> base(pts.begin(), pts.end());
  std::vector<double> out = base;
  for (std::size_t i = 0; i + 1 < base.size(); ++i) out.push_back(0.5 * (base[i] + base[i + 1]));
  std::sort(out.begin(), out.end());
  return out;
}

bool cover_refines_preimage(const CoarseningFiltration& Fine, double s,
                            const CoarseningFiltration& Coarse, double t,
                            const std::optional<PointMap>& map) {
  PartialCover fine = Fine.at(s);
  PartialCover coarse = Coarse.at(t);
  if (!map) return refines(fine, coarse);
  return refines(fine, preimage_cover(*map, coarse));
}

}  // namespace

InterleavingCheck check_interleaving(const CoarseningFiltration& F, const CoarseningFiltration& G,
                                     const InterleavingCandidate& c) {
  if (!F.space || !G.space) fail(ErrorCode::space_mismatch, "filtrations need spaces");
  const double eps = c.epsilon + 1e-12;

  if (c.phi.max_displacement() > eps) return {false, 1, 0.0};
  if (c.psi.max_displacement() > eps) return {false, 2, 0.0};

  for (double t : sample_points(F, G, c)) {
    // psi . phi pulled back into F's own axis.
    double s3 = c.phi.inf_preimage(c.psi.inf_preimage(t));
    if (!refines(F.at(s3), F.at(t))) return {false, 3, t};
    double s4 = c.psi.inf_preimage(c.phi.inf_preimage(t));
    if (!refines(G.at(s4), G.at(t))) return {false, 4, t};
    // Morphism conditions: every s in phi^{-1}(t) needs F(s) refining
    // f^{-1}(G(t)); the coarsest such cover sits at the sup.
    if (!cover_refines_preimage(F, c.phi.sup_preimage(t), G, t, c.f)) return {false, 5, t};
    if (!cover_refines_preimage(G, c.psi.sup_preimage(t), F, t, c.g)) return {false, 6, t};
  }
  return {true, 0, 0.0};
}

double interleaving_upper_bound(const CoarseningFiltration& F, const CoarseningFiltration& G) {
  if (!F.space->same_space(*G.space))
    fail(ErrorCode::space_mismatch, "interleaving bound needs filtrations over one space");

  std::set<double> candidates;
  std::vector<double> bf = F.breakpoints, bg = G.breakpoints;
  bf.push_back(0.0);
  bg.push_back(0.0);
  for (double t : bf)
    for (double s : bg) candidates.insert(std::fabs(t - s));

  for (double eps : candidates) {
    InterleavingCandidate c;
    c.phi = ShiftMap::shift(eps);
    c.psi = ShiftMap::shift(eps);
    c.epsilon = eps;
    if (check_interleaving(F, G, c)) return eps;
  }
  return kInf;
}

}  // namespace sheaflens
