#include "sheaflens/morphism.hpp"

#include <sstream>

namespace sheaflens {

SheafMorphism SheafMorphism::identity(std::shared_ptr<const MetricSheaf> sheaf) {
  std::map<int, MapBody> comps;
  for (int id = 0; id < sheaf->space().open_count(); ++id)
    comps[id] = identity_restriction(sheaf->stalk(id)).body;
  return build_morphism(sheaf, sheaf, PointMap::identity(sheaf->space_ptr()), comps);
}

SheafMorphism build_morphism(std::shared_ptr<const MetricSheaf> source,
                             std::shared_ptr<const MetricSheaf> target, PointMap base,
                             const std::map<int, MapBody>& components, double tol) {
  if (!base.domain->same_space(source->space()) || !base.codomain->same_space(target->space()))
    fail(ErrorCode::space_mismatch, "base map endpoints do not match the sheaf spaces");
  if (!is_continuous(base))
    fail(ErrorCode::base_map_not_continuous, "preimage of some codomain open is not open");

  SheafMorphism m;
  m.source = std::move(source);
  m.target = std::move(target);
  m.base = std::move(base);

  const FiniteSpace& ty = m.target->space();
  const FiniteSpace& tx = m.source->space();
  m.preimage_open.resize(ty.open_count());
  m.components.resize(ty.open_count());
  for (int u = 0; u < ty.open_count(); ++u) {
    auto pre = tx.open_id(m.base.preimage(ty.open_members(u)));
    m.preimage_open[u] = *pre;
    auto it = components.find(u);
    if (it == components.end())
      fail(ErrorCode::stalk_shape_mismatch, "missing component at " + ty.open_label(u));
    if (!shape_matches(it->second, m.source->stalk(*pre), m.target->stalk(u)))
      fail(ErrorCode::stalk_shape_mismatch, "component shape mismatch at " + ty.open_label(u));
    m.components[u] = make_map(it->second, m.source->stalk(*pre), m.target->stalk(u));
    m.component_lipschitz = std::max(m.component_lipschitz, m.components[u].lipschitz);
  }

  // Commuting square on every codomain inclusion pair.
  for (auto [u, v] : ty.inclusion_pairs()) {
    int pu = m.preimage_open[u], pv = m.preimage_open[v];
    RestrictionMap down_then_comp = compose(m.components[u], m.source->restriction(pv, pu));
    RestrictionMap comp_then_down = compose(m.target->restriction(v, u), m.components[v]);
    double dev = map_deviation(down_then_comp, comp_then_down, m.source->stalk(pv),
                               m.target->stalk(u));
    bool exact = std::holds_alternative<FiniteTableSpace>(m.source->stalk(pv));
    if (dev > (exact ? 0.0 : tol)) {
      std::ostringstream os;
      os << "square fails to commute at " << ty.open_label(u) << " inside " << ty.open_label(v)
         << ", deviation " << dev;
      fail(ErrorCode::square_violation, os.str());
    }
  }
  return m;
}

Assignment pushforward_assignment(const SheafMorphism& m, const Assignment& a) {
  check_bound(*m.source, a);
  if (!a.is_total())
    fail(ErrorCode::partial_assignment, "pushforward requires a total assignment");
  Assignment b = Assignment::empty(*m.target);
  for (int v = 0; v < m.target->space().open_count(); ++v)
    b.set(v, apply_map(m.components[v], *a.values[m.preimage_open[v]]), false);
  return b;
}

bool validate_shva(const SheafMorphism& m, const Assignment& a, const Assignment& b, double tol) {
  Assignment pushed = pushforward_assignment(m, a);
  check_bound(*m.target, b);
  for (int v = 0; v < m.target->space().open_count(); ++v) {
    if (!b.values[v]) return false;
    if (distance(m.target->stalk(v), *pushed.values[v], *b.values[v]) > tol) return false;
  }
  return true;
}

SheafMorphism compose_morphisms(const SheafMorphism& n, const SheafMorphism& m) {
  if (!m.target->space().same_space(n.source->space()))
    fail(ErrorCode::chain_mismatch, "target of the first morphism is not the source of the second");

  std::map<int, MapBody> comps;
  const FiniteSpace& tz = n.target->space();
  for (int u = 0; u < tz.open_count(); ++u) {
    // g^{-1}(u) as an id of m's target space, which may number opens differently
    int gu = n.preimage_open[u];
    auto gu_m = m.target->space().open_id(n.source->space().open_members(gu));
    comps[u] = compose(n.components[u], m.components[*gu_m]).body;
  }
  return build_morphism(m.source, n.target, compose(n.base, m.base), comps);
}

}  // namespace sheaflens
