#pragma once

#include <memory>

#include "sheaflens/metricsheaf.hpp"

namespace sheaflens::testing {

// Three-point space {A,B,C} with opens {}, {A}, {A,B}, {A,C}, {A,B,C};
// scalar stalks, restrictions x2r and xr into the middle row, x1/2 and x1
// into {A}.  The standard worked instance used across the suites.
struct FixAbc {
  std::shared_ptr<const FiniteSpace> space;
  std::shared_ptr<const MetricSheaf> sheaf;
  int e = -1, a = -1, ab = -1, ac = -1, x = -1;  // open ids
  double r = 1.0;
};

inline FixAbc make_fix_abc(double r = 1.0) {
  FixAbc fix;
  fix.r = r;
  auto space = std::make_shared<FiniteSpace>(FiniteSpace::explicit_topology(
      {"A", "B", "C"}, {{}, {"A"}, {"A", "B"}, {"A", "C"}, {"A", "B", "C"}}));
  fix.space = space;
  fix.e = *space->open_id(space->make_point_set({}));
  fix.a = *space->open_id(space->make_point_set({"A"}));
  fix.ab = *space->open_id(space->make_point_set({"A", "B"}));
  fix.ac = *space->open_id(space->make_point_set({"A", "C"}));
  fix.x = *space->open_id(space->make_point_set({"A", "B", "C"}));

  std::vector<PseudometricSpace> stalks(space->open_count(), EuclideanSpace{1, Metric::linf});
  stalks[fix.e] = OnePointSpace{};
  std::map<std::pair<int, int>, MapBody> gen;
  gen[{fix.a, fix.e}] = CollapseMap{};
  gen[{fix.ab, fix.a}] = LinearMap::scalar(0.5);
  gen[{fix.ac, fix.a}] = LinearMap::scalar(1.0);
  gen[{fix.x, fix.ab}] = LinearMap::scalar(2.0 * r);
  gen[{fix.x, fix.ac}] = LinearMap::scalar(r);
  fix.sheaf =
      std::make_shared<MetricSheaf>(MetricSheaf::build(space, std::move(stalks), gen, 1e-9));
  return fix;
}

// The worked total assignment: 0 and 1 on the middle row, optimal fill
// y = 1/2 at {A} and x with r x = 1/3 at the whole space.
inline Assignment fix_abc_worked(const FixAbc& fix) {
  return make_total_assignment(*fix.sheaf, {
                                               {fix.ab, std::vector<double>{0.0}},
                                               {fix.ac, std::vector<double>{1.0}},
                                               {fix.a, std::vector<double>{0.5}},
                                               {fix.x, std::vector<double>{1.0 / (3.0 * fix.r)}},
                                           });
}

// The partial assignment supported on the middle row only.
inline Assignment fix_abc_partial(const FixAbc& fix) {
  Assignment a = Assignment::empty(*fix.sheaf);
  a.set(fix.ab, std::vector<double>{0.0});
  a.set(fix.ac, std::vector<double>{1.0});
  return a;
}

// Constant scalar sheaf on the chain {} < {p} < {p,q}.
struct TwoChain {
  std::shared_ptr<const FiniteSpace> space;
  std::shared_ptr<const MetricSheaf> sheaf;
  int e = -1, p = -1, pq = -1;
};

inline TwoChain make_two_chain() {
  TwoChain tc;
  auto space = std::make_shared<FiniteSpace>(
      FiniteSpace::explicit_topology({"p", "q"}, {{}, {"p"}, {"p", "q"}}));
  tc.space = space;
  tc.e = *space->open_id(space->make_point_set({}));
  tc.p = *space->open_id(space->make_point_set({"p"}));
  tc.pq = *space->open_id(space->make_point_set({"p", "q"}));
  std::vector<PseudometricSpace> stalks(space->open_count(), EuclideanSpace{1, Metric::linf});
  stalks[tc.e] = OnePointSpace{};
  std::map<std::pair<int, int>, MapBody> gen;
  gen[{tc.p, tc.e}] = CollapseMap{};
  gen[{tc.pq, tc.p}] = LinearMap::scalar(1.0);
  tc.sheaf = std::make_shared<MetricSheaf>(MetricSheaf::build(space, std::move(stalks), gen, 1e-9));
  return tc;
}

// Constant sheaf with identity restrictions and the given stalk dimension.
inline std::shared_ptr<const MetricSheaf> make_constant_sheaf(
    std::shared_ptr<const FiniteSpace> space, int dim, Metric metric = Metric::linf) {
  std::vector<PseudometricSpace> stalks(space->open_count(), EuclideanSpace{dim, metric});
  stalks[space->empty_id()] = OnePointSpace{};
  std::map<std::pair<int, int>, MapBody> gen;
  for (const auto& e : space->hasse_edges()) {
    if (e.sub == space->empty_id())
      gen[{e.sup, e.sub}] = CollapseMap{};
    else
      gen[{e.sup, e.sub}] = LinearMap::identity(dim);
  }
  return std::make_shared<MetricSheaf>(MetricSheaf::build(space, std::move(stalks), gen, 1e-9));
}

// Powerset topology on {a,b,c}: hosts the hollow-triangle covers.
inline std::shared_ptr<const FiniteSpace> make_powerset_abc() {
  return std::make_shared<FiniteSpace>(FiniteSpace::explicit_topology(
      {"a", "b", "c"},
      {{}, {"a"}, {"b"}, {"c"}, {"a", "b"}, {"b", "c"}, {"a", "c"}, {"a", "b", "c"}}));
}

}  // namespace sheaflens::testing
