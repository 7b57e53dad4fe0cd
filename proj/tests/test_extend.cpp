#include <cmath>
#include <random>

#include "doctest.h"
#include "sheaflens/extend.hpp"
#include "support/fixtures.hpp"
#include "support/random_instances.hpp"

using namespace sheaflens;
using namespace sheaflens::testing;

namespace {

double scalar(const StalkValue& v) { return std::get<std::vector<double>>(v)[0]; }

}  // namespace

TEST_CASE("worked extension reaches 2/3 with the optimal fill for every r") {
  for (double r : {0.5, 1.0, 2.0}) {
    FixAbc fix = make_fix_abc(r);
    ExtensionResult res = extend_minimize(*fix.sheaf, fix_abc_partial(fix));
    CHECK(res.achieved_radius == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
    CHECK(scalar(*res.assignment.values[fix.a]) == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(r * scalar(*res.assignment.values[fix.x]) == doctest::Approx(1.0 / 3.0).epsilon(1e-4));
    // Supported values are untouched.
    CHECK(scalar(*res.assignment.values[fix.ab]) == 0.0);
    CHECK(scalar(*res.assignment.values[fix.ac]) == 1.0);
  }
}

TEST_CASE("exact extension on the two-chain fills zero") {
  TwoChain tc = make_two_chain();
  Assignment partial = Assignment::empty(*tc.sheaf);
  partial.set(tc.p, std::vector<double>{0.0});
  ExtensionResult res = extend_minimize(*tc.sheaf, partial);
  CHECK(res.achieved_radius == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(scalar(*res.assignment.values[tc.pq]) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("partial consistency equals the radius on fully supported input") {
  FixAbc fix = make_fix_abc();
  Assignment a = fix_abc_worked(fix);
  for (int id = 0; id < fix.space->open_count(); ++id) a.support[id] = 1;
  a.support[fix.e] = 1;
  CHECK(partial_consistency(*fix.sheaf, a) ==
        doctest::Approx(consistency_radius(*fix.sheaf, a)).epsilon(1e-12));
}

TEST_CASE("star-supported input stays above the star bound") {
  FixAbc fix = make_fix_abc();
  Assignment partial = Assignment::empty(*fix.sheaf);
  partial.set(fix.a, std::vector<double>{0.5});
  partial.set(fix.ab, std::vector<double>{0.0});
  partial.set(fix.ac, std::vector<double>{1.0});
  double star_bound = star_consistency_radius(*fix.sheaf, partial, fix.x);
  double value = partial_consistency(*fix.sheaf, partial);
  CHECK(value >= star_bound - 1e-9);
  CHECK(value == doctest::Approx(2.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("extension without any support is rejected") {
  FixAbc fix = make_fix_abc();
  Assignment none = Assignment::empty(*fix.sheaf);
  try {
    extend_minimize(*fix.sheaf, none);
    FAIL("expected NoSupport");
  } catch (const SheafError& e) {
    CHECK(e.code() == ErrorCode::no_support);
  }
}

TEST_CASE("starved iteration budget reports non-convergence") {
  // Two-dimensional stalks so the exact one-dimensional refinement cannot
  // rescue the run.
  std::mt19937 rng(3);
  auto space = make_fix_abc().space;
  FactoredSheaf fs = random_factored_sheaf(space, rng, 2);
  while (fs.dim != 2) fs = random_factored_sheaf(space, rng, 2);
  Assignment partial = Assignment::empty(*fs.sheaf);
  partial.set(space->whole_id(),
              std::get<std::vector<double>>(
                  *random_assignment(*fs.sheaf, rng).values[space->whole_id()]));
  ExtendOptions opts;
  opts.iteration_budget = 3;
  try {
    extend_minimize(*fs.sheaf, partial, opts);
    FAIL("expected NonConvergence");
  } catch (const SheafError& e) {
    CHECK(e.code() == ErrorCode::non_convergence);
  }
}

TEST_CASE("forgetting values outside an open never drops below its local radius") {
  std::mt19937 rng(61);
  for (int trial = 0; trial < 30; ++trial) {
    FactoredSheaf fs = random_factored_sheaf(random_space(rng), rng);
    Assignment a = random_assignment(*fs.sheaf, rng);
    int u = static_cast<int>(rng() % static_cast<unsigned>(fs.space->open_count()));
    Assignment partial = Assignment::empty(*fs.sheaf);
    bool any = false;
    for (int id : fs.space->opens_inside(u))
      if (id != fs.space->empty_id()) {
        partial.set(id, *a.values[id]);
        any = true;
      }
    if (!any) continue;
    ExtendOptions opts;
    opts.iteration_budget = 8000;
    opts.random_starts = 2;
    double value = partial_consistency(*fs.sheaf, partial, opts);
    CHECK(value >= local_consistency_radius(*fs.sheaf, a, u) - 1e-9);
  }
}

TEST_CASE("no random extension beats the solver on scalar problems") {
  std::mt19937 rng(67);
  for (int trial = 0; trial < 20; ++trial) {
    FixAbc fix = make_fix_abc(0.5 + (rng() % 4) * 0.5);
    Assignment partial = fix_abc_partial(fix);
    double best = partial_consistency(*fix.sheaf, partial);
    for (int probe = 0; probe < 40; ++probe) {
      Assignment b = partial;
      std::normal_distribution<double> gauss(0.0, 2.0);
      b.set(fix.a, std::vector<double>{gauss(rng)}, false);
      b.set(fix.x, std::vector<double>{gauss(rng)}, false);
      CHECK(consistency_radius(*fix.sheaf, b) >= best - 1e-6);
    }
  }
}

TEST_CASE("re-running from the returned assignment is a fixed point") {
  FixAbc fix = make_fix_abc();
  ExtensionResult first = extend_minimize(*fix.sheaf, fix_abc_partial(fix));
  ExtensionResult second = extend_minimize(*fix.sheaf, first.assignment);
  CHECK(second.achieved_radius >= first.achieved_radius - 1e-6);
}

TEST_CASE("solver against a dense grid oracle on scalar problems") {
  // min over (y, x) of the worked objective, brute forced on a grid.
  FixAbc fix = make_fix_abc();
  double best = 1e18;
  for (double y = -1.0; y <= 2.0; y += 0.002)
    for (double x = -1.0; x <= 2.0; x += 0.002) {
      double m = std::max({std::fabs(y), std::fabs(1 - y), std::fabs(x - y), std::fabs(2 * x),
                           std::fabs(1 - x)});
      best = std::min(best, m);
    }
  double solved = partial_consistency(*fix.sheaf, fix_abc_partial(fix));
  CHECK(solved <= best + 1e-6);
  CHECK(solved >= best - 0.01);  // grid resolution
}

TEST_CASE("finite table variables are solved by enumeration") {
  // Chain {} < {p} < {p,q} with three-element table stalks and an identity
  // table map; the free bottom value must copy the supported top label.
  auto space = make_two_chain().space;
  TwoChain tc = make_two_chain();
  FiniteTableSpace table{{"u", "v", "w"}, {0, 1, 2, 1, 0, 1, 2, 1, 0}};
  std::vector<PseudometricSpace> stalks(space->open_count(), table);
  stalks[space->empty_id()] = OnePointSpace{};
  std::map<std::pair<int, int>, MapBody> gen;
  TableMap id{{0, 1, 2}};
  int p = *space->open_id(space->make_point_set({"p"}));
  int pq = space->whole_id();
  gen[{p, space->empty_id()}] = CollapseMap{};
  gen[{pq, p}] = id;
  auto sheaf = std::make_shared<MetricSheaf>(MetricSheaf::build(space, stalks, gen, 1e-9));

  Assignment partial = Assignment::empty(*sheaf);
  partial.set(pq, 2);  // label "w"
  ExtensionResult res = extend_minimize(*sheaf, partial);
  CHECK(res.achieved_radius == doctest::Approx(0.0));
  CHECK(std::get<int>(*res.assignment.values[p]) == 2);
}

TEST_CASE("the l2 objective recomputes both aggregates from the result") {
  FixAbc fix = make_fix_abc();
  Assignment partial = fix_abc_partial(fix);
  ExtendOptions opts;
  opts.objective = ExtendObjective::l2;
  ExtensionResult res = extend_minimize(*fix.sheaf, partial, opts);
  CHECK(res.achieved_objective ==
        doctest::Approx(consistency_radius_l2(*fix.sheaf, res.assignment)).epsilon(1e-12));
  CHECK(res.achieved_radius ==
        doctest::Approx(consistency_radius(*fix.sheaf, res.assignment)).epsilon(1e-12));
}
