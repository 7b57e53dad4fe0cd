#include <random>
#include <set>

#include "doctest.h"
#include "sheaflens/finspace.hpp"
#include "support/fixtures.hpp"

using namespace sheaflens;
using namespace sheaflens::testing;

TEST_CASE("explicit topology accepts the worked three-point space") {
  FiniteSpace sp = FiniteSpace::explicit_topology(
      {"A", "B", "C"}, {{}, {"A"}, {"A", "B"}, {"A", "C"}, {"A", "B", "C"}});
  CHECK(sp.open_count() == 5);
  int e = *sp.open_id(sp.make_point_set({}));
  int a = *sp.open_id(sp.make_point_set({"A"}));
  int ab = *sp.open_id(sp.make_point_set({"A", "B"}));
  int ac = *sp.open_id(sp.make_point_set({"A", "C"}));
  int x = *sp.open_id(sp.make_point_set({"A", "B", "C"}));

  std::set<std::pair<int, int>> edges;
  for (const auto& h : sp.hasse_edges()) edges.insert({h.sub, h.sup});
  std::set<std::pair<int, int>> expected{{e, a}, {a, ab}, {a, ac}, {ab, x}, {ac, x}};
  CHECK(edges == expected);
}

TEST_CASE("explicit topology accepts the one-point space") {
  FiniteSpace sp = FiniteSpace::explicit_topology({"p"}, {{}, {"p"}});
  CHECK(sp.open_count() == 2);
  CHECK(sp.empty_id() != sp.whole_id());
}

TEST_CASE("explicit topology rejects a family missing a union") {
  try {
    FiniteSpace::explicit_topology({"A", "B"}, {{}, {"A"}, {"B"}});
    FAIL("expected NotClosedUnderUnion");
  } catch (const SheafError& e) {
    CHECK(e.code() == ErrorCode::not_closed_under_union);
    CHECK(std::string(e.what()).find("{A}") != std::string::npos);
    CHECK(std::string(e.what()).find("{B}") != std::string::npos);
  }
}

TEST_CASE("explicit topology rejects a family missing empty or whole") {
  CHECK_THROWS_AS(FiniteSpace::explicit_topology({"A"}, {{"A"}}), SheafError);
  CHECK_THROWS_AS(FiniteSpace::explicit_topology({"A", "B"}, {{}, {"A"}}), SheafError);
}

TEST_CASE("alexandrov opens of a two-chain") {
  FiniteSpace sp = FiniteSpace::alexandrov({"a", "b"}, {{"a", "b"}});
  // a <= b: a sits inside every open containing b.
  CHECK(sp.open_count() == 3);
  CHECK(sp.open_id(sp.make_point_set({"a"})).has_value());
  CHECK_FALSE(sp.open_id(sp.make_point_set({"b"})).has_value());
  CHECK(sp.open_id(sp.make_point_set({"a", "b"})).has_value());
}

TEST_CASE("alexandrov convention flag flips the open family") {
  FiniteSpace sp = FiniteSpace::alexandrov({"a", "b"}, {{"a", "b"}}, kDefaultOpenCap,
                                           OrderConvention::upper_sets);
  CHECK(sp.open_count() == 3);
  CHECK(sp.open_id(sp.make_point_set({"b"})).has_value());
  CHECK_FALSE(sp.open_id(sp.make_point_set({"a"})).has_value());
}

TEST_CASE("alexandrov antichain gives the discrete topology") {
  FiniteSpace sp = FiniteSpace::alexandrov({"a", "b"}, {});
  CHECK(sp.open_count() == 4);
}

TEST_CASE("alexandrov cap errors out instead of truncating") {
  std::vector<std::string> pts;
  for (int i = 0; i < 20; ++i) pts.push_back("p" + std::to_string(i));
  try {
    FiniteSpace::alexandrov(pts, {}, 1000);
    FAIL("expected CapExceeded");
  } catch (const SheafError& e) {
    CHECK(e.code() == ErrorCode::cap_exceeded);
  }
}

TEST_CASE("stars of the worked space") {
  FixAbc fix = make_fix_abc();
  const FiniteSpace& sp = *fix.space;
  CHECK(sp.star_of(sp.make_point_set({"B"})) == fix.ab);
  CHECK(sp.star_of(sp.make_point_set({"A"})) == fix.a);
  CHECK(sp.star_of(sp.make_point_set({})) == fix.e);
}

TEST_CASE("star is idempotent") {
  std::mt19937 rng(7);
  FixAbc fix = make_fix_abc();
  const FiniteSpace& sp = *fix.space;
  for (int trial = 0; trial < 50; ++trial) {
    PointSet s(sp.point_count());
    for (int i = 0; i < sp.point_count(); ++i)
      if (rng() % 2) s.insert(i);
    int st = sp.star_of(s);
    CHECK(sp.star_of(sp.open_members(st)) == st);
  }
}

TEST_CASE("refines matches the worked covers") {
  FixAbc fix = make_fix_abc();
  auto cover = [&](std::vector<int> ids) { return make_cover(fix.space, std::move(ids)); };
  CHECK(refines(cover({fix.a}), cover({fix.ab, fix.ac})));
  CHECK(refines(cover({fix.ab, fix.ac}), cover({fix.x})));
  CHECK_FALSE(refines(cover({fix.ab}), cover({fix.ac})));
}

TEST_CASE("refines is reflexive and transitive") {
  std::mt19937 rng(11);
  FixAbc fix = make_fix_abc();
  const int n = fix.space->open_count();
  auto random_cover = [&]() {
    std::vector<int> ids;
    for (int i = 0; i < n; ++i)
      if (rng() % 2) ids.push_back(i);
    return make_cover(fix.space, std::move(ids));
  };
  for (int trial = 0; trial < 100; ++trial) {
    PartialCover u = random_cover(), v = random_cover(), w = random_cover();
    CHECK(refines(u, u));
    if (refines(u, v) && refines(v, w)) CHECK(refines(u, w));
  }
}

TEST_CASE("refines demands one common space") {
  FixAbc fix = make_fix_abc();
  TwoChain tc = make_two_chain();
  CHECK_THROWS_AS((void)refines(make_cover(fix.space, {fix.a}), make_cover(tc.space, {tc.p})),
                  SheafError);
}

TEST_CASE("intersections of open subfamilies stay open") {
  std::mt19937 rng(13);
  FixAbc fix = make_fix_abc();
  const FiniteSpace& sp = *fix.space;
  for (int trial = 0; trial < 50; ++trial) {
    PointSet acc = sp.open_members(sp.whole_id());
    bool any = false;
    for (int i = 0; i < sp.open_count(); ++i)
      if (rng() % 2) {
        acc = acc.intersect_with(sp.open_members(i));
        any = true;
      }
    if (any) CHECK(sp.open_id(acc).has_value());
  }
}

TEST_CASE("continuity of identity and constant maps") {
  FixAbc fix = make_fix_abc();
  CHECK(is_continuous(PointMap::identity(fix.space)));

  // Constant map onto the generic point A: preimages are empty or whole.
  int a_index = 0;
  PointMap constant{fix.space, fix.space, std::vector<int>(3, a_index)};
  CHECK(is_continuous(constant));
}

TEST_CASE("a map pulling an open back to a non-open is not continuous") {
  auto sier = std::make_shared<FiniteSpace>(
      FiniteSpace::explicit_topology({"p", "q"}, {{}, {"p"}, {"p", "q"}}));
  auto disc = std::make_shared<FiniteSpace>(
      FiniteSpace::explicit_topology({"s", "t"}, {{}, {"s"}, {"t"}, {"s", "t"}}));
  // All four preimages: {} -> {}, {s} -> {p}, {t} -> {q} (not open), X -> X.
  PointMap f{sier, disc, {0, 1}};
  CHECK_FALSE(is_continuous(f));
  PointMap g{disc, sier, {0, 1}};
  CHECK(is_continuous(g));
}

TEST_CASE("composition preserves continuity") {
  FixAbc fix = make_fix_abc();
  PointMap id = PointMap::identity(fix.space);
  PointMap constant{fix.space, fix.space, std::vector<int>(3, 0)};
  PointMap comp = compose(constant, id);
  CHECK(is_continuous(comp));
}

TEST_CASE("star family registers stars plus empty and whole") {
  PointSet sa(2), sb(2);
  sa.insert(0);
  sb.insert(1);
  FiniteSpace sp = FiniteSpace::star_family({"a", "b"}, {sa, sb});
  CHECK(sp.open_count() == 4);  // {}, {a}, {b}, {a,b}
  CHECK(sp.star_of(sa) == *sp.open_id(sa));
}
