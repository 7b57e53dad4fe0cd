#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "sheaflens/pointcloud.hpp"

using namespace sheaflens;

namespace {

PointCloud cloud_of(std::vector<std::vector<double>> pts) {
  PointCloud c;
  c.dim = pts.empty() ? 0 : static_cast<int>(pts[0].size());
  c.points = std::move(pts);
  return c;
}

const PointCloud kTriangle =
    cloud_of({{0.0, 0.0}, {1.0, 0.0}, {0.5, std::sqrt(3.0) / 2.0}});
const PointCloud kPair = cloud_of({{0.0, 0.0}, {2.0, 0.0}});

PointCloud random_cloud(std::mt19937& rng, int max_n, int dim) {
  std::uniform_real_distribution<double> coord(0.0, 1.0);
  int n = 1 + static_cast<int>(rng() % static_cast<unsigned>(max_n));
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < n; ++i) {
    std::vector<double> p(dim);
    for (double& x : p) x = coord(rng);
    pts.push_back(p);
  }
  return cloud_of(pts);
}

}  // namespace

TEST_CASE("miniball on canonical configurations") {
  Ball pair = miniball(kPair.points);
  CHECK(pair.radius == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pair.center[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pair.center[1] == doctest::Approx(0.0).epsilon(1e-12));

  Ball tri = miniball(kTriangle.points);
  CHECK(tri.radius == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));

  Ball single = miniball({{3.0, 4.0}});
  CHECK(single.radius == 0.0);

  // Obtuse triangle: the long edge's midpoint wins.
  Ball obtuse = miniball({{0.0, 0.0}, {10.0, 0.0}, {5.0, 0.1}});
  CHECK(obtuse.radius == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(obtuse.center[0] == doctest::Approx(5.0).epsilon(1e-9));

  // Regular tetrahedron, side 1: circumradius sqrt(3/8).
  double s = 1.0 / std::sqrt(2.0);
  Ball tetra = miniball({{s, 0, -s / std::sqrt(2.0)},
                         {-s, 0, -s / std::sqrt(2.0)},
                         {0, s, s / std::sqrt(2.0)},
                         {0, -s, s / std::sqrt(2.0)}});
  CHECK(tetra.radius == doctest::Approx(std::sqrt(3.0 / 8.0) * (2 * s)).epsilon(1e-9));

  // Duplicates collapse to radius zero.
  Ball dup = miniball({{1.0, 1.0}, {1.0, 1.0}});
  CHECK(dup.radius == 0.0);

  CHECK_THROWS_AS(miniball({}), SheafError);
}

TEST_CASE("miniball encloses all points and is locally minimal") {
  std::mt19937 rng(131);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    PointCloud c = random_cloud(rng, 8, 1 + static_cast<int>(rng() % 3));
    Ball b = miniball(c.points);
    double worst = 0.0;
    for (const auto& p : c.points) {
      double d2 = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i)
        d2 += (p[i] - b.center[i]) * (p[i] - b.center[i]);
      worst = std::max(worst, std::sqrt(d2));
    }
    CHECK(worst <= b.radius + 1e-9);
    // Wiggling the center cannot shrink the covering radius.
    for (int probe = 0; probe < 10; ++probe) {
      std::vector<double> center = b.center;
      for (double& x : center) x += gauss(rng) * 0.01;
      double rr = 0.0;
      for (const auto& p : c.points) {
        double d2 = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) d2 += (p[i] - center[i]) * (p[i] - center[i]);
        rr = std::max(rr, std::sqrt(d2));
      }
      CHECK(rr >= b.radius - 1e-9);
    }
  }
}

TEST_CASE("csv loader reads one point per row") {
  std::istringstream in("0,0\n2, 0\n# comment\n");
  PointCloud c = PointCloud::from_csv(in);
  CHECK(c.size() == 2);
  CHECK(c.dim == 2);
  CHECK(c.points[1][0] == doctest::Approx(2.0));
}

TEST_CASE("cloud sheaf of one point") {
  CloudSheafBundle b = build_cloud_sheaf(cloud_of({{1.0, 2.0}}));
  CHECK(b.space->open_count() == 2);  // {} and the single vertex star
  Assignment ext = circumcenter_extension(b);
  CHECK(consistency_radius(*b.sheaf, ext) == doctest::Approx(0.0));
}

TEST_CASE("cloud sheaf of a pair has the three expected stars") {
  CloudSheafBundle b = build_cloud_sheaf(kPair);
  CHECK(b.space->open_count() == 4);  // {}, two vertex stars, the edge star
  Assignment ext = circumcenter_extension(b);
  int edge_star = b.star_open(0b11);
  CHECK(std::get<std::vector<double>>(*ext.values[edge_star])[0] == doctest::Approx(1.0));
}

TEST_CASE("cloud sheaf of a triangle has seven simplex stars") {
  CloudSheafBundle b = build_cloud_sheaf(kTriangle);
  int stars = 0;
  for (std::uint32_t m = 1; m < 8; ++m)
    if (b.star_open(m) >= 0) ++stars;
  CHECK(stars == 7);
  Assignment ext = circumcenter_extension(b);
  int top = b.star_open(0b111);
  auto center = std::get<std::vector<double>>(*ext.values[top]);
  CHECK(center[0] == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(center[1] == doctest::Approx(0.5 / std::sqrt(3.0)).epsilon(1e-9));
}

TEST_CASE("cap violations are reported") {
  std::mt19937 rng(137);
  PointCloud big = random_cloud(rng, 1, 2);
  while (big.size() < 9) big.points.push_back({0.5, 0.5});
  try {
    build_cloud_sheaf(big);
    FAIL("expected CapExceeded");
  } catch (const SheafError& e) {
    CHECK(e.code() == ErrorCode::cap_exceeded);
  }
}

TEST_CASE("pair filtration: vertex stars below 1, edge star above") {
  CloudSheafBundle b = build_cloud_sheaf(kPair);
  CoarseningFiltration filt = cloud_consistency_filtration(b);
  REQUIRE(filt.breakpoints.size() == 1);
  CHECK(filt.breakpoints[0] == doctest::Approx(1.0));
  CHECK(filt.covers[0].members.size() == 2);
  REQUIRE(filt.covers[1].members.size() == 1);
  CHECK(filt.covers[1].members[0] == b.star_open(0b11));
}

TEST_CASE("single point filtration is constant") {
  CoarseningFiltration filt = cloud_consistency_filtration(cloud_of({{0.0}}));
  CHECK(filt.breakpoints.empty());
  CHECK(filt.covers.size() == 1);
}

TEST_CASE("triangle filtration: vertices, edges, then the full star") {
  CloudSheafBundle b = build_cloud_sheaf(kTriangle);
  CoarseningFiltration filt = cloud_consistency_filtration(b);
  REQUIRE(filt.breakpoints.size() == 2);
  CHECK(filt.breakpoints[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(filt.breakpoints[1] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-12));
  CHECK(filt.covers[0].members.size() == 3);
  CHECK(filt.covers[1].members.size() == 3);
  CHECK(filt.covers[2].members.size() == 1);
}

TEST_CASE("cech complex oracle thresholds") {
  Nerve below = cech_complex_oracle(kPair, 0.5);
  CHECK(below.dim_count(0) == 2);
  CHECK(below.dim_count(1) == 0);
  Nerve above = cech_complex_oracle(kPair, 1.5);
  CHECK(above.dim_count(1) == 1);
  Nerve nothing = cech_complex_oracle(kPair, 0.0);
  CHECK(nothing.dim_count(0) == 0);  // strict inequality at zero
}

TEST_CASE("ball intersection is nonempty exactly when the miniball fits") {
  std::mt19937 rng(139);
  std::uniform_real_distribution<double> coord(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    PointCloud c = random_cloud(rng, 5, 2);
    Ball b = miniball(c.points);
    double eps = coord(rng) * 1.5 + 1e-6;
    bool fits = b.radius < eps;
    if (fits) {
      // The miniball center witnesses the intersection.
      for (const auto& p : c.points) {
        double d2 = 0.0;
        for (int i = 0; i < 2; ++i) d2 += (p[i] - b.center[i]) * (p[i] - b.center[i]);
        CHECK(std::sqrt(d2) < eps + 1e-12);
      }
    } else {
      // Rejection sampling cannot find a point within eps of every site.
      for (int probe = 0; probe < 2000; ++probe) {
        std::vector<double> q{coord(rng) * 3 - 1, coord(rng) * 3 - 1};
        bool inside_all = true;
        for (const auto& p : c.points) {
          double d2 = 0.0;
          for (int i = 0; i < 2; ++i) d2 += (p[i] - q[i]) * (p[i] - q[i]);
          if (std::sqrt(d2) >= eps) {
            inside_all = false;
            break;
          }
        }
        CHECK_FALSE(inside_all);
      }
    }
  }
}

TEST_CASE("engine local radii agree with ball radii on the star family") {
  std::mt19937 rng(149);
  for (int trial = 0; trial < 10; ++trial) {
    PointCloud c = random_cloud(rng, 4, 2);
    for (const auto& row : cloud_consistency_cross_check(c))
      CHECK(row.engine_radius == doctest::Approx(row.ball_radius).epsilon(1e-9));
  }
}

TEST_CASE("the general filtration engine reproduces the cloud filtration") {
  std::mt19937 rng(151);
  for (int trial = 0; trial < 6; ++trial) {
    PointCloud c = random_cloud(rng, 4, 2);
    CloudSheafBundle b = build_cloud_sheaf(c);
    CoarseningFiltration from_balls = cloud_consistency_filtration(b);
    CoarseningFiltration from_engine =
        consistency_filtration(*b.sheaf, circumcenter_extension(b));
    REQUIRE(from_balls.breakpoints.size() == from_engine.breakpoints.size());
    for (std::size_t i = 0; i < from_balls.breakpoints.size(); ++i)
      CHECK(from_balls.breakpoints[i] == doctest::Approx(from_engine.breakpoints[i]).epsilon(1e-9));
    REQUIRE(from_balls.covers.size() == from_engine.covers.size());
    for (std::size_t i = 0; i < from_balls.covers.size(); ++i)
      CHECK(from_balls.covers[i].members == from_engine.covers[i].members);
  }
}

TEST_CASE("pipeline and oracle barcodes agree on random planar clouds") {
  std::mt19937 rng(157);
  for (int trial = 0; trial < 12; ++trial) {
    PointCloud c = random_cloud(rng, 6, 2);
    PersistenceDiagram pipeline =
        barcode(persistence_module_from_filtration<F2>(cloud_consistency_filtration(c), 1));
    PersistenceDiagram oracle = barcode(cech_oracle_module<F2>(c, 1));
    CHECK(diagrams_equal(pipeline, oracle, 1e-9));
  }
}

TEST_CASE("cohomology ranks between breakpoints match the oracle complex") {
  std::mt19937 rng(163);
  for (int trial = 0; trial < 8; ++trial) {
    PointCloud c = random_cloud(rng, 6, 2);
    CloudSheafBundle b = build_cloud_sheaf(c);
    CoarseningFiltration filt = cloud_consistency_filtration(b);
    for (std::size_t i = 0; i <= filt.breakpoints.size(); ++i) {
      double lo = i == 0 ? 0.0 : filt.breakpoints[i - 1];
      double hi = i < filt.breakpoints.size() ? filt.breakpoints[i] : lo + 1.0;
      double eps = 0.5 * (lo + hi);
      if (i == filt.breakpoints.size()) eps = lo + 0.5;
      auto cover_h = cech_cohomology<F2>(filt.at(eps), 1);
      auto complex_h = cohomology_of_complex<F2>(cech_complex_oracle(c, eps, 2), 1);
      CHECK(cover_h.ranks == complex_h.ranks);
    }
  }
}

TEST_CASE("duplicate points stay pseudometric-friendly") {
  PointCloud c = cloud_of({{0.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}});
  CoarseningFiltration filt = cloud_consistency_filtration(c);
  PersistenceDiagram pipeline = barcode(persistence_module_from_filtration<F2>(filt, 1));
  PersistenceDiagram oracle = barcode(cech_oracle_module<F2>(c, 1));
  CHECK(diagrams_equal(pipeline, oracle, 1e-9));
  // The duplicated pair is born merged: only one finite degree-0 bar.
  int finite_deg0 = 0;
  for (const auto& bar : pipeline.bars)
    if (bar.degree == 0 && !std::isinf(bar.death)) finite_deg0 += bar.multiplicity;
  CHECK(finite_deg0 == 1);
}
