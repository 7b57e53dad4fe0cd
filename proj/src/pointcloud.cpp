#include "sheaflens/pointcloud.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace sheaflens {

namespace {

double dist2(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return acc;
}

// Circumball of an affinely independent support set, solved in its affine
// hull; nullopt when the Gram system is numerically dependent.
std::optional<Ball> ball_from_support(const std::vector<std::vector<double>>& r) {
  if (r.empty()) return Ball{{}, -1.0};
  const int dim = static_cast<int>(r[0].size());
  if (r.size() == 1) return Ball{r[0], 0.0};
  const int k = static_cast<int>(r.size()) - 1;
  std::vector<std::vector<double>> v(k, std::vector<double>(dim));
  for (int i = 0; i < k; ++i)
    for (int d = 0; d < dim; ++d) v[i][d] = r[i + 1][d] - r[0][d];

  // 2 (v_i . v_j) lambda_j = |v_i|^2
  std::vector<std::vector<double>> m(k, std::vector<double>(k + 1));
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      double dot = 0.0;
      for (int d = 0; d < dim; ++d) dot += v[i][d] * v[j][d];
      m[i][j] = 2.0 * dot;
    }
    double n2 = 0.0;
    for (int d = 0; d < dim; ++d) n2 += v[i][d] * v[i][d];
    m[i][k] = n2;
  }
  double scale = 1e-30;
  for (int i = 0; i < k; ++i) scale = std::max(scale, std::fabs(m[i][i]));
  for (int col = 0; col < k; ++col) {
    int piv = col;
    for (int i = col + 1; i < k; ++i)
      if (std::fabs(m[i][col]) > std::fabs(m[piv][col])) piv = i;
    if (std::fabs(m[piv][col]) < 1e-10 * scale) return std::nullopt;
    std::swap(m[piv], m[col]);
    for (int i = 0; i < k; ++i) {
      if (i == col) continue;
      double f = m[i][col] / m[col][col];
      for (int j = col; j <= k; ++j) m[i][j] -= f * m[col][j];
    }
  }
  std::vector<double> lambda(k);
  for (int i = 0; i < k; ++i) lambda[i] = m[i][k] / m[i][i];

  Ball b{r[0], 0.0};
  for (int i = 0; i < k; ++i)
    for (int d = 0; d < dim; ++d) b.center[d] += lambda[i] * v[i][d];
  b.radius = std::sqrt(dist2(b.center, r[0]));
  return b;
}

Ball welzl(std::vector<std::vector<double>>& pts, std::vector<std::vector<double>>& support,
           std::size_t limit, int dim) {
  if (limit == 0 || static_cast<int>(support.size()) == dim + 1) {
    auto b = ball_from_support(support);
    if (b) return *b;
    // Dependent support: fall back to the circumball of a maximal
    // independent prefix.
    std::vector<std::vector<double>> reduced(support.begin(), support.end() - 1);
    auto fb = ball_from_support(reduced);
    return fb ? *fb : Ball{support[0], 0.0};
  }
  const std::vector<double> p = pts[limit - 1];
  Ball b = welzl(pts, support, limit - 1, dim);
  if (b.radius >= 0.0 && dist2(p, b.center) <= (b.radius + 1e-12) * (b.radius + 1e-12)) return b;
  support.push_back(p);
  Ball r = welzl(pts, support, limit - 1, dim);
  support.pop_back();
  return r;
}

std::string mask_label(std::uint32_t mask) {
  std::string out;
  for (int i = 0; i < 32; ++i)
    if (mask & (1u << i)) {
      if (!out.empty()) out += '.';
      out += std::to_string(i);
    }
  return out;
}

}  // namespace

PointCloud PointCloud::from_csv(std::istream& in) {
  PointCloud cloud;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> pt;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (cell.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        pt.push_back(std::stod(cell));
      } catch (const std::exception&) {
        fail(ErrorCode::schema_error, "non-numeric cell '" + cell + "' in point cloud CSV");
      }
    }
    if (pt.empty()) continue;
    if (cloud.points.empty()) cloud.dim = static_cast<int>(pt.size());
    if (static_cast<int>(pt.size()) != cloud.dim)
      fail(ErrorCode::schema_error, "rows of the point cloud have mixed dimensions");
    cloud.points.push_back(std::move(pt));
  }
  return cloud;
}

PointCloud PointCloud::from_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::schema_error, "cannot open " + path);
  return from_csv(in);
}

PointCloud PointCloud::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::schema_error, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(ErrorCode::schema_error, std::string("invalid JSON: ") + e.what());
  }
  const auto& arr = j.is_object() && j.contains("points") ? j["points"] : j;
  if (!arr.is_array()) fail(ErrorCode::schema_error, "expected an array of points");
  PointCloud cloud;
  for (const auto& row : arr) {
    std::vector<double> pt;
    for (const auto& x : row) pt.push_back(x.get<double>());
    if (cloud.points.empty()) cloud.dim = static_cast<int>(pt.size());
    if (static_cast<int>(pt.size()) != cloud.dim)
      fail(ErrorCode::schema_error, "points have mixed dimensions");
    cloud.points.push_back(std::move(pt));
  }
  return cloud;
}

Ball miniball(const std::vector<std::vector<double>>& points) {
  if (points.empty()) fail(ErrorCode::empty_input, "miniball of an empty set");
  const int dim = static_cast<int>(points[0].size());

  std::vector<std::vector<double>> pts = points;
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::mt19937 rng(0x9e3779b9u);
  std::shuffle(pts.begin(), pts.end(), rng);

  std::vector<std::vector<double>> support;
  Ball b = welzl(pts, support, pts.size(), dim);
  if (b.radius < 0.0) b = Ball{points[0], 0.0};
  // Report the exact covering radius of the computed center.
  double r2 = 0.0;
  for (const auto& p : points) r2 = std::max(r2, dist2(p, b.center));
  b.radius = std::sqrt(r2);
  return b;
}

std::vector<double> simplex_radii(const PointCloud& cloud, int cap) {
  const int n = cloud.size();
  if (n > cap)
    fail(ErrorCode::cap_exceeded,
         "cloud has " + std::to_string(n) + " points, cap is " + std::to_string(cap));
  const std::uint32_t top = n >= 32 ? 0 : (1u << n);
  std::vector<double> radii(top, 0.0);
  for (std::uint32_t mask = 1; mask < top; ++mask) {
    std::vector<std::vector<double>> pts;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) pts.push_back(cloud.points[i]);
    radii[mask] = miniball(pts).radius;
  }
  return radii;
}

CloudSheafBundle build_cloud_sheaf(const PointCloud& cloud, int cap) {
  const int n = cloud.size();
  if (n == 0) fail(ErrorCode::empty_input, "empty point cloud");
  if (n > cap)
    fail(ErrorCode::cap_exceeded,
         "cloud has " + std::to_string(n) + " points, cap is " + std::to_string(cap));

  CloudSheafBundle bundle;
  bundle.cloud = cloud;

  // Space points: nonempty sub-simplices ordered by (size, mask).
  std::vector<std::uint32_t> masks;
  for (std::uint32_t m = 1; m < (1u << n); ++m) masks.push_back(m);
  std::sort(masks.begin(), masks.end(), [](std::uint32_t a, std::uint32_t b) {
    int ca = std::popcount(a), cb = std::popcount(b);
    return ca != cb ? ca < cb : a < b;
  });
  std::vector<int> point_of_mask(1u << n, -1);
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    point_of_mask[masks[i]] = static_cast<int>(i);
    labels.push_back(mask_label(masks[i]));
  }
  bundle.mask_of_point = masks;

  // Stars: down-closures, one per simplex.
  std::vector<PointSet> stars;
  for (std::uint32_t sigma : masks) {
    PointSet s(static_cast<int>(masks.size()));
    for (std::uint32_t tau = sigma; tau; tau = (tau - 1) & sigma) s.insert(point_of_mask[tau]);
    stars.push_back(std::move(s));
  }

  auto space = std::make_shared<FiniteSpace>(FiniteSpace::star_family(labels, stars));
  bundle.space = space;
  bundle.star_open_of_mask.assign(1u << n, -1);
  for (std::size_t i = 0; i < masks.size(); ++i)
    bundle.star_open_of_mask[masks[i]] = *space->open_id(stars[i]);

  std::vector<PseudometricSpace> stalks(space->open_count(),
                                        EuclideanSpace{cloud.dim, Metric::l2});
  stalks[space->empty_id()] = OnePointSpace{};
  std::map<std::pair<int, int>, MapBody> generators;
  for (const auto& e : space->hasse_edges()) {
    if (e.sub == space->empty_id())
      generators[{e.sup, e.sub}] = CollapseMap{};
    else
      generators[{e.sup, e.sub}] = LinearMap::identity(cloud.dim);
  }
  bundle.sheaf = std::make_shared<MetricSheaf>(
      MetricSheaf::build(space, std::move(stalks), generators, 1e-9));

  bundle.partial = Assignment::empty(*bundle.sheaf);
  for (int i = 0; i < n; ++i)
    bundle.partial.set(bundle.star_open(1u << i), cloud.points[i], true);
  return bundle;
}

Assignment circumcenter_extension(const CloudSheafBundle& bundle) {
  const FiniteSpace& sp = *bundle.space;
  const int n = bundle.cloud.size();
  Assignment a = Assignment::empty(*bundle.sheaf);
  for (int id = 0; id < sp.open_count(); ++id) {
    if (id == sp.empty_id()) continue;
    std::vector<std::vector<double>> pts;
    const PointSet& members = sp.open_members(id);
    // Vertex simplices sort first, so the space point index of vertex i is i.
    for (int i = 0; i < n; ++i)
      if (members.contains(i)) pts.push_back(bundle.cloud.points[i]);
    a.set(id, miniball(pts).center, bundle.partial.support[id] != 0);
  }
  // Keep the supported vertex values bit-exact.
  for (int id = 0; id < sp.open_count(); ++id)
    if (bundle.partial.support[id]) a.set(id, *bundle.partial.values[id], true);
  return a;
}

CoarseningFiltration cloud_consistency_filtration(const CloudSheafBundle& bundle) {
  const int n = bundle.cloud.size();
  std::vector<double> radii = simplex_radii(bundle.cloud, n);

  std::vector<double> breaks;
  for (std::uint32_t m = 1; m < (1u << n); ++m)
    if (radii[m] > 0.0) breaks.push_back(radii[m]);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  CoarseningFiltration filt;
  filt.space = bundle.space;
  filt.breakpoints = breaks;
  for (std::size_t i = 0; i <= breaks.size(); ++i) {
    double level = i == 0 ? 0.0 : breaks[i - 1];
    std::vector<int> cover;
    for (std::uint32_t m = 1; m < (1u << n); ++m) {
      if (radii[m] > level) continue;
      bool maximal = true;
      for (int b = 0; b < n && maximal; ++b) {
        std::uint32_t bigger = m | (1u << b);
        if (bigger != m && radii[bigger] <= level) maximal = false;
      }
      if (maximal) cover.push_back(bundle.star_open(m));
    }
    filt.covers.push_back(make_cover(bundle.space, std::move(cover)));
  }
  for (std::size_t i = 0; i + 1 < filt.covers.size(); ++i)
    if (!refines(filt.covers[i], filt.covers[i + 1]))
      fail(ErrorCode::not_a_refinement, "cloud filtration failed the coarsening invariant");
  return filt;
}

CoarseningFiltration cloud_consistency_filtration(const PointCloud& cloud, int cap) {
  return cloud_consistency_filtration(build_cloud_sheaf(cloud, cap));
}

namespace {

Nerve complex_from_radii(int n, const std::vector<double>& radii, double epsilon, int max_dim) {
  Nerve nv;
  for (int i = 0; i < n; ++i) nv.vertex_ids.push_back(i);
  int dcap = max_dim < 0 ? n - 1 : std::min(max_dim, n - 1);
  nv.simplices.assign(dcap + 1, {});
  for (std::uint32_t m = 1; m < (1u << n); ++m) {
    int d = std::popcount(m) - 1;
    if (d > dcap || radii[m] >= epsilon) continue;
    std::vector<int> s;
    for (int i = 0; i < n; ++i)
      if (m & (1u << i)) s.push_back(i);
    nv.simplices[d].push_back(std::move(s));
  }
  for (auto& level : nv.simplices) std::sort(level.begin(), level.end());
  while (!nv.simplices.empty() && nv.simplices.back().empty()) nv.simplices.pop_back();
  nv.max_dim = static_cast<int>(nv.simplices.size()) - 1;
  return nv;
}

}  // namespace

Nerve cech_complex_oracle(const PointCloud& cloud, double epsilon, int max_dim, int cap) {
  return complex_from_radii(cloud.size(), simplex_radii(cloud, cap), epsilon, max_dim);
}

template <class F>
PersistenceModule<F> cech_oracle_module(const PointCloud& cloud, int degree_cap, int cap) {
  const int n = cloud.size();
  std::vector<double> radii = simplex_radii(cloud, cap);
  std::vector<double> breaks;
  for (std::uint32_t m = 1; m < (1u << n); ++m)
    if (radii[m] > 0.0) breaks.push_back(radii[m]);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  PersistenceModule<F> mod;
  mod.degree_cap = degree_cap;
  mod.index_values.push_back(0.0);
  for (double t : breaks) mod.index_values.push_back(t);

  std::vector<Cohomology<F>> hs;
  for (std::size_t i = 0; i <= breaks.size(); ++i) {
    double level = i == 0 ? 0.0 : breaks[i - 1];
    Nerve complex = complex_from_radii(n, radii, std::nextafter(level, 1e300), degree_cap + 1);
    hs.push_back(cohomology_of_complex<F>(std::move(complex), degree_cap));
    std::vector<int> d;
    for (int deg = 0; deg <= degree_cap; ++deg) d.push_back(hs.back().rank(deg));
    mod.dims.push_back(std::move(d));
  }

  // Cochain restriction along the inclusion K_i into K_{i+1}.
  for (std::size_t i = 0; i + 1 < hs.size(); ++i) {
    std::vector<Mat<F>> maps;
    for (int deg = 0; deg <= degree_cap; ++deg) {
      Mat<F> m(hs[i].rank(deg), hs[i + 1].rank(deg));
      for (int j = 0; j < hs[i + 1].rank(deg); ++j) {
        const auto& big = hs[i + 1].basis[deg][j];
        std::vector<F> restricted(hs[i].complex.dim_count(deg), F::zero());
        for (int k = 0; k < hs[i].complex.dim_count(deg); ++k) {
          // Positions differ between the complexes; translate via vertex ids
          // (identical here) and simplex lookup.
          auto idx = hs[i + 1].complex.index_of(deg, hs[i].complex.simplices[deg][k]);
          if (idx) restricted[k] = big[*idx];
        }
        std::vector<F> coords = hs[i].coordinates(deg, restricted);
        for (int r = 0; r < hs[i].rank(deg); ++r) m.at(r, j) = coords[r];
      }
      maps.push_back(std::move(m));
    }
    mod.maps.push_back(std::move(maps));
  }
  return mod;
}

template PersistenceModule<F2> cech_oracle_module<F2>(const PointCloud&, int, int);
template PersistenceModule<Rat> cech_oracle_module<Rat>(const PointCloud&, int, int);

std::vector<CrossCheckRow> cloud_consistency_cross_check(const PointCloud& cloud, int cap) {
  CloudSheafBundle bundle = build_cloud_sheaf(cloud, cap);
  Assignment ext = circumcenter_extension(bundle);
  std::vector<double> radii = simplex_radii(cloud, cap);
  std::vector<CrossCheckRow> rows;
  for (std::uint32_t m = 1; m < (1u << cloud.size()); ++m) {
    CrossCheckRow row;
    row.mask = m;
    row.ball_radius = radii[m];
    row.engine_radius = local_consistency_radius(*bundle.sheaf, ext, bundle.star_open(m));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace sheaflens
