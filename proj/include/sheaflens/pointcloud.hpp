#pragma once

#include <cstdint>
#include <iosfwd>

#include "sheaflens/cech.hpp"
#include "sheaflens/extend.hpp"

namespace sheaflens {

inline constexpr int kDefaultCloudCap = 8;

// Finite set of points in R^M; duplicates allowed.
struct PointCloud {
  int dim = 0;
  std::vector<std::vector<double>> points;

  static PointCloud from_csv(std::istream& in);
  static PointCloud from_csv_file(const std::string& path);
  static PointCloud from_json_file(const std::string& path);

  int size() const { return static_cast<int>(points.size()); }
};

struct Ball {
  std::vector<double> center;
  double radius = 0.0;
};

// Smallest enclosing ball (Welzl).  Deterministic; the returned radius is
// the exact max distance from the computed center to the input points.
Ball miniball(const std::vector<std::vector<double>>& points);

// Constant sheaf of R^M on the star-generated Alexandrov family over the
// full simplex on the cloud's points, with the cloud as a partial assignment
// supported on the vertex stars.
struct CloudSheafBundle {
  PointCloud cloud;
  std::shared_ptr<const FiniteSpace> space;
  std::shared_ptr<const MetricSheaf> sheaf;
  Assignment partial;
  std::vector<std::uint32_t> mask_of_point;  // space point index -> simplex mask
  std::vector<int> star_open_of_mask;        // simplex mask -> open id of its star

  int star_open(std::uint32_t mask) const { return star_open_of_mask[mask]; }
};

CloudSheafBundle build_cloud_sheaf(const PointCloud& cloud, int cap = kDefaultCloudCap);

// Value on each open: miniball center of the points whose vertex stars the
// open contains.
Assignment circumcenter_extension(const CloudSheafBundle& bundle);

// Miniball radius of every nonempty simplex, indexed by mask.
std::vector<double> simplex_radii(const PointCloud& cloud, int cap = kDefaultCloudCap);

// Consistency filtration of the cloud sheaf: a star enters once its miniball
// radius drops below the threshold; covers are the maximal consistent stars.
CoarseningFiltration cloud_consistency_filtration(const CloudSheafBundle& bundle);
CoarseningFiltration cloud_consistency_filtration(const PointCloud& cloud,
                                                  int cap = kDefaultCloudCap);

// Radius-epsilon Cech complex, built directly from miniball radii with the
// strict inequality radius < epsilon; independent of the sheaf pipeline.
Nerve cech_complex_oracle(const PointCloud& cloud, double epsilon, int max_dim = -1,
                          int cap = kDefaultCloudCap);

// Persistence module of the oracle complexes across all radius thresholds,
// with cochain-restriction maps (contravariant, same shape as the pipeline).
template <class F>
PersistenceModule<F> cech_oracle_module(const PointCloud& cloud, int degree_cap,
                                        int cap = kDefaultCloudCap);

// Side-by-side comparison of the ball criterion and the general engine on
// the circumcenter extension, per simplex star.
struct CrossCheckRow {
  std::uint32_t mask = 0;
  double ball_radius = 0.0;
  double engine_radius = 0.0;
};

std::vector<CrossCheckRow> cloud_consistency_cross_check(const PointCloud& cloud, int cap = 4);

}  // namespace sheaflens
