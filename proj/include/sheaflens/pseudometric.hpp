#pragma once

#include <string>
#include <variant>
#include <vector>

#include "sheaflens/errors.hpp"

namespace sheaflens {

enum class Metric { linf, l2 };

struct EuclideanSpace {
  int dim = 1;
  Metric metric = Metric::linf;
};

// Finite carrier with an explicit symmetric distance table.  Zero distances
// between distinct elements are allowed (pseudometric, not metric).
struct FiniteTableSpace {
  std::vector<std::string> labels;
  std::vector<double> dist;  // row-major, labels.size() squared

  double at(int i, int j) const { return dist[static_cast<std::size_t>(i) * labels.size() + j]; }
};

struct OnePointSpace {};

using PseudometricSpace = std::variant<OnePointSpace, EuclideanSpace, FiniteTableSpace>;

// Checks the pseudometric axioms; triangle inequality exhaustively for tables.
void validate_space(const PseudometricSpace& space);

// A stalk element: monostate for OnePoint, coordinates for Euclidean,
// label index for FiniteTable.
using StalkValue = std::variant<std::monostate, std::vector<double>, int>;

bool in_carrier(const PseudometricSpace& space, const StalkValue& v);
double distance(const PseudometricSpace& space, const StalkValue& a, const StalkValue& b);
std::string value_to_string(const PseudometricSpace& space, const StalkValue& v);

// Map bodies between stalks.
struct LinearMap {
  int rows = 0, cols = 0;
  std::vector<double> a;  // row-major

  double at(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
  static LinearMap identity(int n);
  static LinearMap scalar(double s) { return LinearMap{1, 1, {s}}; }
};

struct TableMap {
  std::vector<int> to;  // source label index -> target label index
};

struct CollapseMap {};  // anything -> the one-point space

using MapBody = std::variant<LinearMap, TableMap, CollapseMap>;

// A restriction (or morphism component): body plus a cached Lipschitz bound
// valid for the given source/target pseudometrics.
struct RestrictionMap {
  MapBody body;
  double lipschitz = 0.0;
};

RestrictionMap make_map(MapBody body, const PseudometricSpace& src, const PseudometricSpace& dst);
RestrictionMap identity_restriction(const PseudometricSpace& space);

StalkValue apply_map(const RestrictionMap& m, const StalkValue& v);

// outer after inner.
RestrictionMap compose(const RestrictionMap& outer, const RestrictionMap& inner);

// Upper bound on d_dst(f x, f y) / d_src(x, y); +inf when none exists.
double lipschitz_constant(const MapBody& body, const PseudometricSpace& src,
                          const PseudometricSpace& dst);

// Pointwise agreement bound of two maps out of src: sup over the carrier (all
// elements for tables, basis vectors for linear maps) of the target distance.
double map_deviation(const RestrictionMap& f, const RestrictionMap& g,
                     const PseudometricSpace& src, const PseudometricSpace& dst);

bool shape_matches(const MapBody& body, const PseudometricSpace& src, const PseudometricSpace& dst);

}  // namespace sheaflens
