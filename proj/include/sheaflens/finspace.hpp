#pragma once

#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sheaflens/errors.hpp"
#include "sheaflens/pointset.hpp"

namespace sheaflens {

inline constexpr std::size_t kDefaultOpenCap = 4096;

// Which way the order generates opens.  lower_sets reads "x <= y" as
// "x belongs to every open set containing y", so star(y) = {x : x <= y}.
enum class OrderConvention { lower_sets, upper_sets };

struct HasseEdge {
  int sub = -1;  // smaller open
  int sup = -1;  // larger open
};

// A finite set of labelled points together with an explicit finite family of
// open sets.  Opens carry dense integer ids; the covering (Hasse) relation of
// inclusion is precomputed since every consistency quantity ranges over
// inclusion pairs.
class FiniteSpace {
 public:
  // Validates the axioms: empty set and whole set present, family closed
  // under pairwise union and intersection.
  static FiniteSpace explicit_topology(std::vector<std::string> points,
                                       const std::vector<std::vector<std::string>>& open_list);

  // Opens generated from a preorder (all unions of stars; see
  // OrderConvention).  Errors with cap_exceeded instead of truncating.
  static FiniteSpace alexandrov(std::vector<std::string> points,
                                const std::vector<std::pair<std::string, std::string>>& leq_pairs,
                                std::size_t cap = kDefaultOpenCap,
                                OrderConvention conv = OrderConvention::lower_sets);

  // Registers a family that is intersection-closed and contains the empty
  // and whole sets, without requiring union closure.  Used for star-generated
  // families (point clouds), where the union closure is astronomically large.
  static FiniteSpace star_family(std::vector<std::string> points, std::vector<PointSet> opens);

  int point_count() const { return static_cast<int>(points_.size()); }
  const std::vector<std::string>& point_labels() const { return points_; }
  int point_index(const std::string& label) const;

  int open_count() const { return static_cast<int>(opens_.size()); }
  const PointSet& open_members(int id) const { return opens_[id]; }
  std::optional<int> open_id(const PointSet& members) const;
  std::string open_label(int id) const;

  int empty_id() const { return empty_id_; }
  int whole_id() const { return whole_id_; }

  // Smallest open containing the subset.  Requires intersection closure,
  // which every construction path guarantees.
  int star_of(const PointSet& subset) const;
  int star_of_point(int point) const;

  bool open_subset(int u, int v) const { return subset_[u][v]; }

  // All pairs (u, v) with open u strictly contained in open v.
  const std::vector<std::pair<int, int>>& inclusion_pairs() const { return inclusion_pairs_; }
  const std::vector<HasseEdge>& hasse_edges() const { return hasse_; }
  // Ids of opens contained in v, including v itself and the empty open.
  const std::vector<int>& opens_inside(int v) const { return inside_[v]; }

  PointSet make_point_set(const std::vector<std::string>& labels) const;

  bool same_space(const FiniteSpace& other) const;

 private:
  FiniteSpace() = default;
  void finalize();  // fills subset matrix, Hasse diagram, lookup table

  std::vector<std::string> points_;
  std::unordered_map<std::string, int> point_index_;
  std::vector<PointSet> opens_;
  std::unordered_map<PointSet, int, PointSetHash> open_index_;
  std::vector<std::vector<char>> subset_;
  std::vector<std::pair<int, int>> inclusion_pairs_;
  std::vector<std::vector<int>> inside_;
  std::vector<HasseEdge> hasse_;
  int empty_id_ = -1;
  int whole_id_ = -1;
};

// Open sets referenced by id within one space.
struct OpenSet {
  int id = -1;
  PointSet members;
};

// A family of opens of one space; "partial" because it need not cover X.
struct PartialCover {
  std::shared_ptr<const FiniteSpace> space;
  std::vector<int> members;  // open ids, sorted, unique

  void normalize();
};

PartialCover make_cover(std::shared_ptr<const FiniteSpace> space, std::vector<int> members);

// True iff every member of fine is contained in some member of coarse.
bool refines(const PartialCover& fine, const PartialCover& coarse);

// A total map on points between two spaces.
struct PointMap {
  std::shared_ptr<const FiniteSpace> domain;
  std::shared_ptr<const FiniteSpace> codomain;
  std::vector<int> to;  // point index -> point index

  static PointMap identity(std::shared_ptr<const FiniteSpace> space);

  PointSet preimage(const PointSet& codomain_subset) const;
};

bool is_continuous(const PointMap& f);

PointMap compose(const PointMap& g, const PointMap& f);  // g after f

// Preimage cover {f^{-1}(U) : U in cover}; requires f continuous.
PartialCover preimage_cover(const PointMap& f, const PartialCover& cover);

}  // namespace sheaflens
