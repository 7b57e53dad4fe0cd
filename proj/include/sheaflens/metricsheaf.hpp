#pragma once

#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "sheaflens/finspace.hpp"
#include "sheaflens/pseudometric.hpp"

namespace sheaflens {

// Sheaf of pseudometric spaces over a finite space.  Restrictions are given
// on Hasse edges and composed to every inclusion pair at build time, where
// the identity and path-independence axioms are verified.
class MetricSheaf {
 public:
  static MetricSheaf build(std::shared_ptr<const FiniteSpace> space,
                           std::vector<PseudometricSpace> stalks_by_open,
                           const std::map<std::pair<int, int>, MapBody>& generators,  // (sup, sub)
                           double commutativity_tol = 1e-9);

  const FiniteSpace& space() const { return *space_; }
  std::shared_ptr<const FiniteSpace> space_ptr() const { return space_; }
  const PseudometricSpace& stalk(int open_id) const { return stalks_[open_id]; }

  // Composed restriction stalk(from) -> stalk(to); requires to ⊆ from.
  const RestrictionMap& restriction(int from_open, int to_open) const;

  double commutativity_tol() const { return tol_; }

 private:
  std::shared_ptr<const FiniteSpace> space_;
  std::vector<PseudometricSpace> stalks_;
  std::map<std::pair<int, int>, RestrictionMap> composed_;  // (from=sup, to=sub)
  double tol_ = 1e-9;
};

// One stalk value per open set; values outside the declared support were
// either absent or produced by the extension solver.
struct Assignment {
  std::vector<std::optional<StalkValue>> values;
  std::vector<char> support;

  static Assignment empty(const MetricSheaf& sheaf);

  void set(int open_id, StalkValue v, bool supported = true);
  bool is_total() const;
  bool defined_on(const std::vector<int>& opens) const;
};

Assignment make_total_assignment(const MetricSheaf& sheaf,
                                 const std::map<int, StalkValue>& values);

void check_bound(const MetricSheaf& sheaf, const Assignment& a);

struct CriticalThreshold {
  int sub = -1;  // U
  int sup = -1;  // V
  double value = 0.0;
};

// One entry per proper inclusion pair with nonempty smaller member.
std::vector<CriticalThreshold> critical_thresholds(const MetricSheaf& sheaf, const Assignment& a);

double consistency_radius(const MetricSheaf& sheaf, const Assignment& a);
double consistency_radius_l2(const MetricSheaf& sheaf, const Assignment& a);
double consistency_diameter(const MetricSheaf& sheaf, const Assignment& a);
double local_consistency_radius(const MetricSheaf& sheaf, const Assignment& a, int open_id);
double star_consistency_radius(const MetricSheaf& sheaf, const Assignment& a, int open_id);
double assignment_distance(const MetricSheaf& sheaf, const Assignment& a, const Assignment& b);
bool is_global_section(const MetricSheaf& sheaf, const Assignment& a, double tol);

// Max Lipschitz constant over all composed restrictions on proper inclusions.
double sheaf_lipschitz(const MetricSheaf& sheaf);

}  // namespace sheaflens
