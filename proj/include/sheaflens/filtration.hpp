#pragma once

#include <optional>

#include "sheaflens/metricsheaf.hpp"

namespace sheaflens {

// Threshold-indexed family of partial covers; cover[i] is in force on the
// half-open interval (t_i, t_{i+1}], with t_0 = 0 and t_{k+1} = +inf.
// Evaluation at t <= 0 yields the empty cover.
struct CoarseningFiltration {
  std::shared_ptr<const FiniteSpace> space;
  std::vector<double> breakpoints;   // strictly increasing, positive
  std::vector<PartialCover> covers;  // breakpoints.size() + 1 entries

  PartialCover at(double t) const;
};

// Monotone reparametrization of the threshold axis: a pure shift t + delta
// or a continuous piecewise-linear map with unit-slope tails.
struct ShiftMap {
  double delta = 0.0;
  std::vector<std::pair<double, double>> nodes;  // (t, phi(t)), sorted; empty -> pure shift

  static ShiftMap shift(double d) { return ShiftMap{d, {}}; }

  double eval(double t) const;
  double inf_preimage(double t) const;
  double sup_preimage(double t) const;
  // Largest |phi(t) - t| over all t (attained at nodes for these maps).
  double max_displacement() const;
};

struct InterleavingCandidate {
  ShiftMap phi, psi;
  std::optional<PointMap> f;  // base map F.space -> G.space; identity when absent
  std::optional<PointMap> g;  // base map G.space -> F.space
  double epsilon = 0.0;
};

struct InterleavingCheck {
  bool ok = true;
  int failed_condition = 0;  // 1..4 definition conditions, 5/6 morphism refinement
  double witness_t = 0.0;
  explicit operator bool() const { return ok; }
};

// All opens whose local consistency radius is strictly below epsilon.
std::vector<int> epsilon_consistent_opens(const MetricSheaf& sheaf, const Assignment& a,
                                          double epsilon);

// Inclusion-maximal consistent opens; the empty open is suppressed whenever a
// nonempty member exists.
PartialCover maximal_consistent_collection(const MetricSheaf& sheaf, const Assignment& a,
                                           double epsilon);

CoarseningFiltration consistency_filtration(const MetricSheaf& sheaf, const Assignment& a);

InterleavingCheck check_interleaving(const CoarseningFiltration& F, const CoarseningFiltration& G,
                                     const InterleavingCandidate& candidate);

// Least epsilon among pure-shift identity-map candidates that passes
// check_interleaving; +inf when none does.  An upper bound for the
// interleaving distance, not the exact infimum.
double interleaving_upper_bound(const CoarseningFiltration& F, const CoarseningFiltration& G);

}  // namespace sheaflens
