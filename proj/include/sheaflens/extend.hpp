#pragma once

#include "sheaflens/metricsheaf.hpp"

namespace sheaflens {

enum class ExtendObjective { linf, l2 };

struct ExtendOptions {
  ExtendObjective objective = ExtendObjective::linf;
  double tolerance = 1e-6;
  long iteration_budget = 100000;  // total across starts
  int random_starts = 8;
  unsigned seed = 0x5eaf1e45u;
  int threads = 1;
};

struct ExtendDiagnostics {
  long iterations = 0;
  int starts = 0;
  double final_step = 0.0;
  bool refined = false;          // 1-d epigraph refinement ran
  double internal_value = 0.0;   // solver's own view, advisory only
};

struct ExtensionResult {
  Assignment assignment;     // total, support values untouched
  double achieved_radius;    // recomputed consistency_radius, never trusted
  double achieved_objective; // recomputed with the requested aggregator
  ExtendDiagnostics diagnostics;
};

// Fills the unsupported opens so the recomputed consistency radius is as
// small as the solver can certify.  For all-Euclidean sheaves with the linf
// objective the problem is a max of convex terms.
ExtensionResult extend_minimize(const MetricSheaf& sheaf, const Assignment& partial,
                                const ExtendOptions& options = {});

double partial_consistency(const MetricSheaf& sheaf, const Assignment& partial,
                           const ExtendOptions& options = {});

}  // namespace sheaflens
