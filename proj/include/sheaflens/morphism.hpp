#pragma once

#include <map>
#include <memory>

#include "sheaflens/metricsheaf.hpp"

namespace sheaflens {

// A morphism of sheaves along a continuous base map f: X -> Y.  Components
// m_U map the source stalk over f^{-1}(U) into the target stalk over U, one
// per codomain open, and every restriction square must commute.
struct SheafMorphism {
  std::shared_ptr<const MetricSheaf> source;  // sheaf on X
  std::shared_ptr<const MetricSheaf> target;  // sheaf on Y
  PointMap base;                              // X -> Y
  std::vector<RestrictionMap> components;     // by codomain open id
  std::vector<int> preimage_open;             // codomain open id -> domain open id
  double component_lipschitz = 0.0;           // max over components

  static SheafMorphism identity(std::shared_ptr<const MetricSheaf> sheaf);
};

SheafMorphism build_morphism(std::shared_ptr<const MetricSheaf> source,
                             std::shared_ptr<const MetricSheaf> target, PointMap base,
                             const std::map<int, MapBody>& components, double tol = 1e-9);

// b(V) = m_V(a(f^{-1}(V))).
Assignment pushforward_assignment(const SheafMorphism& m, const Assignment& a);

// True iff b agrees with the pushforward of a within tol on every open.
bool validate_shva(const SheafMorphism& m, const Assignment& a, const Assignment& b, double tol);

// (n . m)_U = n_U . m_{g^{-1}(U)}.
SheafMorphism compose_morphisms(const SheafMorphism& n, const SheafMorphism& m);

}  // namespace sheaflens
