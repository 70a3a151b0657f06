#pragma once

#include <memory>

#include "chmm/circuit.hpp"
#include "chmm/transition.hpp"

namespace chmm {

// Everything derived from a graph plus its terminal sets that the model
// needs: the unit-voltage circuit solution, the directional currents and
// the centroid distances. Immutable once built; chains and replicate
// workers share it read-only.
struct GraphArtifacts {
  SpatialGraph graph;
  AugmentedGraph augmented;
  std::shared_ptr<const CircuitSolution> solution;  // battery voltage 1
  DirectionalCurrents currents;
  Matrix distances;
  std::shared_ptr<const TransitionCache> transitions;
};

GraphArtifacts make_artifacts(const SpatialGraph& g,
                              const std::vector<std::string>& battery_attach,
                              const std::vector<std::string>& ground_attach,
                              double attach_conductance = 1.0);

}  // namespace chmm
