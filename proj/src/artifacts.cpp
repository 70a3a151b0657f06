#include "chmm/artifacts.hpp"

namespace chmm {

GraphArtifacts make_artifacts(const SpatialGraph& g,
                              const std::vector<std::string>& battery_attach,
                              const std::vector<std::string>& ground_attach,
                              double attach_conductance) {
  GraphArtifacts art{g,
                     augment(g, battery_attach, ground_attach, attach_conductance),
                     nullptr,
                     {},
                     distance_matrix(g),
                     nullptr};
  static CircuitCache cache;
  art.solution = cache.get(art.augmented);
  art.currents = split_directions(art.solution->currents);
  art.transitions = std::make_shared<TransitionCache>(art.currents, art.distances);
  return art;
}

}  // namespace chmm
