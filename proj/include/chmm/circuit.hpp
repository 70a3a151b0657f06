#pragma once

#include <memory>

#include "chmm/graph.hpp"

namespace chmm {

// Full electrical solution on an augmented graph. Voltages and net currents
// cover all n + 2 nodes (battery and ground last); omega is the (n+2) x
// (n+2) resistance-distance matrix; currents is the n x n signed effective
// currents matrix restricted to the base nodes, with c(j, k) > 0 meaning
// flow from node k toward node j.
struct CircuitSolution {
  Vector v;
  Vector i_net;
  Matrix omega;
  Matrix currents;
  double v_battery = 1.0;
};

struct VoltageSolution {
  Vector v;
  Vector i_net;
};

// Directional decomposition of the currents matrix: pos carries flow when
// battery voltage is positive (toward ground), neg the reversed flow, and
// zero the uniform diffusion surrogate (off-diagonal ones).
struct DirectionalCurrents {
  Matrix pos;
  Matrix neg;
  Matrix zero;
};

// Moore-Penrose pseudoinverse of a graph Laplacian via symmetric
// eigendecomposition, dropping eigenvalues below 1e-10 * lambda_max. More
// than one dropped eigenvalue means the graph behind L is disconnected.
Matrix pseudoinverse(const Matrix& lap);

// Omega(j, k) = (e_j - e_k)' L+ (e_j - e_k).
Matrix resistance_distance(const Matrix& lap_pinv);

// Solve the partitioned system with battery fixed at v_battery and ground
// at 0; currents are zero at every non-terminal node.
VoltageSolution solve_voltages(const AugmentedGraph& ag, double v_battery);

// c(j, k) = (v_k - v_j) / Omega(j, k) over the augmented graph, then
// restricted to the leading n_base rows/columns.
Matrix currents_matrix(const Vector& v, const Matrix& omega, Index n_base);

DirectionalCurrents split_directions(const Matrix& currents);

// Full pipeline: voltages, augmented-graph resistance distances, currents.
CircuitSolution solve_circuit(const AugmentedGraph& ag, double v_battery = 1.0);

// Shared cache of unit-voltage solutions keyed by the augmented adjacency.
// Safe for concurrent readers with single-writer insertion.
class CircuitCache {
 public:
  std::shared_ptr<const CircuitSolution> get(const AugmentedGraph& ag);

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_ = std::make_shared<Impl>();
};

}  // namespace chmm
