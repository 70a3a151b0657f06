#pragma once

#include <Eigen/Dense>

#include <array>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace chmm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

struct NodeSpec {
  std::string id;
  double x = 0.0;
  double y = 0.0;
};

struct EdgeSpec {
  std::string a;
  std::string b;
  double conductance = 1.0;
};

// Immutable spatial graph: node identifiers, planar centroids, and a
// symmetric nonnegative adjacency matrix whose entries are edge
// conductances (1 for an unweighted graph). Always connected.
class SpatialGraph {
 public:
  SpatialGraph(std::vector<std::string> ids,
               std::vector<std::array<double, 2>> centroids, Matrix adjacency);

  Index n() const { return static_cast<Index>(ids_.size()); }
  const std::vector<std::string>& node_ids() const { return ids_; }
  const Matrix& adjacency() const { return adj_; }
  const std::array<double, 2>& centroid(Index j) const { return centroids_[static_cast<std::size_t>(j)]; }
  const std::vector<std::array<double, 2>>& centroids() const { return centroids_; }

  bool has_node(std::string_view id) const;
  Index index_of(std::string_view id) const;  // throws UnknownNode

  // y-coordinates; the north/south axis used as the latitude proxy.
  Vector latitudes() const;

  Index edge_count() const;

 private:
  std::vector<std::string> ids_;
  std::vector<std::array<double, 2>> centroids_;
  Matrix adj_;
  std::unordered_map<std::string, Index> index_;
};

// Base graph plus two synthetic terminals: a battery node at index n and a
// ground node at index n + 1, each attached to its terminal set by edges of
// `attach_conductance`.
struct AugmentedGraph {
  SpatialGraph base;
  std::vector<Index> battery_attach;
  std::vector<Index> ground_attach;
  Matrix a_star;
  double attach_conductance = 1.0;

  Index n_total() const { return base.n() + 2; }
  Index battery_index() const { return base.n(); }
  Index ground_index() const { return base.n() + 1; }
};

SpatialGraph build_graph(const std::vector<NodeSpec>& nodes,
                         const std::vector<EdgeSpec>& edges);

// Rook-adjacency rectangular lattice with unit conductances. Node (r, c)
// has id "r{r}c{c}" and centroid (x = c, y = r); larger y is "north".
SpatialGraph lattice(int rows, int cols);

// L = diag(A 1) - A. Input must be symmetric with zero diagonal.
Matrix laplacian(const Matrix& adjacency);

AugmentedGraph augment(const SpatialGraph& g,
                       const std::vector<std::string>& battery_attach,
                       const std::vector<std::string>& ground_attach,
                       double attach_conductance = 1.0);

// Pairwise Euclidean centroid distances; throws CoincidentCentroids if two
// nodes share a centroid (zero distances would poison the transition
// matrix's distance weighting).
Matrix distance_matrix(const SpatialGraph& g);

}  // namespace chmm
