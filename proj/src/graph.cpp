#include "chmm/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

#include "chmm/errors.hpp"

namespace chmm {

namespace {

void check_connected(const Matrix& adj) {
  const Index n = adj.rows();
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  std::vector<Index> stack{0};
  seen[0] = 1;
  Index count = 1;
  while (!stack.empty()) {
    const Index u = stack.back();
    stack.pop_back();
    for (Index v = 0; v < n; ++v) {
      if (adj(u, v) > 0.0 && !seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  if (count != n) {
    throw DisconnectedGraph("graph has more than one connected component");
  }
}

}  // namespace

SpatialGraph::SpatialGraph(std::vector<std::string> ids,
                           std::vector<std::array<double, 2>> centroids,
                           Matrix adjacency)
    : ids_(std::move(ids)), centroids_(std::move(centroids)), adj_(std::move(adjacency)) {
  const Index n = static_cast<Index>(ids_.size());
  if (n < 2) {
    throw InvalidInput("a spatial graph needs at least 2 nodes");
  }
  if (static_cast<Index>(centroids_.size()) != n || adj_.rows() != n || adj_.cols() != n) {
    throw InvalidInput("node ids, centroids and adjacency sizes disagree");
  }
  for (Index j = 0; j < n; ++j) {
    if (adj_(j, j) != 0.0) {
      throw InvalidInput("adjacency diagonal must be zero (no self edges)");
    }
    for (Index k = 0; k < n; ++k) {
      if (adj_(j, k) < 0.0) {
        throw NonpositiveConductance("adjacency entries must be nonnegative");
      }
      if (adj_(j, k) != adj_(k, j)) {
        throw InvalidInput("adjacency must be symmetric");
      }
    }
  }
  for (std::size_t j = 0; j < ids_.size(); ++j) {
    if (!index_.emplace(ids_[j], static_cast<Index>(j)).second) {
      throw InvalidInput("duplicate node id: " + ids_[j]);
    }
  }
  check_connected(adj_);
}

bool SpatialGraph::has_node(std::string_view id) const {
  return index_.find(std::string(id)) != index_.end();
}

Index SpatialGraph::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) {
    throw UnknownNode("unknown node id: " + std::string(id));
  }
  return it->second;
}

Vector SpatialGraph::latitudes() const {
  Vector lat(n());
  for (Index j = 0; j < n(); ++j) lat(j) = centroids_[static_cast<std::size_t>(j)][1];
  return lat;
}

Index SpatialGraph::edge_count() const {
  Index count = 0;
  for (Index j = 0; j < n(); ++j) {
    for (Index k = j + 1; k < n(); ++k) {
      if (adj_(j, k) > 0.0) ++count;
    }
  }
  return count;
}

SpatialGraph build_graph(const std::vector<NodeSpec>& nodes,
                         const std::vector<EdgeSpec>& edges) {
  if (nodes.size() < 2) {
    throw InvalidInput("a spatial graph needs at least 2 nodes");
  }
  std::vector<std::string> ids;
  std::vector<std::array<double, 2>> centroids;
  std::unordered_map<std::string, Index> index;
  ids.reserve(nodes.size());
  centroids.reserve(nodes.size());
  for (const auto& node : nodes) {
    if (!index.emplace(node.id, static_cast<Index>(ids.size())).second) {
      throw InvalidInput("duplicate node id: " + node.id);
    }
    ids.push_back(node.id);
    centroids.push_back({node.x, node.y});
  }

  const Index n = static_cast<Index>(ids.size());
  Matrix adj = Matrix::Zero(n, n);
  std::set<std::pair<Index, Index>> seen;
  for (const auto& edge : edges) {
    auto ia = index.find(edge.a);
    auto ib = index.find(edge.b);
    if (ia == index.end()) throw UnknownNode("edge references unknown node: " + edge.a);
    if (ib == index.end()) throw UnknownNode("edge references unknown node: " + edge.b);
    if (edge.conductance <= 0.0) {
      throw NonpositiveConductance("edge " + edge.a + "-" + edge.b +
                                   " has nonpositive conductance");
    }
    const Index a = ia->second;
    const Index b = ib->second;
    if (a == b) {
      throw InvalidInput("self edge on node " + edge.a);
    }
    auto key = std::minmax(a, b);
    if (!seen.insert({key.first, key.second}).second) {
      throw DuplicateEdge("duplicate undirected edge " + edge.a + "-" + edge.b);
    }
    adj(a, b) = edge.conductance;
    adj(b, a) = edge.conductance;
  }
  return SpatialGraph(std::move(ids), std::move(centroids), std::move(adj));
}

SpatialGraph lattice(int rows, int cols) {
  if (rows < 1 || cols < 1 || static_cast<long>(rows) * cols < 2) {
    throw InvalidInput("lattice needs rows >= 1, cols >= 1 and at least 2 nodes");
  }
  std::vector<NodeSpec> nodes;
  std::vector<EdgeSpec> edges;
  nodes.reserve(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  auto id = [](int r, int c) {
    return "r" + std::to_string(r) + "c" + std::to_string(c);
  };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      nodes.push_back({id(r, c), static_cast<double>(c), static_cast<double>(r)});
      if (c + 1 < cols) edges.push_back({id(r, c), id(r, c + 1), 1.0});
      if (r + 1 < rows) edges.push_back({id(r, c), id(r + 1, c), 1.0});
    }
  }
  return build_graph(nodes, edges);
}

Matrix laplacian(const Matrix& adjacency) {
  const Index n = adjacency.rows();
  if (adjacency.cols() != n) throw InvalidInput("adjacency must be square");
  const double scale = std::max(1.0, adjacency.cwiseAbs().maxCoeff());
  for (Index j = 0; j < n; ++j) {
    if (std::abs(adjacency(j, j)) > 1e-12 * scale) {
      throw InvalidInput("adjacency diagonal must be zero");
    }
    for (Index k = j + 1; k < n; ++k) {
      if (std::abs(adjacency(j, k) - adjacency(k, j)) > 1e-12 * scale) {
        throw InvalidInput("adjacency must be symmetric");
      }
      if (adjacency(j, k) < 0.0) {
        throw InvalidInput("adjacency entries must be nonnegative");
      }
    }
  }
  Matrix lap = -adjacency;
  const Vector degree = adjacency.rowwise().sum();
  lap.diagonal() = degree;
  return lap;
}

AugmentedGraph augment(const SpatialGraph& g,
                       const std::vector<std::string>& battery_attach,
                       const std::vector<std::string>& ground_attach,
                       double attach_conductance) {
  if (battery_attach.empty() || ground_attach.empty()) {
    throw EmptyTerminalSet("battery and ground attachment sets must be non-empty");
  }
  if (attach_conductance <= 0.0) {
    throw NonpositiveConductance("terminal attachment conductance must be positive");
  }
  std::vector<Index> battery;
  std::vector<Index> ground;
  std::set<Index> battery_set;
  for (const auto& id : battery_attach) {
    const Index j = g.index_of(id);
    if (!battery_set.insert(j).second) {
      throw InvalidInput("node listed twice in battery set: " + id);
    }
    battery.push_back(j);
  }
  std::set<Index> ground_set;
  for (const auto& id : ground_attach) {
    const Index j = g.index_of(id);
    if (!ground_set.insert(j).second) {
      throw InvalidInput("node listed twice in ground set: " + id);
    }
    if (battery_set.count(j)) {
      throw OverlappingTerminals("node attached to both battery and ground: " + id);
    }
    ground.push_back(j);
  }

  const Index n = g.n();
  Matrix a_star = Matrix::Zero(n + 2, n + 2);
  a_star.topLeftCorner(n, n) = g.adjacency();
  for (Index j : battery) {
    a_star(j, n) = attach_conductance;
    a_star(n, j) = attach_conductance;
  }
  for (Index j : ground) {
    a_star(j, n + 1) = attach_conductance;
    a_star(n + 1, j) = attach_conductance;
  }
  return AugmentedGraph{g, std::move(battery), std::move(ground), std::move(a_star),
                        attach_conductance};
}

Matrix distance_matrix(const SpatialGraph& g) {
  const Index n = g.n();
  Matrix dist = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    const auto& pj = g.centroid(j);
    for (Index k = j + 1; k < n; ++k) {
      const auto& pk = g.centroid(k);
      const double d = std::hypot(pj[0] - pk[0], pj[1] - pk[1]);
      if (d <= 0.0) {
        throw CoincidentCentroids("nodes " + g.node_ids()[static_cast<std::size_t>(j)] +
                                  " and " + g.node_ids()[static_cast<std::size_t>(k)] +
                                  " share a centroid");
      }
      dist(j, k) = d;
      dist(k, j) = d;
    }
  }
  return dist;
}

}  // namespace chmm
