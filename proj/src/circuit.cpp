#include "chmm/circuit.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstring>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include "chmm/errors.hpp"

namespace chmm {

Matrix pseudoinverse(const Matrix& lap) {
  if (lap.rows() != lap.cols()) throw InvalidInput("Laplacian must be square");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(lap);
  if (eig.info() != Eigen::Success) {
    throw IllConditioned("eigendecomposition of the Laplacian failed");
  }
  const Vector& values = eig.eigenvalues();
  const double lambda_max = values.cwiseAbs().maxCoeff();
  const double cutoff = 1e-10 * std::max(lambda_max, 1.0);
  Vector inv = Vector::Zero(values.size());
  Index dropped = 0;
  for (Index j = 0; j < values.size(); ++j) {
    if (values(j) > cutoff) {
      inv(j) = 1.0 / values(j);
    } else {
      ++dropped;
    }
  }
  if (dropped > 1) {
    throw IllConditioned("Laplacian has a null space of dimension " +
                         std::to_string(dropped) + "; graph is disconnected");
  }
  Matrix pinv = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
  // Symmetrize so that downstream resistance distances are exactly
  // symmetric and the currents matrix is exactly skew-symmetric.
  pinv = ((pinv + pinv.transpose()) * 0.5).eval();
  return pinv;
}

Matrix resistance_distance(const Matrix& lap_pinv) {
  const Index n = lap_pinv.rows();
  Matrix omega(n, n);
  for (Index j = 0; j < n; ++j) {
    omega(j, j) = 0.0;
    for (Index k = j + 1; k < n; ++k) {
      const double w = lap_pinv(j, j) + lap_pinv(k, k) - 2.0 * lap_pinv(j, k);
      omega(j, k) = w;
      omega(k, j) = w;
    }
  }
  return omega;
}

VoltageSolution solve_voltages(const AugmentedGraph& ag, double v_battery) {
  const Index n = ag.base.n();
  const Matrix lap = laplacian(ag.a_star);

  // Unknown block: the base nodes; known: battery (v_battery) and ground (0).
  const Matrix l22 = lap.topLeftCorner(n, n);
  const Matrix l21 = lap.topRightCorner(n, 2);
  Eigen::Vector2d v_known(v_battery, 0.0);

  Eigen::LDLT<Matrix> solver(l22);
  if (solver.info() != Eigen::Success) {
    throw SolveFailed("factorization of the reduced Laplacian failed");
  }
  const Vector rhs = -(l21 * v_known);
  const Vector v_unknown = solver.solve(rhs);
  const double residual = (l22 * v_unknown - rhs).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, rhs.cwiseAbs().maxCoeff());
  if (!v_unknown.allFinite() || residual > 1e-8 * scale) {
    throw SolveFailed("reduced Laplacian system is singular");
  }

  Vector v(n + 2);
  v.head(n) = v_unknown;
  v(n) = v_battery;
  v(n + 1) = 0.0;
  Vector i_net = lap * v;
  return VoltageSolution{std::move(v), std::move(i_net)};
}

Matrix currents_matrix(const Vector& v, const Matrix& omega, Index n_base) {
  if (v.size() != omega.rows() || omega.rows() != omega.cols()) {
    throw InvalidInput("voltage vector and resistance matrix sizes disagree");
  }
  if (n_base > v.size()) throw InvalidInput("base node count exceeds solution size");
  Matrix currents = Matrix::Zero(n_base, n_base);
  for (Index j = 0; j < n_base; ++j) {
    for (Index k = j + 1; k < n_base; ++k) {
      const double c = (v(k) - v(j)) / omega(j, k);
      currents(j, k) = c;
      currents(k, j) = -c;
    }
  }
  return currents;
}

DirectionalCurrents split_directions(const Matrix& currents) {
  const Index n = currents.rows();
  DirectionalCurrents dc;
  dc.pos = currents.cwiseMax(0.0);
  dc.neg = currents.transpose().cwiseMax(0.0);
  dc.zero = Matrix::Ones(n, n);
  dc.zero.diagonal().setZero();
  dc.pos.diagonal().setZero();
  dc.neg.diagonal().setZero();
  return dc;
}

namespace {

void validate_solution(const AugmentedGraph& ag, const CircuitSolution& sol) {
  const Index n = ag.base.n();
  const double vmax = std::abs(sol.v_battery);
  for (Index j = 0; j < n; ++j) {
    const double lo = std::min(0.0, sol.v_battery) - 1e-9 * std::max(1.0, vmax);
    const double hi = std::max(0.0, sol.v_battery) + 1e-9 * std::max(1.0, vmax);
    if (sol.v(j) < lo || sol.v(j) > hi) {
      throw SolveFailed("voltage outside the terminal range at a base node");
    }
  }
  const double current_scale = std::max(1.0, std::abs(sol.i_net(n)));
  for (Index j = 0; j < n; ++j) {
    if (std::abs(sol.i_net(j)) > 1e-8 * current_scale) {
      throw SolveFailed("Kirchhoff's current law violated at a non-terminal node");
    }
  }
  if (std::abs(sol.i_net(n) + sol.i_net(n + 1)) > 1e-8 * current_scale) {
    throw SolveFailed("battery and ground currents do not balance");
  }
}

}  // namespace

CircuitSolution solve_circuit(const AugmentedGraph& ag, double v_battery) {
  const Matrix lap = laplacian(ag.a_star);
  const Matrix pinv = pseudoinverse(lap);

  CircuitSolution sol;
  sol.v_battery = v_battery;
  VoltageSolution voltages = solve_voltages(ag, v_battery);
  sol.v = std::move(voltages.v);
  sol.i_net = std::move(voltages.i_net);
  sol.omega = resistance_distance(pinv);
  sol.currents = currents_matrix(sol.v, sol.omega, ag.base.n());
  validate_solution(ag, sol);
  return sol;
}

struct CircuitCache::Impl {
  std::shared_mutex mutex;
  std::unordered_map<std::string, std::shared_ptr<const CircuitSolution>> entries;
};

namespace {

std::string cache_key(const AugmentedGraph& ag) {
  // The augmented adjacency fully determines the unit-voltage solution.
  std::string key;
  const Matrix& a = ag.a_star;
  key.resize(static_cast<std::size_t>(a.size()) * sizeof(double));
  std::memcpy(key.data(), a.data(), key.size());
  return key;
}

}  // namespace

std::shared_ptr<const CircuitSolution> CircuitCache::get(const AugmentedGraph& ag) {
  const std::string key = cache_key(ag);
  {
    std::shared_lock lock(impl_->mutex);
    auto it = impl_->entries.find(key);
    if (it != impl_->entries.end()) return it->second;
  }
  auto solution = std::make_shared<const CircuitSolution>(solve_circuit(ag, 1.0));
  std::unique_lock lock(impl_->mutex);
  auto [it, inserted] = impl_->entries.emplace(key, std::move(solution));
  return it->second;
}

}  // namespace chmm
