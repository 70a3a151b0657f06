#pragma once

#include <cstdint>
#include <vector>

#include "chmm/transition.hpp"

namespace chmm {

// Weekly counts y and observation efforts t, both n_time x n_node. A cell
// with zero effort must have a zero count.
struct ObservationSet {
  Matrix y;
  Matrix t;

  Index n_time() const { return y.rows(); }
  Index n_node() const { return y.cols(); }
  void validate() const;
};

// Latent observation rates: strictly positive z over time x node plus the
// fixed initial state z0.
struct LatentPath {
  Matrix z;
  Vector z0;

  void validate() const;
};

struct ModelParams {
  std::vector<TransitionParams> thetas;  // one per time step
  double alpha = 1.0;

  void validate() const;
};

// Gamma(alpha, alpha / mu) log-density summed over nodes; shape-rate
// convention, so E[z] = mu.
double trans_logpdf(const Vector& z_next, const Vector& mean, double alpha);

// Poisson(z * t) log-pmf summed over nodes; zero-effort cells contribute
// exactly zero.
double obs_loglik(const Vector& y, const Vector& t, const Vector& z);

struct SimulationResult {
  LatentPath path;
  ObservationSet obs;
};

// Forward simulation: z_i = M_i z_{i-1} .* eps_i with eps ~ Gamma(alpha,
// alpha), then y_ij ~ Poisson(z_ij t_ij). Reproducible under a fixed seed.
SimulationResult simulate_path(const TransitionCache& transitions,
                               const ModelParams& params, const Matrix& efforts,
                               const Vector& z0, std::uint64_t seed);

// Zero out count and effort for floor(fraction * n_cells) uniformly random
// cells.
ObservationSet censor(const ObservationSet& obs, double fraction, std::uint64_t seed);

// Efforts drawn iid Exponential(rate); mean 1/rate hours.
Matrix simulate_efforts(Index n_time, Index n_node, double rate, std::uint64_t seed);

}  // namespace chmm
