#include "chmm/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "chmm/errors.hpp"
#include "chmm/rng.hpp"

namespace chmm {

void ObservationSet::validate() const {
  if (y.rows() != t.rows() || y.cols() != t.cols()) {
    throw InvariantViolation("count and effort matrices have different shapes");
  }
  for (Index i = 0; i < y.rows(); ++i) {
    for (Index j = 0; j < y.cols(); ++j) {
      const double count = y(i, j);
      const double effort = t(i, j);
      if (count < 0.0 || count != std::floor(count)) {
        throw InvariantViolation("counts must be nonnegative integers");
      }
      if (effort < 0.0 || !std::isfinite(effort)) {
        throw InvariantViolation("efforts must be nonnegative and finite");
      }
      if (effort == 0.0 && count != 0.0) {
        throw InvariantViolation("cell with zero effort has a nonzero count");
      }
    }
  }
}

void LatentPath::validate() const {
  if (z0.size() != z.cols()) {
    throw InvariantViolation("z0 length does not match the node count");
  }
  if (!(z.array() > 0.0).all() || !(z0.array() > 0.0).all()) {
    throw InvariantViolation("latent rates must be strictly positive");
  }
}

void ModelParams::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw InvalidInput("alpha must be positive and finite");
  }
  for (const auto& theta : thetas) theta.validate();
}

double trans_logpdf(const Vector& z_next, const Vector& mean, double alpha) {
  if (z_next.size() != mean.size()) throw InvalidInput("trans_logpdf shape mismatch");
  if (!(alpha > 0.0)) throw InvalidInput("alpha must be positive");
  const double lg_alpha = std::lgamma(alpha);
  double total = 0.0;
  for (Index j = 0; j < z_next.size(); ++j) {
    const double mu = mean(j);
    const double z = z_next(j);
    if (!(mu > 0.0)) {
      throw DegenerateMean("transition mean is not strictly positive");
    }
    if (!(z > 0.0)) throw InvalidInput("latent rate must be strictly positive");
    const double rate = alpha / mu;
    total += alpha * std::log(rate) - lg_alpha + (alpha - 1.0) * std::log(z) - rate * z;
  }
  return total;
}

double obs_loglik(const Vector& y, const Vector& t, const Vector& z) {
  if (y.size() != t.size() || y.size() != z.size()) {
    throw InvalidInput("obs_loglik shape mismatch");
  }
  double total = 0.0;
  for (Index j = 0; j < y.size(); ++j) {
    if (t(j) == 0.0) {
      if (y(j) != 0.0) {
        throw InvariantViolation("cell with zero effort has a nonzero count");
      }
      continue;
    }
    if (!(z(j) > 0.0)) throw InvalidInput("latent rate must be strictly positive");
    const double mu = z(j) * t(j);
    total += y(j) * std::log(mu) - mu - std::lgamma(y(j) + 1.0);
  }
  return total;
}

SimulationResult simulate_path(const TransitionCache& transitions,
                               const ModelParams& params, const Matrix& efforts,
                               const Vector& z0, std::uint64_t seed) {
  const Index n_time = efforts.rows();
  const Index n_node = efforts.cols();
  if (static_cast<Index>(params.thetas.size()) != n_time) {
    throw InvalidInput("one TransitionParams per time step is required");
  }
  if (z0.size() != n_node || !(z0.array() > 0.0).all()) {
    throw InvalidInput("z0 must be a strictly positive vector over the nodes");
  }
  if ((efforts.array() < 0.0).any()) throw InvalidInput("efforts must be nonnegative");
  if (!(params.alpha > 0.0)) throw InvalidInput("alpha must be positive");

  Rng rng = make_rng(seed);
  std::gamma_distribution<double> noise(params.alpha, 1.0 / params.alpha);

  SimulationResult out;
  out.path.z0 = z0;
  out.path.z.resize(n_time, n_node);
  out.obs.y = Matrix::Zero(n_time, n_node);
  out.obs.t = efforts;

  Vector z_prev = z0;
  for (Index i = 0; i < n_time; ++i) {
    const Vector mu = transitions.apply(params.thetas[static_cast<std::size_t>(i)], z_prev);
    for (Index j = 0; j < n_node; ++j) {
      const double z = mu(j) * noise(rng);
      out.path.z(i, j) = z;
      const double exposure = z * efforts(i, j);
      if (exposure > 0.0) {
        std::poisson_distribution<long long> pois(exposure);
        out.obs.y(i, j) = static_cast<double>(pois(rng));
      }
    }
    z_prev = out.path.z.row(i).transpose();
  }
  out.path.validate();
  out.obs.validate();
  return out;
}

ObservationSet censor(const ObservationSet& obs, double fraction, std::uint64_t seed) {
  if (fraction < 0.0 || fraction >= 1.0) {
    throw InvalidInput("censoring fraction must lie in [0, 1)");
  }
  obs.validate();
  const Index n_cells = obs.y.size();
  const auto n_censor = static_cast<Index>(std::floor(fraction * static_cast<double>(n_cells)));

  std::vector<Index> cells(static_cast<std::size_t>(n_cells));
  std::iota(cells.begin(), cells.end(), Index{0});
  Rng rng = make_rng(seed);
  std::shuffle(cells.begin(), cells.end(), rng);

  ObservationSet out = obs;
  for (Index c = 0; c < n_censor; ++c) {
    const Index cell = cells[static_cast<std::size_t>(c)];
    const Index i = cell / obs.n_node();
    const Index j = cell % obs.n_node();
    out.y(i, j) = 0.0;
    out.t(i, j) = 0.0;
  }
  return out;
}

Matrix simulate_efforts(Index n_time, Index n_node, double rate, std::uint64_t seed) {
  if (!(rate > 0.0)) throw InvalidInput("effort rate must be positive");
  Rng rng = make_rng(seed);
  std::exponential_distribution<double> dist(rate);
  Matrix t(n_time, n_node);
  for (Index i = 0; i < n_time; ++i) {
    for (Index j = 0; j < n_node; ++j) t(i, j) = dist(rng);
  }
  return t;
}

}  // namespace chmm
