#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "chmm/artifacts.hpp"
#include "chmm/hmm.hpp"

namespace chmm {

struct GammaPrior {
  double shape = 1.0;
  double rate = 1.0;

  double mean() const { return shape / rate; }
  double log_pdf(double x) const;
};

// How the fixed initial latent state z_0 is chosen.
struct Z0Spec {
  enum class Policy { Ones, Empirical, Explicit };
  Policy policy = Policy::Ones;
  Vector values;  // Explicit only
  // Empirical: z0_j = (sum of counts over the first window weeks + count_shrink)
  //                 / (sum of efforts + effort_shrink).
  double count_shrink = 0.5;
  double effort_shrink = 1.0;
  int window_weeks = 4;
};

struct PriorSpec {
  GammaPrior alpha{1.0, 0.5};
  GammaPrior rho{3.0, 1.5};
  GammaPrior nu{3.0, 6.0};
  GammaPrior delta{3.0, 6.0};
  double p_plus = 0.25;
  double p_zero = 0.5;
  double p_minus = 0.25;
  std::optional<double> alpha_fixed;
  Z0Spec z0;

  void validate() const;
};

struct SamplerConfig {
  int n_iterations = 12000;
  int burn_in = 2000;
  int thin = 1;
  double mala_step = 0.1;   // initial per-time-index step, adapted in burn-in
  int adapt_window = 500;   // theta covariance window
  double adapt_target = 0.3;  // theta acceptance target
  std::uint64_t seed = 1;

  void validate() const;
  Index n_kept() const { return (n_iterations - burn_in) / thin; }
};

struct PosteriorSamples {
  Index n_time = 0;
  Index n_node = 0;
  std::vector<std::string> node_ids;

  std::vector<Matrix> z;  // kept draws, each n_time x n_node
  Matrix q;               // kept x n_time
  Matrix rho;
  Matrix nu;
  Matrix delta;
  Vector alpha;           // kept

  Vector z_accept;      // per time index, post-burn-in acceptance rate
  Vector theta_accept;  // per time index
  double alpha_accept = 0.0;
  Vector mala_step;     // adapted step sizes after burn-in
  Vector theta_scale;   // adapted proposal log-scales after burn-in
  long nonfinite_rejects = 0;
  std::uint64_t seed = 0;

  Index n_kept() const { return static_cast<Index>(z.size()); }
};

struct TargetEval {
  double value = 0.0;
  Vector grad;
};

// Full conditional of z_i (log density and gradient): observation term,
// Gamma transition from z_{i-1}, and, when present, the Gamma transition
// into z_next whose mean depends on z_i through m_next.
TargetEval log_target_z(const Vector& z_i, const Vector& y_i, const Vector& t_i,
                        const Vector& z_prev, const Vector* z_next,
                        const Matrix& m_i, const Matrix* m_next, double alpha);

struct Draw {
  int iteration;
  const std::vector<Vector>& z;
  const std::vector<TransitionParams>& thetas;
  double alpha;
};
using DrawSink = std::function<void(const Draw&)>;
using ProgressFn = std::function<void(int iteration, int total)>;

// One MCMC chain over the latent path and transition parameters. The sweep
// visits each time index in order (MALA update of z_i, exact categorical
// update of q_i, adaptive-Metropolis update of (rho, nu, delta)_i) and then
// updates alpha unless it is fixed. Proposal scales adapt during burn-in
// only and are frozen afterwards.
class Chain {
 public:
  struct Options {
    // Test hooks. Dropping the observation term samples the prior-
    // predictive joint; likelihood_scale = 0 makes the theta/q/alpha
    // blocks target their priors exactly.
    bool include_observation_term = true;
    double likelihood_scale = 1.0;
  };

  Chain(const ObservationSet& obs, const GraphArtifacts& artifacts,
        PriorSpec priors, SamplerConfig config, Options options = {});
  ~Chain();
  Chain(const Chain&) = delete;
  Chain& operator=(const Chain&) = delete;

  PosteriorSamples run(const DrawSink& sink = {}, const ProgressFn& progress = {});

  // One full sweep, with burn-in adaptation and iteration bookkeeping.
  void sweep();

  // Individual block updates; no adaptation, no bookkeeping.
  bool mala_update_z(Index i);
  int update_q(Index i);
  bool update_theta(Index i);
  bool update_alpha();

  Index n_time() const;
  Index n_node() const;
  int iteration() const;

  const Vector& z(Index i) const;
  void set_z(Index i, Vector value);
  const Vector& z0() const;
  const TransitionParams& theta(Index i) const;
  void set_theta(Index i, const TransitionParams& params);
  double alpha() const;
  void set_alpha(double a);
  double mala_step(Index i) const;
  void set_mala_step(Index i, double step);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

PosteriorSamples run_chain(const ObservationSet& obs, const GraphArtifacts& artifacts,
                           const PriorSpec& priors, const SamplerConfig& config,
                           const DrawSink& sink = {}, const ProgressFn& progress = {});

// z0 resolution used by Chain and exposed for the CLI/tests.
Vector resolve_z0(const Z0Spec& spec, const ObservationSet& obs);

}  // namespace chmm
