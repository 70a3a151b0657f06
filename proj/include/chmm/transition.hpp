#pragma once

#include <list>
#include <memory>
#include <shared_mutex>
#include <unordered_map>

#include "chmm/circuit.hpp"

namespace chmm {

// Per-time-step transition parameters. q selects the flow direction
// (+1 toward ground, -1 toward battery, 0 diffusion); rho is the distance
// decay exponent; nu weights flow and delta self-transmission.
struct TransitionParams {
  int q = 0;
  double rho = 1.0;
  double nu = 0.5;
  double delta = 0.5;

  // Throws InvalidInput unless q is in {-1, 0, 1} and rho, nu, delta > 0.
  void validate() const;

  // Limiting cases (nu = 0, delta = 0, rho = 0) used in tests only; skips
  // positivity validation.
  static TransitionParams unchecked(int q, double rho, double nu, double delta);
};

// Elementwise numerator / denominator with 0/0 = 0. A nonzero numerator
// over a zero denominator signals an internal inconsistency upstream.
Matrix safe_divide(const Matrix& numerator, const Matrix& denominator);

// Rescale columns to unit sums; all-zero columns stay all-zero.
Matrix scale_col(const Matrix& m);

// Elementwise distance powers with the diagonal left at zero.
Matrix distance_power(const Matrix& distances, double rho);

// M = nu * scaleCol(C^dir ./ D^rho) + delta * I with C^dir selected by q.
Matrix build_transition(const TransitionParams& params, const DirectionalCurrents& dc,
                        const Matrix& distances);

// Caches scaleCol(C^dir ./ D^rho) per (q, rho) so that repeated proposals
// at the same parameters skip the elementwise power. Values are identical
// to the uncached construction.
class TransitionCache {
 public:
  TransitionCache(const DirectionalCurrents& dc, Matrix distances,
                  std::size_t capacity = 32);

  std::shared_ptr<const Matrix> scaled_flow(int q, double rho) const;

  // mu = M z without materializing M.
  Vector apply(const TransitionParams& params, const Vector& z) const;
  // M' w (used by gradient computations).
  Vector apply_transpose(const TransitionParams& params, const Vector& w) const;
  Matrix materialize(const TransitionParams& params) const;

  Index n() const { return distances_.rows(); }
  const Matrix& distances() const { return distances_; }
  const DirectionalCurrents& directions() const { return dc_; }

 private:
  struct Key {
    int q;
    double rho;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const;
  };

  DirectionalCurrents dc_;
  Matrix distances_;
  Matrix log_distances_;
  std::size_t capacity_;

  mutable std::shared_mutex mutex_;
  mutable std::unordered_map<Key, std::shared_ptr<const Matrix>, KeyHash> cache_;
  mutable std::list<Key> order_;  // most recent first
};

}  // namespace chmm
