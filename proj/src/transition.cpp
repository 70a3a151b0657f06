#include "chmm/transition.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "chmm/errors.hpp"

namespace chmm {

void TransitionParams::validate() const {
  if (q != -1 && q != 0 && q != 1) {
    throw InvalidInput("direction flag q must be -1, 0 or 1");
  }
  if (!(rho > 0.0) || !(nu > 0.0) || !(delta > 0.0)) {
    throw InvalidInput("rho, nu and delta must be positive");
  }
  if (!std::isfinite(rho) || !std::isfinite(nu) || !std::isfinite(delta)) {
    throw InvalidInput("transition parameters must be finite");
  }
}

TransitionParams TransitionParams::unchecked(int q, double rho, double nu,
                                             double delta) {
  TransitionParams p;
  p.q = q;
  p.rho = rho;
  p.nu = nu;
  p.delta = delta;
  return p;
}

Matrix safe_divide(const Matrix& numerator, const Matrix& denominator) {
  if (numerator.rows() != denominator.rows() || numerator.cols() != denominator.cols()) {
    throw InvalidInput("safe_divide shape mismatch");
  }
  Matrix out(numerator.rows(), numerator.cols());
  for (Index j = 0; j < numerator.rows(); ++j) {
    for (Index k = 0; k < numerator.cols(); ++k) {
      const double num = numerator(j, k);
      const double den = denominator(j, k);
      if (den == 0.0) {
        if (num != 0.0) {
          throw DivideByZero("nonzero numerator over zero denominator at (" +
                             std::to_string(j) + ", " + std::to_string(k) + ")");
        }
        out(j, k) = 0.0;
      } else {
        out(j, k) = num / den;
      }
    }
  }
  return out;
}

Matrix scale_col(const Matrix& m) {
  if ((m.array() < 0.0).any()) {
    throw InvalidInput("scale_col requires a nonnegative matrix");
  }
  Matrix out = m;
  for (Index k = 0; k < m.cols(); ++k) {
    const double sum = m.col(k).sum();
    if (sum > 0.0) out.col(k) /= sum;
  }
  return out;
}

Matrix distance_power(const Matrix& distances, double rho) {
  const Index n = distances.rows();
  Matrix out(n, n);
  // exp(rho * log d) rather than pow so the cached path below is
  // bit-identical to this one.
  for (Index j = 0; j < n; ++j) {
    for (Index k = 0; k < n; ++k) {
      out(j, k) = (j == k) ? 0.0 : std::exp(rho * std::log(distances(j, k)));
    }
  }
  return out;
}

namespace {

const Matrix& select_direction(const DirectionalCurrents& dc, int q) {
  if (q > 0) return dc.pos;
  if (q < 0) return dc.neg;
  return dc.zero;
}

}  // namespace

Matrix build_transition(const TransitionParams& params, const DirectionalCurrents& dc,
                        const Matrix& distances) {
  const Index n = distances.rows();
  const Matrix& numerator = select_direction(dc, params.q);
  if (numerator.rows() != n || numerator.cols() != n || distances.cols() != n) {
    throw InvalidInput("directional currents and distances shapes disagree");
  }
  Matrix m = scale_col(safe_divide(numerator, distance_power(distances, params.rho)));
  m *= params.nu;
  m.diagonal().array() += params.delta;
  return m;
}

std::size_t TransitionCache::KeyHash::operator()(const Key& k) const {
  const std::size_t h1 = std::hash<int>{}(k.q);
  const std::size_t h2 = std::hash<double>{}(k.rho);
  return h1 ^ (h2 + 0x9e3779b97f4a7c15ULL + (h1 << 6) + (h1 >> 2));
}

TransitionCache::TransitionCache(const DirectionalCurrents& dc, Matrix distances,
                                 std::size_t capacity)
    : dc_(dc), distances_(std::move(distances)), capacity_(std::max<std::size_t>(capacity, 4)) {
  const Index n = distances_.rows();
  if (dc_.pos.rows() != n || dc_.neg.rows() != n || dc_.zero.rows() != n) {
    throw InvalidInput("directional currents and distances shapes disagree");
  }
  log_distances_ = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index k = 0; k < n; ++k) {
      if (j != k) log_distances_(j, k) = std::log(distances_(j, k));
    }
  }
}

std::shared_ptr<const Matrix> TransitionCache::scaled_flow(int q, double rho) const {
  const Key key{q, rho};
  {
    std::shared_lock lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }

  const Index n = distances_.rows();
  const Matrix& numerator = select_direction(dc_, q);
  Matrix flow(n, n);
  for (Index k = 0; k < n; ++k) {
    for (Index j = 0; j < n; ++j) {
      flow(j, k) = (j == k) ? 0.0
                            : numerator(j, k) / std::exp(rho * log_distances_(j, k));
    }
    const double sum = flow.col(k).sum();
    if (sum > 0.0) flow.col(k) /= sum;
  }
  auto entry = std::make_shared<const Matrix>(std::move(flow));

  std::unique_lock lock(mutex_);
  auto [it, inserted] = cache_.emplace(key, entry);
  if (inserted) {
    order_.push_front(key);
    if (cache_.size() > capacity_) {
      cache_.erase(order_.back());
      order_.pop_back();
    }
  }
  return it->second;
}

Vector TransitionCache::apply(const TransitionParams& params, const Vector& z) const {
  auto flow = scaled_flow(params.q, params.rho);
  return params.nu * (*flow * z) + params.delta * z;
}

Vector TransitionCache::apply_transpose(const TransitionParams& params,
                                        const Vector& w) const {
  auto flow = scaled_flow(params.q, params.rho);
  return params.nu * (flow->transpose() * w) + params.delta * w;
}

Matrix TransitionCache::materialize(const TransitionParams& params) const {
  auto flow = scaled_flow(params.q, params.rho);
  Matrix m = params.nu * (*flow);
  m.diagonal().array() += params.delta;
  return m;
}

}  // namespace chmm
