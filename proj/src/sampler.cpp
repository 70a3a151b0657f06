#include "chmm/sampler.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "chmm/errors.hpp"
#include "chmm/rng.hpp"

namespace chmm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kMalaTarget = 0.574;
constexpr double kAlphaTarget = 0.44;
constexpr double kLogBound = 50.0;  // reject proposals beyond exp(+-50)

double adapt_gain(int iteration) {
  return 3.0 * std::pow(static_cast<double>(iteration) + 30.0, -0.7);
}

}  // namespace

double GammaPrior::log_pdf(double x) const {
  if (!(x > 0.0)) return kNegInf;
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) -
         rate * x;
}

void PriorSpec::validate() const {
  auto check = [](const GammaPrior& p, const char* name) {
    if (!(p.shape > 0.0) || !(p.rate > 0.0)) {
      throw InvalidConfig(std::string("prior for ") + name +
                          " needs positive shape and rate");
    }
  };
  check(alpha, "alpha");
  check(rho, "rho");
  check(nu, "nu");
  check(delta, "delta");
  if (p_plus < 0.0 || p_zero < 0.0 || p_minus < 0.0 ||
      std::abs(p_plus + p_zero + p_minus - 1.0) > 1e-12) {
    throw InvalidConfig("direction probabilities must be nonnegative and sum to 1");
  }
  if (alpha_fixed && !(*alpha_fixed > 0.0)) {
    throw InvalidConfig("alpha_fixed must be positive");
  }
  if (z0.policy == Z0Spec::Policy::Explicit &&
      (z0.values.size() == 0 || !(z0.values.array() > 0.0).all())) {
    throw InvalidConfig("explicit z0 must be a strictly positive vector");
  }
  if (z0.policy == Z0Spec::Policy::Empirical &&
      (!(z0.count_shrink > 0.0) || !(z0.effort_shrink > 0.0) || z0.window_weeks < 1)) {
    throw InvalidConfig("empirical z0 needs positive shrinkage and window");
  }
}

void SamplerConfig::validate() const {
  if (n_iterations < 1) throw InvalidConfig("n_iterations must be at least 1");
  if (burn_in < 0 || burn_in >= n_iterations) {
    throw InvalidConfig("burn_in must lie in [0, n_iterations)");
  }
  if (thin < 1) throw InvalidConfig("thin must be at least 1");
  if (!(mala_step > 0.0)) throw InvalidConfig("mala_step must be positive");
  if (adapt_window < 2) throw InvalidConfig("adapt_window must be at least 2");
  if (!(adapt_target > 0.0) || !(adapt_target < 1.0)) {
    throw InvalidConfig("adapt_target must lie in (0, 1)");
  }
}

Vector resolve_z0(const Z0Spec& spec, const ObservationSet& obs) {
  const Index n_node = obs.n_node();
  switch (spec.policy) {
    case Z0Spec::Policy::Ones:
      return Vector::Ones(n_node);
    case Z0Spec::Policy::Explicit:
      if (spec.values.size() != n_node) {
        throw InvalidConfig("explicit z0 length does not match the node count");
      }
      if (!(spec.values.array() > 0.0).all()) {
        throw InvalidConfig("explicit z0 must be strictly positive");
      }
      return spec.values;
    case Z0Spec::Policy::Empirical: {
      const Index window = std::min<Index>(spec.window_weeks, obs.n_time());
      Vector z0(n_node);
      for (Index j = 0; j < n_node; ++j) {
        double counts = 0.0;
        double effort = 0.0;
        for (Index i = 0; i < window; ++i) {
          counts += obs.y(i, j);
          effort += obs.t(i, j);
        }
        z0(j) = (counts + spec.count_shrink) / (effort + spec.effort_shrink);
      }
      return z0;
    }
  }
  throw InvalidConfig("unknown z0 policy");
}

namespace {

// Forward coupling of z_i into the next transition mean.
struct ForwardOp {
  virtual ~ForwardOp() = default;
  virtual Vector apply(const Vector& z) const = 0;
  virtual Vector apply_transpose(const Vector& w) const = 0;
};

struct DenseForwardOp final : ForwardOp {
  const Matrix& m;
  explicit DenseForwardOp(const Matrix& m_in) : m(m_in) {}
  Vector apply(const Vector& z) const override { return m * z; }
  Vector apply_transpose(const Vector& w) const override { return m.transpose() * w; }
};

struct CachedForwardOp final : ForwardOp {
  const TransitionCache& cache;
  TransitionParams params;
  CachedForwardOp(const TransitionCache& c, const TransitionParams& p)
      : cache(c), params(p) {}
  Vector apply(const Vector& z) const override { return cache.apply(params, z); }
  Vector apply_transpose(const Vector& w) const override {
    return cache.apply_transpose(params, w);
  }
};

// Log density and gradient of z_i's full conditional with mu_i = M_i z_{i-1}
// held fixed. Inputs must be strictly positive.
TargetEval eval_target_z(const Vector& z, const Vector& y, const Vector& t,
                         const Vector& mu_i, const Vector* z_next,
                         const ForwardOp* forward, double alpha, bool include_obs) {
  const Index n = z.size();
  TargetEval out;
  out.grad = Vector::Zero(n);
  double value = 0.0;
  const double lg_alpha = std::lgamma(alpha);
  for (Index j = 0; j < n; ++j) {
    const double zj = z(j);
    if (include_obs && t(j) > 0.0) {
      const double mu_obs = zj * t(j);
      value += y(j) * std::log(mu_obs) - mu_obs - std::lgamma(y(j) + 1.0);
      out.grad(j) += y(j) / zj - t(j);
    }
    const double rate = alpha / mu_i(j);
    value += alpha * std::log(rate) - lg_alpha + (alpha - 1.0) * std::log(zj) -
             rate * zj;
    out.grad(j) += (alpha - 1.0) / zj - rate;
  }
  if (z_next != nullptr) {
    const Vector mu_next = forward->apply(z);
    Vector w(n);
    for (Index j = 0; j < n; ++j) {
      const double mu = mu_next(j);
      const double rate = alpha / mu;
      value += alpha * std::log(rate) - lg_alpha +
               (alpha - 1.0) * std::log((*z_next)(j)) - rate * (*z_next)(j);
      w(j) = alpha * ((*z_next)(j) - mu) / (mu * mu);
    }
    out.grad += forward->apply_transpose(w);
  }
  out.value = value;
  return out;
}

}  // namespace

TargetEval log_target_z(const Vector& z_i, const Vector& y_i, const Vector& t_i,
                        const Vector& z_prev, const Vector* z_next,
                        const Matrix& m_i, const Matrix* m_next, double alpha) {
  if (!(z_i.array() > 0.0).all() || !(z_prev.array() > 0.0).all()) {
    throw InvalidInput("latent states must be strictly positive");
  }
  if (!(alpha > 0.0)) throw InvalidInput("alpha must be positive");
  if (z_next != nullptr && m_next == nullptr) {
    throw InvalidInput("a forward transition matrix is required with z_next");
  }
  const Vector mu_i = m_i * z_prev;
  if (!(mu_i.array() > 0.0).all()) {
    throw DegenerateMean("transition mean is not strictly positive");
  }
  DenseForwardOp forward(m_next != nullptr ? *m_next : m_i);
  return eval_target_z(z_i, y_i, t_i, mu_i, z_next,
                       z_next != nullptr ? &forward : nullptr, alpha, true);
}

namespace {

struct MalaAdapt {
  double log_step = 0.0;
  long attempts_post = 0;
  long accepts_post = 0;
};

struct ThetaAdapt {
  std::vector<Eigen::Vector3d> window;
  std::size_t head = 0;
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  Eigen::Matrix3d sum_sq = Eigen::Matrix3d::Zero();
  double log_scale = 0.0;
  Eigen::Matrix3d chol = 0.1 * Eigen::Matrix3d::Identity();
  long attempts_post = 0;
  long accepts_post = 0;

  void push(const Eigen::Vector3d& x, std::size_t capacity) {
    if (window.size() < capacity) {
      window.push_back(x);
    } else {
      const Eigen::Vector3d& old = window[head];
      sum -= old;
      sum_sq -= old * old.transpose();
      window[head] = x;
      head = (head + 1) % capacity;
    }
    sum += x;
    sum_sq += x * x.transpose();
  }

  void rebuild_chol() {
    const auto m = static_cast<double>(window.size());
    Eigen::Matrix3d sigma;
    if (window.size() >= 25) {
      const Eigen::Vector3d mean = sum / m;
      Eigen::Matrix3d cov = sum_sq / m - mean * mean.transpose();
      sigma = (2.38 * 2.38 / 3.0) * cov + 1e-6 * Eigen::Matrix3d::Identity();
    } else {
      sigma = 0.01 * Eigen::Matrix3d::Identity();
    }
    sigma *= std::exp(log_scale);
    Eigen::LLT<Eigen::Matrix3d> llt(sigma);
    if (llt.info() != Eigen::Success) {
      llt.compute(sigma + 1e-8 * Eigen::Matrix3d::Identity());
    }
    chol = llt.matrixL();
  }
};

struct StepResult {
  bool accepted = false;
  double prob = 0.0;
};

}  // namespace

struct Chain::Impl {
  std::shared_ptr<const TransitionCache> trans;
  PriorSpec priors;
  SamplerConfig cfg;
  Options opts;
  std::vector<std::string> node_ids;

  Index n_time = 0;
  Index n_node = 0;
  std::vector<Vector> y_rows;
  std::vector<Vector> t_rows;
  Vector z0;

  std::vector<Vector> z;
  std::vector<TransitionParams> thetas;
  double alpha = 1.0;
  int iteration = 0;

  std::vector<MalaAdapt> mala;
  std::vector<ThetaAdapt> theta_adapt;
  double alpha_log_scale = std::log(0.3);
  long alpha_attempts_post = 0;
  long alpha_accepts_post = 0;
  long nonfinite = 0;

  std::array<double, 3> log_pq{};  // q = -1, 0, +1
  Rng rng{0};

  const Vector& z_prev(Index i) const { return i == 0 ? z0 : z[static_cast<std::size_t>(i - 1)]; }

  double standard_normal() {
    return std::normal_distribution<double>{}(rng);
  }
  double uniform() { return std::uniform_real_distribution<double>{}(rng); }

  TargetEval eval_w(const Vector& w, Index i, const Vector& mu_i,
                    const Vector* z_next, const ForwardOp* forward) {
    Vector zv = w.array().exp();
    if (!zv.allFinite() || !(zv.array() > 0.0).all()) {
      return TargetEval{kNegInf, Vector()};
    }
    TargetEval eval =
        eval_target_z(zv, y_rows[static_cast<std::size_t>(i)],
                      t_rows[static_cast<std::size_t>(i)], mu_i, z_next, forward,
                      alpha, opts.include_observation_term);
    if (!std::isfinite(eval.value)) return TargetEval{kNegInf, Vector()};
    eval.value += w.sum();
    eval.grad = (zv.array() * eval.grad.array() + 1.0).matrix();
    return eval;
  }

  StepResult mala_impl(Index i) {
    auto& state = z[static_cast<std::size_t>(i)];
    const Vector mu_i = trans->apply(thetas[static_cast<std::size_t>(i)], z_prev(i));
    const bool has_next = i + 1 < n_time;
    CachedForwardOp forward(*trans,
                            thetas[static_cast<std::size_t>(std::min(i + 1, n_time - 1))]);
    const Vector* z_next = has_next ? &z[static_cast<std::size_t>(i + 1)] : nullptr;
    const ForwardOp* fwd = has_next ? &forward : nullptr;

    const Vector w = state.array().log();
    const TargetEval cur = eval_w(w, i, mu_i, z_next, fwd);
    if (!std::isfinite(cur.value) || cur.grad.size() == 0 || !cur.grad.allFinite()) {
      throw SolveFailed("current latent state has a non-finite conditional density");
    }
    const double step = std::exp(mala[static_cast<std::size_t>(i)].log_step);
    const double half_sq = 0.5 * step * step;

    Vector noise(n_node);
    for (Index j = 0; j < n_node; ++j) noise(j) = standard_normal();
    const Vector w_prop = w + half_sq * cur.grad + step * noise;

    const TargetEval prop = eval_w(w_prop, i, mu_i, z_next, fwd);
    if (!std::isfinite(prop.value) || prop.grad.size() == 0 || !prop.grad.allFinite()) {
      ++nonfinite;
      return {false, 0.0};
    }
    const double log_q_fwd = -(w_prop - w - half_sq * cur.grad).squaredNorm() /
                             (2.0 * step * step);
    const double log_q_rev = -(w - w_prop - half_sq * prop.grad).squaredNorm() /
                             (2.0 * step * step);
    const double log_accept = prop.value - cur.value + log_q_rev - log_q_fwd;
    if (!std::isfinite(log_accept)) {
      ++nonfinite;
      return {false, 0.0};
    }
    const double prob = std::min(1.0, std::exp(log_accept));
    if (std::log(uniform()) < log_accept) {
      state = w_prop.array().exp();
      return {true, prob};
    }
    return {false, prob};
  }

  int q_impl(Index i) {
    auto& theta = thetas[static_cast<std::size_t>(i)];
    const Vector& zp = z_prev(i);
    const Vector& zc = z[static_cast<std::size_t>(i)];
    std::array<double, 3> lw{};
    static constexpr std::array<int, 3> kDirections{-1, 0, 1};
    for (std::size_t d = 0; d < 3; ++d) {
      lw[d] = log_pq[d];
      if (lw[d] == kNegInf || opts.likelihood_scale == 0.0) continue;
      TransitionParams candidate = theta;
      candidate.q = kDirections[d];
      const Vector mu = trans->apply(candidate, zp);
      lw[d] += opts.likelihood_scale * trans_logpdf(zc, mu, alpha);
    }
    const double max_lw = std::max({lw[0], lw[1], lw[2]});
    std::array<double, 3> weight{};
    double total = 0.0;
    for (std::size_t d = 0; d < 3; ++d) {
      weight[d] = lw[d] == kNegInf ? 0.0 : std::exp(lw[d] - max_lw);
      total += weight[d];
    }
    double u = uniform() * total;
    std::size_t chosen = 2;
    for (std::size_t d = 0; d < 3; ++d) {
      if (u < weight[d]) {
        chosen = d;
        break;
      }
      u -= weight[d];
    }
    theta.q = kDirections[chosen];
    return theta.q;
  }

  double theta_target(Index i, const Eigen::Vector3d& x) {
    for (int k = 0; k < 3; ++k) {
      if (std::abs(x(k)) > kLogBound) return kNegInf;
    }
    TransitionParams candidate = thetas[static_cast<std::size_t>(i)];
    candidate.rho = std::exp(x(0));
    candidate.nu = std::exp(x(1));
    candidate.delta = std::exp(x(2));
    double value = priors.rho.log_pdf(candidate.rho) +
                   priors.nu.log_pdf(candidate.nu) +
                   priors.delta.log_pdf(candidate.delta) + x.sum();
    if (opts.likelihood_scale != 0.0 && std::isfinite(value)) {
      const Vector mu = trans->apply(candidate, z_prev(i));
      value += opts.likelihood_scale *
               trans_logpdf(z[static_cast<std::size_t>(i)], mu, alpha);
    }
    return value;
  }

  StepResult theta_impl(Index i) {
    auto& theta = thetas[static_cast<std::size_t>(i)];
    auto& adapt = theta_adapt[static_cast<std::size_t>(i)];
    const Eigen::Vector3d x(std::log(theta.rho), std::log(theta.nu),
                            std::log(theta.delta));
    Eigen::Vector3d noise(standard_normal(), standard_normal(), standard_normal());
    const Eigen::Vector3d x_prop = x + adapt.chol * noise;

    const double target_cur = theta_target(i, x);
    const double target_prop = theta_target(i, x_prop);
    if (!std::isfinite(target_prop)) {
      return {false, 0.0};
    }
    const double log_accept = target_prop - target_cur;
    const double prob = std::min(1.0, std::exp(log_accept));
    if (std::log(uniform()) < log_accept) {
      theta.rho = std::exp(x_prop(0));
      theta.nu = std::exp(x_prop(1));
      theta.delta = std::exp(x_prop(2));
      return {true, prob};
    }
    return {false, prob};
  }

  double alpha_target(double x) {
    if (std::abs(x) > kLogBound) return kNegInf;
    const double a = std::exp(x);
    double value = priors.alpha.log_pdf(a) + x;
    if (opts.likelihood_scale != 0.0 && std::isfinite(value)) {
      double like = 0.0;
      for (Index i = 0; i < n_time; ++i) {
        const Vector mu = trans->apply(thetas[static_cast<std::size_t>(i)], z_prev(i));
        like += trans_logpdf(z[static_cast<std::size_t>(i)], mu, a);
      }
      value += opts.likelihood_scale * like;
    }
    return value;
  }

  StepResult alpha_impl() {
    if (priors.alpha_fixed) return {false, 0.0};
    const double x = std::log(alpha);
    const double x_prop = x + std::exp(alpha_log_scale) * standard_normal();
    const double target_cur = alpha_target(x);
    const double target_prop = alpha_target(x_prop);
    if (!std::isfinite(target_prop)) {
      return {false, 0.0};
    }
    const double log_accept = target_prop - target_cur;
    const double prob = std::min(1.0, std::exp(log_accept));
    if (std::log(uniform()) < log_accept) {
      alpha = std::exp(x_prop);
      return {true, prob};
    }
    return {false, prob};
  }

  void sweep() {
    ++iteration;
    const bool adapting = iteration <= cfg.burn_in;
    const double gain = adapt_gain(iteration);

    for (Index i = 0; i < n_time; ++i) {
      auto& step_adapt = mala[static_cast<std::size_t>(i)];
      const StepResult z_result = mala_impl(i);
      if (adapting) {
        step_adapt.log_step += gain * (z_result.prob - kMalaTarget);
        step_adapt.log_step = std::clamp(step_adapt.log_step, std::log(1e-7), std::log(50.0));
      } else {
        ++step_adapt.attempts_post;
        step_adapt.accepts_post += z_result.accepted ? 1 : 0;
      }

      q_impl(i);

      auto& adapt = theta_adapt[static_cast<std::size_t>(i)];
      const StepResult theta_result = theta_impl(i);
      if (adapting) {
        adapt.log_scale += gain * (theta_result.prob - cfg.adapt_target);
        adapt.log_scale = std::clamp(adapt.log_scale, -20.0, 10.0);
        const auto& theta = thetas[static_cast<std::size_t>(i)];
        adapt.push(Eigen::Vector3d(std::log(theta.rho), std::log(theta.nu),
                                   std::log(theta.delta)),
                   static_cast<std::size_t>(cfg.adapt_window));
        adapt.rebuild_chol();
      } else {
        ++adapt.attempts_post;
        adapt.accepts_post += theta_result.accepted ? 1 : 0;
      }
    }

    if (!priors.alpha_fixed) {
      const StepResult alpha_result = alpha_impl();
      if (adapting) {
        alpha_log_scale += gain * (alpha_result.prob - kAlphaTarget);
        alpha_log_scale = std::clamp(alpha_log_scale, -20.0, 10.0);
      } else {
        ++alpha_attempts_post;
        alpha_accepts_post += alpha_result.accepted ? 1 : 0;
      }
    }
  }
};

Chain::Chain(const ObservationSet& obs, const GraphArtifacts& artifacts,
             PriorSpec priors, SamplerConfig config, Options options)
    : impl_(std::make_unique<Impl>()) {
  obs.validate();
  priors.validate();
  config.validate();
  if (obs.n_node() != artifacts.graph.n()) {
    throw InvariantViolation("observation node count does not match the graph");
  }
  if (obs.n_time() < 1) throw InvalidInput("at least one time step is required");

  impl_->trans = artifacts.transitions;
  impl_->priors = std::move(priors);
  impl_->cfg = config;
  impl_->opts = options;
  impl_->node_ids = artifacts.graph.node_ids();
  impl_->n_time = obs.n_time();
  impl_->n_node = obs.n_node();
  impl_->rng = make_rng(config.seed);

  impl_->y_rows.reserve(static_cast<std::size_t>(impl_->n_time));
  impl_->t_rows.reserve(static_cast<std::size_t>(impl_->n_time));
  for (Index i = 0; i < impl_->n_time; ++i) {
    impl_->y_rows.push_back(obs.y.row(i).transpose());
    impl_->t_rows.push_back(obs.t.row(i).transpose());
  }
  impl_->z0 = resolve_z0(impl_->priors.z0, obs);

  // Chain initialization: shrunk empirical rates for z, prior means for
  // theta, diffusion for q.
  impl_->z.reserve(static_cast<std::size_t>(impl_->n_time));
  for (Index i = 0; i < impl_->n_time; ++i) {
    Vector zi(impl_->n_node);
    for (Index j = 0; j < impl_->n_node; ++j) {
      zi(j) = (obs.y(i, j) + 0.5) / (obs.t(i, j) + 1.0);
    }
    impl_->z.push_back(std::move(zi));
  }
  TransitionParams init;
  init.q = 0;
  init.rho = impl_->priors.rho.mean();
  init.nu = impl_->priors.nu.mean();
  init.delta = impl_->priors.delta.mean();
  impl_->thetas.assign(static_cast<std::size_t>(impl_->n_time), init);
  impl_->alpha = impl_->priors.alpha_fixed.value_or(impl_->priors.alpha.mean());

  impl_->mala.assign(static_cast<std::size_t>(impl_->n_time), MalaAdapt{});
  for (auto& m : impl_->mala) m.log_step = std::log(config.mala_step);
  impl_->theta_adapt.assign(static_cast<std::size_t>(impl_->n_time), ThetaAdapt{});
  for (auto& a : impl_->theta_adapt) a.rebuild_chol();

  impl_->log_pq = {
      impl_->priors.p_minus > 0.0 ? std::log(impl_->priors.p_minus) : kNegInf,
      impl_->priors.p_zero > 0.0 ? std::log(impl_->priors.p_zero) : kNegInf,
      impl_->priors.p_plus > 0.0 ? std::log(impl_->priors.p_plus) : kNegInf,
  };
}

Chain::~Chain() = default;

Index Chain::n_time() const { return impl_->n_time; }
Index Chain::n_node() const { return impl_->n_node; }
int Chain::iteration() const { return impl_->iteration; }

const Vector& Chain::z(Index i) const { return impl_->z.at(static_cast<std::size_t>(i)); }

void Chain::set_z(Index i, Vector value) {
  if (value.size() != impl_->n_node || !(value.array() > 0.0).all()) {
    throw InvalidInput("z must be a strictly positive vector over the nodes");
  }
  impl_->z.at(static_cast<std::size_t>(i)) = std::move(value);
}

const Vector& Chain::z0() const { return impl_->z0; }

const TransitionParams& Chain::theta(Index i) const {
  return impl_->thetas.at(static_cast<std::size_t>(i));
}

void Chain::set_theta(Index i, const TransitionParams& params) {
  params.validate();
  impl_->thetas.at(static_cast<std::size_t>(i)) = params;
}

double Chain::alpha() const { return impl_->alpha; }

void Chain::set_alpha(double a) {
  if (!(a > 0.0)) throw InvalidInput("alpha must be positive");
  impl_->alpha = a;
}

double Chain::mala_step(Index i) const {
  return std::exp(impl_->mala.at(static_cast<std::size_t>(i)).log_step);
}

void Chain::set_mala_step(Index i, double step) {
  if (!(step > 0.0)) throw InvalidInput("step must be positive");
  impl_->mala.at(static_cast<std::size_t>(i)).log_step = std::log(step);
}

void Chain::sweep() { impl_->sweep(); }

bool Chain::mala_update_z(Index i) { return impl_->mala_impl(i).accepted; }
int Chain::update_q(Index i) { return impl_->q_impl(i); }
bool Chain::update_theta(Index i) { return impl_->theta_impl(i).accepted; }
bool Chain::update_alpha() { return impl_->alpha_impl().accepted; }

PosteriorSamples Chain::run(const DrawSink& sink, const ProgressFn& progress) {
  const auto& cfg = impl_->cfg;
  PosteriorSamples out;
  out.n_time = impl_->n_time;
  out.n_node = impl_->n_node;
  out.node_ids = impl_->node_ids;
  out.seed = cfg.seed;

  const Index kept = cfg.n_kept();
  out.z.reserve(static_cast<std::size_t>(kept));
  out.q.resize(kept, impl_->n_time);
  out.rho.resize(kept, impl_->n_time);
  out.nu.resize(kept, impl_->n_time);
  out.delta.resize(kept, impl_->n_time);
  out.alpha.resize(kept);

  const int report_every = std::max(1, cfg.n_iterations / 100);
  Index k = 0;
  for (int t = 1; t <= cfg.n_iterations; ++t) {
    impl_->sweep();
    if (t > cfg.burn_in && (t - cfg.burn_in) % cfg.thin == 0 && k < kept) {
      Matrix z_draw(impl_->n_time, impl_->n_node);
      for (Index i = 0; i < impl_->n_time; ++i) {
        z_draw.row(i) = impl_->z[static_cast<std::size_t>(i)].transpose();
      }
      for (Index i = 0; i < impl_->n_time; ++i) {
        const auto& theta = impl_->thetas[static_cast<std::size_t>(i)];
        out.q(k, i) = theta.q;
        out.rho(k, i) = theta.rho;
        out.nu(k, i) = theta.nu;
        out.delta(k, i) = theta.delta;
      }
      out.alpha(k) = impl_->alpha;
      out.z.push_back(std::move(z_draw));
      if (sink) sink(Draw{t, impl_->z, impl_->thetas, impl_->alpha});
      ++k;
    }
    if (progress && (t % report_every == 0 || t == cfg.n_iterations)) {
      progress(t, cfg.n_iterations);
    }
  }

  out.z_accept.resize(impl_->n_time);
  out.theta_accept.resize(impl_->n_time);
  out.mala_step.resize(impl_->n_time);
  out.theta_scale.resize(impl_->n_time);
  for (Index i = 0; i < impl_->n_time; ++i) {
    const auto& m = impl_->mala[static_cast<std::size_t>(i)];
    const auto& a = impl_->theta_adapt[static_cast<std::size_t>(i)];
    out.z_accept(i) = m.attempts_post > 0
                          ? static_cast<double>(m.accepts_post) / m.attempts_post
                          : 0.0;
    out.theta_accept(i) = a.attempts_post > 0
                              ? static_cast<double>(a.accepts_post) / a.attempts_post
                              : 0.0;
    out.mala_step(i) = std::exp(m.log_step);
    out.theta_scale(i) = a.log_scale;
  }
  out.alpha_accept = impl_->alpha_attempts_post > 0
                         ? static_cast<double>(impl_->alpha_accepts_post) /
                               impl_->alpha_attempts_post
                         : 0.0;
  out.nonfinite_rejects = impl_->nonfinite;
  return out;
}

PosteriorSamples run_chain(const ObservationSet& obs, const GraphArtifacts& artifacts,
                           const PriorSpec& priors, const SamplerConfig& config,
                           const DrawSink& sink, const ProgressFn& progress) {
  Chain chain(obs, artifacts, priors, config);
  return chain.run(sink, progress);
}

}  // namespace chmm
