#include "chmm/summary.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

#include "chmm/errors.hpp"
#include "chmm/rng.hpp"

namespace chmm {

double quantile(const Vector& sorted_draws, double p) {
  const Index n = sorted_draws.size();
  if (n == 0) throw InvalidInput("quantile of an empty vector");
  const double h = static_cast<double>(n) * p + 0.5;
  if (h <= 1.0) return sorted_draws(0);
  if (h >= static_cast<double>(n)) return sorted_draws(n - 1);
  const auto lo = static_cast<Index>(std::floor(h));
  const double frac = h - static_cast<double>(lo);
  return sorted_draws(lo - 1) + frac * (sorted_draws(lo) - sorted_draws(lo - 1));
}

std::pair<double, double> credible_interval(const Vector& draws, double level) {
  if (draws.size() < 100) {
    throw InvalidInput("credible_interval needs at least 100 draws");
  }
  if (!(level > 0.0) || !(level < 1.0)) {
    throw InvalidInput("interval level must lie strictly inside (0, 1)");
  }
  Vector sorted = draws;
  std::sort(sorted.data(), sorted.data() + sorted.size());
  const double tail = (1.0 - level) / 2.0;
  return {quantile(sorted, tail), quantile(sorted, 1.0 - tail)};
}

void CoverageRow::add(bool was_covered, double width, double err) {
  ++n;
  covered += was_covered ? 1 : 0;
  sum_width += width;
  sum_err += err;
  sum_sq_err += err * err;
}

void CoverageRow::merge(const CoverageRow& other) {
  n += other.n;
  covered += other.covered;
  sum_width += other.sum_width;
  sum_err += other.sum_err;
  sum_sq_err += other.sum_sq_err;
}

double CoverageRow::rmse() const {
  return n > 0 ? std::sqrt(sum_sq_err / static_cast<double>(n)) : 0.0;
}

void CoverageTable::merge(const CoverageTable& other) {
  z_observed.merge(other.z_observed);
  z_censored.merge(other.z_censored);
  q.merge(other.q);
  rho.merge(other.rho);
  nu.merge(other.nu);
  delta.merge(other.delta);
  alpha.merge(other.alpha);
}

namespace {

void score_scalar(CoverageRow& row, const Vector& draws, double truth, double level) {
  const auto [lo, hi] = credible_interval(draws, level);
  const double mean = draws.mean();
  row.add(lo <= truth && truth <= hi, hi - lo, mean - truth);
}

}  // namespace

CoverageTable coverage_stats(const PosteriorSamples& samples,
                             const SimulationTruth& truth, double level) {
  const Index n_time = samples.n_time;
  const Index n_node = samples.n_node;
  const Index kept = samples.n_kept();
  if (truth.z.rows() != n_time || truth.z.cols() != n_node ||
      truth.censored.rows() != n_time || truth.censored.cols() != n_node ||
      static_cast<Index>(truth.thetas.size()) != n_time) {
    throw InvalidInput("simulation truth dimensions do not match the samples");
  }
  if (kept < 100) throw InvalidInput("coverage needs at least 100 kept draws");

  CoverageTable table;
  Vector cell(kept);
  for (Index i = 0; i < n_time; ++i) {
    for (Index j = 0; j < n_node; ++j) {
      for (Index k = 0; k < kept; ++k) cell(k) = samples.z[static_cast<std::size_t>(k)](i, j);
      auto& row = truth.censored(i, j) != 0.0 ? table.z_censored : table.z_observed;
      score_scalar(row, cell, truth.z(i, j), level);
    }
    const auto& theta = truth.thetas[static_cast<std::size_t>(i)];
    score_scalar(table.q, samples.q.col(i), static_cast<double>(theta.q), level);
    score_scalar(table.rho, samples.rho.col(i), theta.rho, level);
    score_scalar(table.nu, samples.nu.col(i), theta.nu, level);
    score_scalar(table.delta, samples.delta.col(i), theta.delta, level);
  }
  score_scalar(table.alpha, samples.alpha, truth.alpha, level);
  return table;
}

Vector average_latitude(const Matrix& rates, const Vector& latitudes) {
  if (rates.cols() != latitudes.size()) {
    throw InvalidInput("rates and latitudes node counts disagree");
  }
  if ((rates.array() < 0.0).any()) {
    throw InvalidInput("rates must be nonnegative");
  }
  Vector out(rates.rows());
  for (Index i = 0; i < rates.rows(); ++i) {
    const double total = rates.row(i).sum();
    out(i) = total > 0.0 ? rates.row(i).dot(latitudes.transpose()) / total
                         : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

FlowClassification classify_flow(const PosteriorSamples& samples,
                                 const FlowThresholds& thresholds) {
  const Index n_time = samples.n_time;
  const Index kept = samples.n_kept();
  if (kept < 1) throw InvalidInput("classify_flow needs at least one draw");

  FlowClassification out;
  out.labels.resize(static_cast<std::size_t>(n_time), FlowLabel::None);
  out.p_plus.resize(n_time);
  out.p_minus.resize(n_time);
  out.mean_rho.resize(n_time);
  out.mean_delta_ratio.resize(n_time);

  for (Index i = 0; i < n_time; ++i) {
    long plus = 0;
    long minus = 0;
    double ratio_sum = 0.0;
    for (Index k = 0; k < kept; ++k) {
      if (samples.q(k, i) > 0.5) ++plus;
      if (samples.q(k, i) < -0.5) ++minus;
      ratio_sum += samples.delta(k, i) / (samples.nu(k, i) + samples.delta(k, i));
    }
    out.p_plus(i) = static_cast<double>(plus) / kept;
    out.p_minus(i) = static_cast<double>(minus) / kept;
    out.mean_rho(i) = samples.rho.col(i).mean();
    out.mean_delta_ratio(i) = ratio_sum / kept;

    const bool auxiliary = out.mean_rho(i) > thresholds.rho_min &&
                           out.mean_delta_ratio(i) > thresholds.ratio_min;
    if (auxiliary && out.p_minus(i) >= thresholds.p_min) {
      out.labels[static_cast<std::size_t>(i)] = FlowLabel::North;
    } else if (auxiliary && out.p_plus(i) >= thresholds.p_min) {
      out.labels[static_cast<std::size_t>(i)] = FlowLabel::South;
    }
  }
  return out;
}

double effective_sample_size(const Vector& draws) {
  const Index n = draws.size();
  if (n < 100) throw InvalidInput("effective_sample_size needs at least 100 draws");
  const double mean = draws.mean();
  const Vector centered = draws.array() - mean;
  const double var0 = centered.squaredNorm() / static_cast<double>(n);
  if (var0 <= 0.0) return static_cast<double>(n);  // constant sequence

  auto autocov = [&](Index k) {
    double acc = 0.0;
    for (Index t = 0; t + k < n; ++t) acc += centered(t) * centered(t + k);
    return acc / static_cast<double>(n);
  };

  // Initial positive sequence: accumulate pair sums while positive.
  double sigma_sq = -var0;
  for (Index m = 0; 2 * m + 1 < n; ++m) {
    const double pair = autocov(2 * m) + autocov(2 * m + 1);
    if (pair <= 0.0) break;
    sigma_sq += 2.0 * pair;
  }
  if (sigma_sq <= 0.0) return static_cast<double>(n);
  const double ess = static_cast<double>(n) * var0 / sigma_sq;
  return std::min(ess, static_cast<double>(n));
}

Matrix posterior_mean_z(const PosteriorSamples& samples) {
  if (samples.n_kept() == 0) throw InvalidInput("no draws to average");
  Matrix mean = Matrix::Zero(samples.n_time, samples.n_node);
  for (const auto& draw : samples.z) mean += draw;
  mean /= static_cast<double>(samples.n_kept());
  return mean;
}

StudySpec::StudySpec() {
  fit_priors.alpha = gen_alpha;
  fit_priors.rho = gen_rho;
  fit_priors.nu = gen_nu;
  fit_priors.delta = gen_delta;
  fit_priors.p_plus = gen_p_plus;
  fit_priors.p_zero = gen_p_zero;
  fit_priors.p_minus = gen_p_minus;
  fit_priors.z0.policy = Z0Spec::Policy::Ones;
  sampler.n_iterations = 12000;
  sampler.burn_in = 2000;
  sampler.thin = 1;
}

void StudySpec::validate() const {
  if (replicates < 1) throw InvalidConfig("study needs at least one replicate");
  if (rows < 1 || cols < 1 || static_cast<long>(rows) * cols < 2) {
    throw InvalidConfig("study lattice is degenerate");
  }
  if (steps < 1) throw InvalidConfig("study needs at least one time step");
  if (censor_fraction < 0.0 || censor_fraction >= 1.0) {
    throw InvalidConfig("censor fraction must lie in [0, 1)");
  }
  if (!(effort_rate > 0.0)) throw InvalidConfig("effort rate must be positive");
  if (workers < 1) throw InvalidConfig("workers must be at least 1");
  if (gen_p_plus < 0.0 || gen_p_zero < 0.0 || gen_p_minus < 0.0 ||
      std::abs(gen_p_plus + gen_p_zero + gen_p_minus - 1.0) > 1e-12) {
    throw InvalidConfig("generative direction probabilities must sum to 1");
  }
  fit_priors.validate();
  sampler.validate();
}

namespace {

std::vector<std::string> lattice_row_ids(int row, int cols) {
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(cols));
  for (int c = 0; c < cols; ++c) {
    ids.push_back("r" + std::to_string(row) + "c" + std::to_string(c));
  }
  return ids;
}

ReplicateRecord run_replicate(const StudySpec& spec, const GraphArtifacts& artifacts,
                              int replicate) {
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t base = split_seed(spec.seed, static_cast<std::uint64_t>(replicate));
  Rng gen_rng = make_rng(split_seed(base, 0));

  const Index n_node = artifacts.graph.n();
  ModelParams params;
  params.thetas.reserve(static_cast<std::size_t>(spec.steps));
  std::uniform_real_distribution<double> unif;
  auto draw_gamma = [&](const GammaPrior& p) {
    return std::gamma_distribution<double>(p.shape, 1.0 / p.rate)(gen_rng);
  };
  for (int i = 0; i < spec.steps; ++i) {
    TransitionParams theta;
    const double u = unif(gen_rng);
    theta.q = u < spec.gen_p_plus ? 1 : (u < spec.gen_p_plus + spec.gen_p_zero ? 0 : -1);
    theta.rho = draw_gamma(spec.gen_rho);
    theta.nu = draw_gamma(spec.gen_nu);
    theta.delta = draw_gamma(spec.gen_delta);
    params.thetas.push_back(theta);
  }
  params.alpha = draw_gamma(spec.gen_alpha);

  const Matrix efforts =
      simulate_efforts(spec.steps, n_node, spec.effort_rate, split_seed(base, 1));
  const SimulationResult sim = simulate_path(*artifacts.transitions, params, efforts,
                                             Vector::Ones(n_node), split_seed(base, 2));
  const ObservationSet censored =
      censor(sim.obs, spec.censor_fraction, split_seed(base, 3));

  SamplerConfig config = spec.sampler;
  config.seed = split_seed(base, 4);
  const PosteriorSamples samples =
      run_chain(censored, artifacts, spec.fit_priors, config);

  SimulationTruth truth;
  truth.z = sim.path.z;
  truth.thetas = params.thetas;
  truth.alpha = params.alpha;
  truth.censored = (censored.t.array() == 0.0).cast<double>();

  ReplicateRecord record;
  record.replicate = replicate;
  record.seed = base;
  record.table = coverage_stats(samples, truth, 0.9);
  record.mean_z_accept = samples.z_accept.mean();
  record.mean_theta_accept = samples.theta_accept.mean();
  record.alpha_accept = samples.alpha_accept;
  record.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return record;
}

}  // namespace

StudyResult replicate_study(const StudySpec& spec, const ReplicateCallback& on_replicate,
                            const std::vector<ReplicateRecord>& preloaded) {
  spec.validate();

  const SpatialGraph graph = lattice(spec.rows, spec.cols);
  const GraphArtifacts artifacts =
      make_artifacts(graph, lattice_row_ids(spec.rows - 1, spec.cols),
                     lattice_row_ids(0, spec.cols));

  std::vector<char> done(static_cast<std::size_t>(spec.replicates), 0);
  StudyResult result;
  for (const auto& record : preloaded) {
    if (record.replicate >= 0 && record.replicate < spec.replicates &&
        !done[static_cast<std::size_t>(record.replicate)]) {
      done[static_cast<std::size_t>(record.replicate)] = 1;
      result.records.push_back(record);
    }
  }
  std::vector<int> pending;
  for (int r = 0; r < spec.replicates; ++r) {
    if (!done[static_cast<std::size_t>(r)]) pending.push_back(r);
  }

  std::mutex sink_mutex;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  auto worker = [&]() {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= pending.size()) return;
      try {
        ReplicateRecord record = run_replicate(spec, artifacts, pending[idx]);
        std::lock_guard lock(sink_mutex);
        if (on_replicate) on_replicate(record);
        result.records.push_back(std::move(record));
      } catch (...) {
        std::lock_guard lock(sink_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  const int n_workers = std::min<int>(spec.workers, std::max<std::size_t>(pending.size(), 1));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) threads.emplace_back(worker);
    for (auto& thread : threads) thread.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::sort(result.records.begin(), result.records.end(),
            [](const ReplicateRecord& a, const ReplicateRecord& b) {
              return a.replicate < b.replicate;
            });
  for (const auto& record : result.records) result.aggregate.merge(record.table);
  return result;
}

}  // namespace chmm
