#pragma once

#include <functional>
#include <utility>

#include "chmm/sampler.hpp"

namespace chmm {

// Equal-tailed interval from empirical quantiles (Hazen rule: the p-th
// quantile interpolates at position n*p + 1/2 in the sorted draws).
std::pair<double, double> credible_interval(const Vector& draws, double level);

double quantile(const Vector& sorted_draws, double p);

struct CoverageRow {
  long n = 0;
  long covered = 0;
  double sum_width = 0.0;
  double sum_err = 0.0;
  double sum_sq_err = 0.0;

  void add(bool was_covered, double width, double err);
  void merge(const CoverageRow& other);
  double coverage() const { return n > 0 ? static_cast<double>(covered) / n : 0.0; }
  double mean_width() const { return n > 0 ? sum_width / n : 0.0; }
  double bias() const { return n > 0 ? sum_err / n : 0.0; }
  double rmse() const;
};

struct CoverageTable {
  CoverageRow z_observed;
  CoverageRow z_censored;
  CoverageRow q;
  CoverageRow rho;
  CoverageRow nu;
  CoverageRow delta;
  CoverageRow alpha;

  void merge(const CoverageTable& other);
};

// Ground truth of one simulated data set; censored(i, j) = 1 marks cells
// zeroed before fitting.
struct SimulationTruth {
  Matrix z;
  std::vector<TransitionParams> thetas;
  double alpha = 1.0;
  Matrix censored;
};

CoverageTable coverage_stats(const PosteriorSamples& samples,
                             const SimulationTruth& truth, double level = 0.9);

// Weighted mean of per-node latitudes, one value per time step; rows with
// no positive weight yield NaN.
Vector average_latitude(const Matrix& rates, const Vector& latitudes);

enum class FlowLabel { North, South, None };

struct FlowThresholds {
  double p_min = 0.9;
  double rho_min = 3.0;
  double ratio_min = 0.7;
};

struct FlowClassification {
  std::vector<FlowLabel> labels;
  Vector p_plus;
  Vector p_minus;
  Vector mean_rho;
  Vector mean_delta_ratio;  // posterior mean of delta / (nu + delta)
};

FlowClassification classify_flow(const PosteriorSamples& samples,
                                 const FlowThresholds& thresholds = {});

// Autocorrelation-based ESS (initial positive sequence estimator), clamped
// to (0, n]; a constant sequence returns n by convention.
double effective_sample_size(const Vector& draws);

Matrix posterior_mean_z(const PosteriorSamples& samples);

// Replicate simulation study: draw transition parameters and alpha from the
// generative priors, simulate counts on a lattice, censor, refit with the
// fit priors, and aggregate coverage of the 90% intervals.
struct StudySpec {
  int replicates = 20;
  int rows = 12;
  int cols = 5;
  int steps = 10;
  double censor_fraction = 0.3;
  double effort_rate = 0.1;

  double gen_p_plus = 0.25;
  double gen_p_zero = 0.5;
  double gen_p_minus = 0.25;
  GammaPrior gen_rho{3.0, 1.5};
  GammaPrior gen_nu{3.0, 6.0};
  GammaPrior gen_delta{3.0, 6.0};
  GammaPrior gen_alpha{10.0, 2.0};

  PriorSpec fit_priors;
  SamplerConfig sampler;
  std::uint64_t seed = 20240810;
  int workers = 1;

  StudySpec();
  void validate() const;
};

struct ReplicateRecord {
  int replicate = 0;
  std::uint64_t seed = 0;
  CoverageTable table;
  double mean_z_accept = 0.0;
  double mean_theta_accept = 0.0;
  double alpha_accept = 0.0;
  double elapsed_seconds = 0.0;
};

struct StudyResult {
  CoverageTable aggregate;
  std::vector<ReplicateRecord> records;
};

using ReplicateCallback = std::function<void(const ReplicateRecord&)>;

// Replicates in `preloaded` are reused instead of rerun, which is what
// makes an interrupted study resumable. Workers > 1 runs replicates in a
// thread pool; per-replicate results are independent of the worker count.
StudyResult replicate_study(const StudySpec& spec,
                            const ReplicateCallback& on_replicate = {},
                            const std::vector<ReplicateRecord>& preloaded = {});

}  // namespace chmm
