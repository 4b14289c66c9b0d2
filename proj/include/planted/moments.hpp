#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "planted/types.hpp"

namespace planted {

enum class MomentMethod { kExact, kMc };

const char* moment_method_name(MomentMethod method);

// Second moment E_Q[(P/Q)^2] at one parameter point.
struct MomentReport {
  ProblemParams params;
  MomentMethod method = MomentMethod::kExact;
  double value = 1.0;
  double log_value = 0.0;  // stays finite when value overflows
  std::optional<double> standard_error;
  std::optional<std::int64_t> trials;
};

// Monte Carlo estimates along the interpolation X(beta) = sqrt(beta) M + W.
// All quantities are per coordinate (divided by n).
struct MmseReport {
  double beta = 0.0;
  double mmse = 0.0;
  double se_mmse = 0.0;
  double posterior_norm = 0.0;
  double se_posterior_norm = 0.0;
  double mutual_info = 0.0;
  double se_mutual_info = 0.0;
  std::int64_t trials = 0;
};

struct MeanEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::int64_t trials = 0;
};

// Multiplier c in the conditional log-likelihood c(<X,M> - |M|^2/2): 1/2 for
// Wigner noise, 1 for Gaussian noise.
double noise_factor(Problem problem);

// Number of prior atoms visited by the exact sums.
double prior_support_size(const ProblemParams& params);

// log P(X)/Q(X), averaging the conditional ratio over the whole prior.
// Clustering integrates the centers out in closed form.
double likelihood_ratio_exact(const Matrix& x, const ProblemParams& params, double beta = 1.0);

// log P(X|partition)/Q(X) for clustering with the centers integrated out.
double clustering_partition_llr(const Matrix& x, const ClusteringParams& params,
                                const BalancedPartition& sigma, double beta = 1.0);

MomentReport second_moment_sparse_pca(const SparsePcaParams& params);
MomentReport second_moment_submatrix(const SubmatrixParams& params);

// Sample mean of exp(c <M, M'>) over independent prior pairs.
MomentReport second_moment_mc(const ProblemParams& params, std::int64_t trials,
                              std::uint64_t seed, int threads = 1);

// E[M | X(beta)] by exact enumeration of the prior.
Matrix posterior_mean_exact(const Matrix& x, const ProblemParams& params, double beta = 1.0);

struct MmseSample {
  double mmse = 0.0;
  double posterior_norm = 0.0;
  double info = 0.0;  // log p(X|M)/p(X), divided by n
};

// Common random numbers across the grid: trial t uses the same (M, W) at
// every beta. samples, when given, receives [beta][trial] values for paired
// comparisons.
std::vector<MmseReport> mmse_curve(const ProblemParams& params, const std::vector<double>& betas,
                                   std::int64_t trials, std::uint64_t seed, int threads = 1,
                                   std::vector<std::vector<MmseSample>>* samples = nullptr);

// Per-trial (I(beta+h) - I(beta-h)) / (2hn) - (c/2) MMSE(beta), with its
// paired standard error.
MeanEstimate immse_residual(const ProblemParams& params, double beta, double h,
                            std::int64_t trials, std::uint64_t seed, int threads = 1);

// Per-trial <M0, E[M|X]> - |E[M|X]|^2 under the planted model.
MeanEstimate nishimori_gap(const ProblemParams& params, std::int64_t trials, std::uint64_t seed,
                           int threads = 1);

// Sample mean of P(X)/Q(X) under the null model.
MeanEstimate first_moment_null(const ProblemParams& params, std::int64_t trials,
                               std::uint64_t seed, int threads = 1);

struct EventOptions {
  double factor = 0.0;       // 0 picks 2.1 (sparse PCA) or 3 (submatrix)
  double noise_scale = 1.0;  // X = M + noise_scale * W
};

// Empirical probability of the spectral conditioning event on the noise
// restricted to the planted structure.
MeanEstimate conditioning_event_rate(const ProblemParams& params, std::int64_t trials,
                                     std::uint64_t seed, const EventOptions& options = {},
                                     int threads = 1);

}  // namespace planted
