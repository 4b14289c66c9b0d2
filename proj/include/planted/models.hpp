#pragma once

#include <cstdint>
#include <string>

#include "planted/rng.hpp"
#include "planted/types.hpp"

namespace planted {

// Uniform over the n!/((n/k)!^k) labeled balanced partitions of [n].
BalancedPartition sample_balanced_partition(std::int64_t n, int k, Stream& rng);

// Support uniform over (n choose gamma*n) subsets, i.i.d. uniform signs.
SparseSignVector sample_sparse_sign_vector(std::int64_t n, double gamma, Stream& rng);

// n x k matrix of i.i.d. N(0, k/(k-1)) entries.
Matrix sample_cluster_centers(std::int64_t n, int k, Stream& rng);

// Wigner (N(0,1) off-diagonal, N(0,2) diagonal) when symmetric, otherwise
// i.i.d. standard normal.
Matrix sample_noise(std::int64_t rows, std::int64_t cols, bool symmetric, Stream& rng);

GroundTruth sample_truth(const ProblemParams& params, Stream& rng);

// Noise-free signal matrix M for the given latent object.
Matrix build_signal(const ProblemParams& params, const GroundTruth& truth);

// X = M + W (planted) or X = W (null). Deterministic in (params, hypothesis, seed).
PlantedInstance generate_instance(const ProblemParams& params, Hypothesis hypothesis,
                                  std::uint64_t seed);

// Expected squared Frobenius norm of the signal under the prior.
double expected_signal_norm2(const ProblemParams& params);

// Snaps gamma*n, n/k or alpha*n/k to the nearest valid integer. The returned
// note is empty when nothing changed.
ProblemParams round_to_valid(const ProblemParams& params, std::string* note);

}  // namespace planted
