#pragma once

#include <cstdint>

#include "planted/types.hpp"

namespace planted {

enum class Detector { kSpectral = 0, kGlr = 1 };

const char* detector_name(Detector detector);

struct DetectionOutcome {
  Detector detector = Detector::kSpectral;
  double statistic = 0.0;
  double threshold = 0.0;
  Hypothesis decision = Hypothesis::kNull;  // planted iff statistic >= threshold
  bool spectrally_indistinguishable = false;
  double elapsed_seconds = 0.0;
};

struct OverlapMatrix {
  Matrix omega;  // k x k, doubly stochastic
  double l2 = 0.0;
  double trace = 0.0;
};

// Log of the likelihood ratio P(X|M)/Q(X).
double conditional_llr(const Matrix& x, const Matrix& m, Noise noise);

// Largest eigenvalue of a symmetric matrix (full diagonalization).
double top_eigenvalue(const Matrix& sym);

// lambda_max(X/sqrt(n)) for the symmetric problems, lambda_max(X^T X / m) for
// clustering.
double spectral_statistic(const Matrix& x, const ProblemParams& params);

struct SpectralLimits {
  double null_limit = 0.0;
  double planted_limit = 0.0;
  bool indistinguishable = false;
};
SpectralLimits spectral_limits(const ProblemParams& params);

DetectionOutcome spectral_detect(const Matrix& x, const ProblemParams& params);

// Size of the exhaustive search; glr_search refuses anything above kMaxSearch.
double glr_search_space(const ProblemParams& params);
inline constexpr double kMaxSearch = 2e8;

struct GlrResult {
  GroundTruth best_truth;
  double best_statistic = 0.0;
};

// Exact maximizer of the GLR-equivalent statistic; ties go to the
// lexicographically smallest candidate encoding.
GlrResult glr_search(const Matrix& x, const ProblemParams& params);

double glr_threshold(const ProblemParams& params);
DetectionOutcome glr_detect(const Matrix& x, const ProblemParams& params);

// Statistics of individual candidates.
double submatrix_statistic(const Matrix& x, const BalancedPartition& sigma);
double clustering_statistic(const Matrix& x, const BalancedPartition& sigma);

OverlapMatrix overlap_matrix(const BalancedPartition& sigma, const BalancedPartition& tau);

// max over permutation matrices pi of Tr(pi omega).
double trace_overlap(const Matrix& omega);

// <v, v0> / n.
double vector_overlap(const SparseSignVector& v, const SparseSignVector& v0);

struct Reconstruction {
  GroundTruth estimate;
  // Sparse PCA: leading eigenvector scaled to norm sqrt(n). Partition
  // problems: rows of the (k-1)-dimensional spectral embedding, flattened.
  Matrix raw_embedding;
};

Reconstruction pca_reconstruct(const Matrix& x, const ProblemParams& params);

// Greedy split of [0, N) into k classes of size N/k using a similarity matrix.
BalancedPartition greedy_balanced_assignment(const Matrix& similarity, int k);

struct SplitEstimate {
  Matrix m_hat;
  BalancedPartition sigma_hat;
  bool spectral_surrogate = false;
};

// Column sample-splitting estimator of the clustering signal matrix.
SplitEstimate sample_split_cluster_estimate(const Matrix& x, const ClusteringParams& params,
                                            double delta);

}  // namespace planted
