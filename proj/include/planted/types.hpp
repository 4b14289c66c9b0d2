#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace planted {

// Dense, row-major, double precision.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class Problem { kSparsePca = 0, kSubmatrix = 1, kClustering = 2 };
enum class Hypothesis { kNull = 0, kPlanted = 1 };
enum class Noise { kWigner, kGaussian };

struct SparsePcaParams {
  double lambda = 1.0;
  double gamma = 1.0;
  std::int64_t n = 1;
  bool operator==(const SparsePcaParams&) const = default;
};

struct SubmatrixParams {
  double mu = 1.0;
  int k = 2;
  std::int64_t n = 2;
  bool operator==(const SubmatrixParams&) const = default;
};

// m = alpha * n data points in dimension n, k balanced clusters.
struct ClusteringParams {
  double rho = 1.0;
  double alpha = 1.0;
  int k = 2;
  std::int64_t n = 1;
  bool operator==(const ClusteringParams&) const = default;
};

using ProblemParams = std::variant<SparsePcaParams, SubmatrixParams, ClusteringParams>;

Problem problem_of(const ProblemParams& params);
const char* problem_name(Problem problem);
Problem parse_problem(const std::string& name);
Noise noise_of(Problem problem);

// Signal-to-noise parameter of the variant (lambda, mu or rho).
double snr_of(const ProblemParams& params);
ProblemParams with_snr(ProblemParams params, double snr);

// Size of the support gamma*n; throws kDomain unless it is a positive integer.
std::int64_t support_size(double gamma, std::int64_t n);
// Number of data points alpha*n; throws kDomain unless a positive integer.
std::int64_t sample_count(double alpha, std::int64_t n);

// Checks every integrality and range invariant of the parameter record.
void validate(const ProblemParams& params);

// Observed matrix shape (rows, cols).
std::pair<std::int64_t, std::int64_t> observed_shape(const ProblemParams& params);

struct BalancedPartition {
  int k = 2;
  std::vector<int> labels;  // values in [0, k)

  std::int64_t size() const { return static_cast<std::int64_t>(labels.size()); }
};

struct SparseSignVector {
  std::int64_t n = 0;
  double gamma = 1.0;
  std::vector<std::int64_t> support;  // sorted ascending
  std::vector<int> signs;             // +1 / -1, aligned with support

  // Entry magnitude on the support, gamma^{-1/2}.
  double magnitude() const;
  Vector dense() const;
};

struct ClusteringTruth {
  BalancedPartition partition;  // over the m data points
  Matrix centers;               // n x k, columns v_1..v_k
};

using GroundTruth = std::variant<SparseSignVector, BalancedPartition, ClusteringTruth>;

struct PlantedInstance {
  ProblemParams params;
  Hypothesis hypothesis = Hypothesis::kNull;
  Matrix x;
  std::optional<GroundTruth> truth;
  std::uint64_t seed = 0;
};

}  // namespace planted
