#include "planted/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "planted/error.hpp"

namespace planted {

namespace {

bool near_integer(double value, double* rounded) {
  *rounded = std::round(value);
  return std::abs(value - *rounded) <= 1e-9 * std::max(1.0, std::abs(value));
}

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

}  // namespace

Problem problem_of(const ProblemParams& params) {
  return static_cast<Problem>(params.index());
}

const char* problem_name(Problem problem) {
  switch (problem) {
    case Problem::kSparsePca: return "sparse-pca";
    case Problem::kSubmatrix: return "submatrix";
    case Problem::kClustering: return "clustering";
  }
  return "unknown";
}

Problem parse_problem(const std::string& name) {
  if (name == "sparse-pca") return Problem::kSparsePca;
  if (name == "submatrix") return Problem::kSubmatrix;
  if (name == "clustering") return Problem::kClustering;
  fail(ErrorCode::kInvalidArgument, "unknown problem '" + name + "'");
}

Noise noise_of(Problem problem) {
  return problem == Problem::kClustering ? Noise::kGaussian : Noise::kWigner;
}

double snr_of(const ProblemParams& params) {
  return std::visit(Overloaded{[](const SparsePcaParams& p) { return p.lambda; },
                               [](const SubmatrixParams& p) { return p.mu; },
                               [](const ClusteringParams& p) { return p.rho; }},
                    params);
}

ProblemParams with_snr(ProblemParams params, double snr) {
  std::visit(Overloaded{[&](SparsePcaParams& p) { p.lambda = snr; },
                        [&](SubmatrixParams& p) { p.mu = snr; },
                        [&](ClusteringParams& p) { p.rho = snr; }},
             params);
  return params;
}

std::int64_t support_size(double gamma, std::int64_t n) {
  require(gamma > 0.0 && gamma <= 1.0, ErrorCode::kDomain, "gamma must lie in (0, 1]");
  double s = 0.0;
  require(near_integer(gamma * static_cast<double>(n), &s) && s >= 1.0, ErrorCode::kDomain,
          "gamma*n must be a positive integer");
  return static_cast<std::int64_t>(s);
}

std::int64_t sample_count(double alpha, std::int64_t n) {
  require(alpha > 0.0, ErrorCode::kDomain, "alpha must be positive");
  double m = 0.0;
  require(near_integer(alpha * static_cast<double>(n), &m) && m >= 1.0, ErrorCode::kDomain,
          "alpha*n must be a positive integer");
  return static_cast<std::int64_t>(m);
}

void validate(const ProblemParams& params) {
  std::visit(
      Overloaded{
          [](const SparsePcaParams& p) {
            require(p.n >= 1, ErrorCode::kDomain, "n must be positive");
            require(p.lambda >= 0.0 && std::isfinite(p.lambda), ErrorCode::kDomain,
                    "lambda must be a finite non-negative real");
            support_size(p.gamma, p.n);
          },
          [](const SubmatrixParams& p) {
            require(p.k >= 2, ErrorCode::kDomain, "k must be at least 2");
            require(p.n >= p.k && p.n % p.k == 0, ErrorCode::kDomain, "k must divide n");
            require(p.mu >= 0.0 && std::isfinite(p.mu), ErrorCode::kDomain,
                    "mu must be a finite non-negative real");
          },
          [](const ClusteringParams& p) {
            require(p.k >= 2, ErrorCode::kDomain, "k must be at least 2");
            require(p.n >= 1, ErrorCode::kDomain, "n must be positive");
            require(p.rho >= 0.0 && std::isfinite(p.rho), ErrorCode::kDomain,
                    "rho must be a finite non-negative real");
            const std::int64_t m = sample_count(p.alpha, p.n);
            require(m % p.k == 0, ErrorCode::kDomain, "k must divide m = alpha*n");
          }},
      params);
}

std::pair<std::int64_t, std::int64_t> observed_shape(const ProblemParams& params) {
  if (const auto* c = std::get_if<ClusteringParams>(&params)) {
    return {sample_count(c->alpha, c->n), c->n};
  }
  const std::int64_t n = std::visit([](const auto& p) { return p.n; }, params);
  return {n, n};
}

double SparseSignVector::magnitude() const { return 1.0 / std::sqrt(gamma); }

Vector SparseSignVector::dense() const {
  Vector v = Vector::Zero(n);
  const double a = magnitude();
  for (std::size_t i = 0; i < support.size(); ++i) v(support[i]) = signs[i] * a;
  return v;
}

BalancedPartition sample_balanced_partition(std::int64_t n, int k, Stream& rng) {
  require(k >= 1 && n >= k && n % k == 0, ErrorCode::kDomain, "k must divide n");
  BalancedPartition p;
  p.k = k;
  p.labels.resize(n);
  const std::int64_t block = n / k;
  for (std::int64_t i = 0; i < n; ++i) p.labels[i] = static_cast<int>(i / block);
  for (std::int64_t i = n - 1; i > 0; --i) {
    const auto j = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(i + 1)));
    std::swap(p.labels[i], p.labels[j]);
  }
  return p;
}

SparseSignVector sample_sparse_sign_vector(std::int64_t n, double gamma, Stream& rng) {
  const std::int64_t s = support_size(gamma, n);
  std::vector<std::int64_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::int64_t i = 0; i < s; ++i) {
    const auto j = i + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[i], idx[j]);
  }
  SparseSignVector v;
  v.n = n;
  v.gamma = gamma;
  v.support.assign(idx.begin(), idx.begin() + s);
  std::sort(v.support.begin(), v.support.end());
  v.signs.resize(s);
  for (auto& sign : v.signs) sign = rng.coin() ? 1 : -1;
  return v;
}

Matrix sample_cluster_centers(std::int64_t n, int k, Stream& rng) {
  require(k >= 2, ErrorCode::kDomain, "k must be at least 2");
  const double sd = std::sqrt(static_cast<double>(k) / (k - 1));
  Matrix v(n, k);
  for (std::int64_t i = 0; i < n; ++i) {
    for (int s = 0; s < k; ++s) v(i, s) = sd * rng.normal();
  }
  return v;
}

Matrix sample_noise(std::int64_t rows, std::int64_t cols, bool symmetric, Stream& rng) {
  require(rows >= 0 && cols >= 0, ErrorCode::kInvalidArgument, "negative shape");
  Matrix w(rows, cols);
  if (!symmetric) {
    for (std::int64_t i = 0; i < rows; ++i) {
      for (std::int64_t j = 0; j < cols; ++j) w(i, j) = rng.normal();
    }
    return w;
  }
  require(rows == cols, ErrorCode::kInvalidArgument, "symmetric noise must be square");
  for (std::int64_t i = 0; i < rows; ++i) {
    w(i, i) = std::sqrt(2.0) * rng.normal();
    for (std::int64_t j = i + 1; j < cols; ++j) {
      const double g = rng.normal();
      w(i, j) = g;
      w(j, i) = g;
    }
  }
  return w;
}

GroundTruth sample_truth(const ProblemParams& params, Stream& rng) {
  validate(params);
  return std::visit(
      Overloaded{[&](const SparsePcaParams& p) -> GroundTruth {
                   return sample_sparse_sign_vector(p.n, p.gamma, rng);
                 },
                 [&](const SubmatrixParams& p) -> GroundTruth {
                   return sample_balanced_partition(p.n, p.k, rng);
                 },
                 [&](const ClusteringParams& p) -> GroundTruth {
                   ClusteringTruth t;
                   t.partition = sample_balanced_partition(sample_count(p.alpha, p.n), p.k, rng);
                   t.centers = sample_cluster_centers(p.n, p.k, rng);
                   return t;
                 }},
      params);
}

Matrix build_signal(const ProblemParams& params, const GroundTruth& truth) {
  validate(params);
  if (const auto* p = std::get_if<SparsePcaParams>(&params)) {
    const auto* v = std::get_if<SparseSignVector>(&truth);
    require(v != nullptr, ErrorCode::kInvalidArgument, "sparse PCA needs a sparse sign vector");
    require(v->n == p->n, ErrorCode::kInvalidArgument, "sign vector length mismatch");
    const Vector d = v->dense();
    return (p->lambda / std::sqrt(static_cast<double>(p->n))) * (d * d.transpose());
  }
  if (const auto* p = std::get_if<SubmatrixParams>(&params)) {
    const auto* sigma = std::get_if<BalancedPartition>(&truth);
    require(sigma != nullptr, ErrorCode::kInvalidArgument, "submatrix needs a balanced partition");
    require(sigma->size() == p->n && sigma->k == p->k, ErrorCode::kInvalidArgument,
            "partition shape mismatch");
    const double scale = p->mu / std::sqrt(static_cast<double>(p->n));
    const double off = 1.0 / p->k;
    Matrix m(p->n, p->n);
    for (std::int64_t i = 0; i < p->n; ++i) {
      for (std::int64_t j = 0; j < p->n; ++j) {
        const double y = sigma->labels[i] == sigma->labels[j] ? 1.0 : 0.0;
        m(i, j) = scale * (y - off);
      }
    }
    return m;
  }
  const auto& p = std::get<ClusteringParams>(params);
  const auto* t = std::get_if<ClusteringTruth>(&truth);
  require(t != nullptr, ErrorCode::kInvalidArgument, "clustering needs partition and centers");
  const std::int64_t m = sample_count(p.alpha, p.n);
  require(t->partition.size() == m && t->partition.k == p.k, ErrorCode::kInvalidArgument,
          "partition shape mismatch");
  require(t->centers.rows() == p.n && t->centers.cols() == p.k, ErrorCode::kInvalidArgument,
          "centers shape mismatch");
  Matrix a = Matrix::Constant(m, p.k, -1.0 / p.k);
  for (std::int64_t i = 0; i < m; ++i) a(i, t->partition.labels[i]) += 1.0;
  return std::sqrt(p.rho / static_cast<double>(p.n)) * (a * t->centers.transpose());
}

PlantedInstance generate_instance(const ProblemParams& params, Hypothesis hypothesis,
                                  std::uint64_t seed) {
  validate(params);
  Stream rng(seed);
  PlantedInstance inst;
  inst.params = params;
  inst.hypothesis = hypothesis;
  inst.seed = seed;
  std::optional<Matrix> signal;
  if (hypothesis == Hypothesis::kPlanted) {
    inst.truth = sample_truth(params, rng);
    signal = build_signal(params, *inst.truth);
  }
  const auto [rows, cols] = observed_shape(params);
  inst.x = sample_noise(rows, cols, noise_of(problem_of(params)) == Noise::kWigner, rng);
  if (signal) inst.x += *signal;
  return inst;
}

double expected_signal_norm2(const ProblemParams& params) {
  return std::visit(
      Overloaded{[](const SparsePcaParams& p) { return p.lambda * p.lambda * p.n; },
                 [](const SubmatrixParams& p) {
                   return p.mu * p.mu * static_cast<double>(p.n) * (p.k - 1) /
                          (static_cast<double>(p.k) * p.k);
                 },
                 [](const ClusteringParams& p) {
                   return p.rho * static_cast<double>(sample_count(p.alpha, p.n));
                 }},
      params);
}

ProblemParams round_to_valid(const ProblemParams& params, std::string* note) {
  std::ostringstream msg;
  msg.precision(17);
  ProblemParams out = params;
  std::visit(
      Overloaded{
          [&](SparsePcaParams& p) {
            const double s = std::max(1.0, std::round(p.gamma * p.n));
            const double g = std::min(1.0, s / static_cast<double>(p.n));
            if (g != p.gamma) msg << "gamma snapped from " << p.gamma << " to " << g;
            p.gamma = g;
          },
          [&](SubmatrixParams& p) {
            if (p.k < 2) return;
            const std::int64_t blocks = std::max<std::int64_t>(
                1, std::llround(static_cast<double>(p.n) / p.k));
            const std::int64_t n = blocks * p.k;
            if (n != p.n) msg << "n snapped from " << p.n << " to " << n;
            p.n = n;
          },
          [&](ClusteringParams& p) {
            if (p.k < 2 || p.n < 1) return;
            const std::int64_t blocks =
                std::max<std::int64_t>(1, std::llround(p.alpha * p.n / p.k));
            const double a = static_cast<double>(blocks * p.k) / static_cast<double>(p.n);
            if (a != p.alpha) msg << "alpha snapped from " << p.alpha << " to " << a;
            p.alpha = a;
          }},
      out);
  if (note) *note = msg.str();
  return out;
}

}  // namespace planted
