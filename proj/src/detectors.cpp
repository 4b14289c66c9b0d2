#include "planted/detectors.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "enumerate.hpp"
#include "planted/error.hpp"
#include "planted/models.hpp"

namespace planted {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigensolve(const Matrix& sym, bool vectors) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
      Eigen::MatrixXd(sym), vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  require(es.info() == Eigen::Success, ErrorCode::kNumeric, "symmetric eigensolver did not converge");
  return es;
}

// Exact O(k^3) assignment (Hungarian method, potentials form); returns
// assignment[row] = column maximizing the total weight.
std::vector<int> max_weight_assignment(const Matrix& w) {
  const int k = static_cast<int>(w.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(k + 1, 0.0), v(k + 1, 0.0);
  std::vector<int> p(k + 1, 0), way(k + 1, 0);
  for (int i = 1; i <= k; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(k + 1, inf);
    std::vector<char> used(k + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= k; ++j) {
        if (used[j]) continue;
        const double cur = -w(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= k; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(k);
  for (int j = 1; j <= k; ++j) assignment[p[j] - 1] = j - 1;
  return assignment;
}

void require_square_symmetric(const Matrix& x, std::int64_t n) {
  require(x.rows() == n && x.cols() == n, ErrorCode::kInvalidArgument,
          "observed matrix must be n x n");
}

}  // namespace

const char* detector_name(Detector detector) {
  return detector == Detector::kSpectral ? "spectral" : "glr";
}

double conditional_llr(const Matrix& x, const Matrix& m, Noise noise) {
  require(x.rows() == m.rows() && x.cols() == m.cols(), ErrorCode::kInvalidArgument,
          "shape mismatch between X and M");
  const double inner = (x.array() * m.array()).sum();
  const double norm2 = m.squaredNorm();
  if (noise == Noise::kWigner) return 0.5 * inner - 0.25 * norm2;
  return inner - 0.5 * norm2;
}

double top_eigenvalue(const Matrix& sym) {
  require(sym.rows() == sym.cols(), ErrorCode::kInvalidArgument, "matrix must be square");
  if (sym.rows() == 0) return 0.0;
  const auto es = eigensolve(sym, false);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

double spectral_statistic(const Matrix& x, const ProblemParams& params) {
  validate(params);
  const auto [rows, cols] = observed_shape(params);
  require(x.rows() == rows && x.cols() == cols, ErrorCode::kInvalidArgument,
          "observed matrix has the wrong shape");
  if (problem_of(params) == Problem::kClustering) {
    const Matrix gram = (x.transpose() * x) / static_cast<double>(rows);
    return top_eigenvalue(gram);
  }
  return top_eigenvalue(x / std::sqrt(static_cast<double>(cols)));
}

SpectralLimits spectral_limits(const ProblemParams& params) {
  SpectralLimits lim;
  if (const auto* p = std::get_if<SparsePcaParams>(&params)) {
    lim.null_limit = 2.0;
    lim.indistinguishable = p->lambda <= 1.0;
    lim.planted_limit = lim.indistinguishable ? 2.0 : p->lambda + 1.0 / p->lambda;
  } else if (const auto* p = std::get_if<SubmatrixParams>(&params)) {
    lim.null_limit = 2.0;
    lim.indistinguishable = p->mu <= p->k;
    lim.planted_limit = lim.indistinguishable ? 2.0 : p->mu / p->k + p->k / p->mu;
  } else {
    const auto& c = std::get<ClusteringParams>(params);
    const double km1 = c.k - 1.0;
    const double root = 1.0 + 1.0 / std::sqrt(c.alpha);
    lim.null_limit = root * root;
    lim.indistinguishable = c.rho * std::sqrt(c.alpha) <= km1;
    lim.planted_limit = lim.indistinguishable
                            ? lim.null_limit
                            : (1.0 + c.rho / km1) * (1.0 + km1 / (c.rho * c.alpha));
  }
  return lim;
}

DetectionOutcome spectral_detect(const Matrix& x, const ProblemParams& params) {
  const auto t0 = Clock::now();
  DetectionOutcome out;
  out.detector = Detector::kSpectral;
  out.statistic = spectral_statistic(x, params);
  const SpectralLimits lim = spectral_limits(params);
  out.threshold = 0.5 * (lim.null_limit + lim.planted_limit);
  out.spectrally_indistinguishable = lim.indistinguishable;
  out.decision = out.statistic >= out.threshold ? Hypothesis::kPlanted : Hypothesis::kNull;
  out.elapsed_seconds = seconds_since(t0);
  return out;
}

double glr_search_space(const ProblemParams& params) {
  validate(params);
  if (const auto* p = std::get_if<SparsePcaParams>(&params)) {
    const auto s = support_size(p->gamma, p->n);
    return std::exp(s * std::log(2.0) + detail::log_binomial(double(p->n), double(s)));
  }
  if (const auto* p = std::get_if<SubmatrixParams>(&params)) {
    return std::pow(double(p->k), double(p->n));
  }
  const auto& c = std::get<ClusteringParams>(params);
  return std::pow(double(c.k), double(sample_count(c.alpha, c.n)));
}

double submatrix_statistic(const Matrix& x, const BalancedPartition& sigma) {
  const auto n = sigma.size();
  require(x.rows() == n && x.cols() == n, ErrorCode::kInvalidArgument, "shape mismatch");
  double same = 0.0;
  double all = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = i + 1; j < n; ++j) {
      all += x(i, j);
      if (sigma.labels[i] == sigma.labels[j]) same += x(i, j);
    }
  }
  return same - all / sigma.k;
}

double clustering_statistic(const Matrix& x, const BalancedPartition& sigma) {
  const auto m = sigma.size();
  require(x.rows() == m, ErrorCode::kInvalidArgument, "shape mismatch");
  Matrix sums = Matrix::Zero(sigma.k, x.cols());
  for (std::int64_t i = 0; i < m; ++i) sums.row(sigma.labels[i]) += x.row(i);
  return static_cast<double>(sigma.k) / static_cast<double>(m) * sums.squaredNorm();
}

namespace {

GlrResult glr_sparse_pca(const Matrix& x, const SparsePcaParams& p) {
  const int n = static_cast<int>(p.n);
  const int s = static_cast<int>(support_size(p.gamma, p.n));
  require_square_symmetric(x, p.n);

  double best = -std::numeric_limits<double>::infinity();
  std::vector<int> best_support;
  std::uint64_t best_mask = 0;

  Matrix sub(s, s);
  std::vector<double> g(s);
  std::vector<int> sign(s);
  detail::for_each_combination(n, s, [&](const std::vector<int>& idx) {
    for (int a = 0; a < s; ++a) {
      for (int b = 0; b < s; ++b) sub(a, b) = x(idx[a], idx[b]);
    }
    std::fill(sign.begin(), sign.end(), 1);
    double q = sub.sum();
    for (int a = 0; a < s; ++a) g[a] = sub.row(a).sum();
    std::uint64_t mask = 0;

    // Local best over the Gray-code walk; ties resolved to the smaller mask.
    double local = q;
    std::uint64_t local_mask = 0;
    const std::uint64_t steps = s > 1 ? (std::uint64_t{1} << (s - 1)) : 1;
    for (std::uint64_t t = 1; t < steps; ++t) {
      const int bit = std::countr_zero(t);
      const int j = bit + 1;  // the first support sign stays +1
      q += -4.0 * sign[j] * g[j] + 4.0 * sub(j, j);
      for (int a = 0; a < s; ++a) g[a] -= 2.0 * sign[j] * sub(a, j);
      sign[j] = -sign[j];
      mask ^= std::uint64_t{1} << j;
      if (q > local || (q == local && mask < local_mask)) {
        local = q;
        local_mask = mask;
      }
    }
    if (local > best) {
      best = local;
      best_support = idx;
      best_mask = local_mask;
    }
  });

  SparseSignVector v;
  v.n = p.n;
  v.gamma = p.gamma;
  v.support.assign(best_support.begin(), best_support.end());
  v.signs.resize(s);
  for (int a = 0; a < s; ++a) v.signs[a] = (best_mask >> a) & 1 ? -1 : 1;
  // v^T X v = (1/gamma) s^T X_S s
  const double quad = best / p.gamma;
  const double nd = static_cast<double>(p.n);
  GlrResult out;
  out.best_truth = v;
  out.best_statistic = p.lambda / (2.0 * std::sqrt(nd)) * quad - p.lambda * p.lambda * nd / 4.0;
  return out;
}

GlrResult glr_submatrix(const Matrix& x, const SubmatrixParams& p) {
  require_square_symmetric(x, p.n);
  const int n = static_cast<int>(p.n);
  double all = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) all += x(i, j);
  }
  std::vector<int> labels;
  double same = 0.0;
  double best = -std::numeric_limits<double>::infinity();
  std::vector<int> current(n, -1);
  std::vector<double> trail(n, 0.0);
  detail::walk_balanced(
      n, p.k,
      [&](int i, int c) {
        double add = 0.0;
        for (int j = 0; j < i; ++j) {
          if (current[j] == c) add += x(i, j);
        }
        current[i] = c;
        trail[i] = add;
        same += add;
      },
      [&](int i, int) {
        same -= trail[i];
        current[i] = -1;
      },
      [&](const std::vector<int>& l) {
        if (same > best) {
          best = same;
          labels = l;
        }
      });
  GlrResult out;
  out.best_truth = BalancedPartition{p.k, labels};
  out.best_statistic = best - all / p.k;
  return out;
}

GlrResult glr_clustering(const Matrix& x, const ClusteringParams& p) {
  const std::int64_t m = sample_count(p.alpha, p.n);
  require(x.rows() == m && x.cols() == p.n, ErrorCode::kInvalidArgument,
          "observed matrix must be m x n");
  Matrix sums = Matrix::Zero(p.k, p.n);
  std::vector<double> row_norm2(m);
  for (std::int64_t i = 0; i < m; ++i) row_norm2[i] = x.row(i).squaredNorm();
  double total = 0.0;  // sum_s ||C_s||^2
  std::vector<double> trail(m, 0.0);
  double best = -std::numeric_limits<double>::infinity();
  std::vector<int> labels;
  detail::walk_balanced(
      static_cast<int>(m), p.k,
      [&](int i, int c) {
        const double delta = 2.0 * sums.row(c).dot(x.row(i)) + row_norm2[i];
        sums.row(c) += x.row(i);
        trail[i] = delta;
        total += delta;
      },
      [&](int i, int c) {
        sums.row(c) -= x.row(i);
        total -= trail[i];
      },
      [&](const std::vector<int>& l) {
        if (total > best) {
          best = total;
          labels = l;
        }
      });
  ClusteringTruth truth;
  truth.partition = BalancedPartition{p.k, labels};
  // Maximum-likelihood centers given the partition: v_s - vbar proportional
  // to the class sum.
  truth.centers = Matrix::Zero(p.n, p.k);
  if (p.rho > 0.0) {
    Matrix s = Matrix::Zero(p.k, p.n);
    for (std::int64_t i = 0; i < m; ++i) s.row(labels[i]) += x.row(i);
    const double scale =
        p.k * std::sqrt(static_cast<double>(p.n)) / (static_cast<double>(m) * std::sqrt(p.rho));
    truth.centers = scale * s.transpose();
  }
  GlrResult out;
  out.best_truth = truth;
  out.best_statistic = static_cast<double>(p.k) / static_cast<double>(m) * best;
  return out;
}

}  // namespace

GlrResult glr_search(const Matrix& x, const ProblemParams& params) {
  const double space = glr_search_space(params);
  require(space <= kMaxSearch, ErrorCode::kInfeasible,
          "exhaustive search space exceeds 2e8 candidates");
  if (const auto* p = std::get_if<SparsePcaParams>(&params)) return glr_sparse_pca(x, *p);
  if (const auto* p = std::get_if<SubmatrixParams>(&params)) return glr_submatrix(x, *p);
  return glr_clustering(x, std::get<ClusteringParams>(params));
}

double glr_threshold(const ProblemParams& params) {
  validate(params);
  if (const auto* p = std::get_if<SparsePcaParams>(&params)) {
    const double n = static_cast<double>(p->n);
    const double l2n = p->lambda * p->lambda * n;
    return l2n / 4.0 - 3.0 * std::sqrt(l2n * std::log(n) / 2.0);
  }
  if (const auto* p = std::get_if<SubmatrixParams>(&params)) {
    const double n = static_cast<double>(p->n);
    const double k = p->k;
    return std::pow(n, 1.5) * p->mu * (k - 1.0) / (2.0 * k * k) -
           3.0 * n * std::sqrt((k - 1.0) * std::log(n) / 2.0) / k;
  }
  const auto& c = std::get<ClusteringParams>(params);
  const double n = static_cast<double>(c.n);
  const double m = static_cast<double>(sample_count(c.alpha, c.n));
  const double k = c.k;
  const double planted = n * k + n * c.alpha * c.rho;
  const double null_max = n * k + 2.0 * std::sqrt(n * k * m * std::log(k)) + 2.0 * m * std::log(k);
  return 0.5 * (planted + null_max);
}

DetectionOutcome glr_detect(const Matrix& x, const ProblemParams& params) {
  const auto t0 = Clock::now();
  DetectionOutcome out;
  out.detector = Detector::kGlr;
  out.statistic = glr_search(x, params).best_statistic;
  out.threshold = glr_threshold(params);
  out.decision = out.statistic >= out.threshold ? Hypothesis::kPlanted : Hypothesis::kNull;
  out.elapsed_seconds = seconds_since(t0);
  return out;
}

double trace_overlap(const Matrix& omega) {
  const int k = static_cast<int>(omega.rows());
  require(omega.cols() == k, ErrorCode::kInvalidArgument, "omega must be square");
  if (k <= 8) {
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    double best = -std::numeric_limits<double>::infinity();
    do {
      double tr = 0.0;
      for (int s = 0; s < k; ++s) tr += omega(s, perm[s]);
      best = std::max(best, tr);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  }
  const auto assignment = max_weight_assignment(omega);
  double tr = 0.0;
  for (int s = 0; s < k; ++s) tr += omega(s, assignment[s]);
  return tr;
}

OverlapMatrix overlap_matrix(const BalancedPartition& sigma, const BalancedPartition& tau) {
  require(sigma.size() == tau.size() && sigma.k == tau.k, ErrorCode::kInvalidArgument,
          "partitions differ in size or class count");
  const int k = sigma.k;
  const double block = static_cast<double>(sigma.size()) / k;
  OverlapMatrix out;
  Matrix counts = Matrix::Zero(k, k);
  for (std::int64_t i = 0; i < sigma.size(); ++i) counts(sigma.labels[i], tau.labels[i]) += 1.0;
  out.omega = counts / block;
  out.l2 = out.omega.squaredNorm();
  out.trace = trace_overlap(out.omega);
  return out;
}

double vector_overlap(const SparseSignVector& v, const SparseSignVector& v0) {
  require(v.n == v0.n, ErrorCode::kInvalidArgument, "vectors differ in length");
  double agree = 0.0;
  std::size_t a = 0, b = 0;
  while (a < v.support.size() && b < v0.support.size()) {
    if (v.support[a] == v0.support[b]) {
      agree += v.signs[a] * v0.signs[b];
      ++a;
      ++b;
    } else if (v.support[a] < v0.support[b]) {
      ++a;
    } else {
      ++b;
    }
  }
  return agree * v.magnitude() * v0.magnitude() / static_cast<double>(v.n);
}

BalancedPartition greedy_balanced_assignment(const Matrix& similarity, int k) {
  const auto n = similarity.rows();
  require(similarity.cols() == n && k >= 1 && n % k == 0, ErrorCode::kInvalidArgument,
          "similarity must be square with k dividing its size");
  const auto block = n / k;
  BalancedPartition out;
  out.k = k;
  out.labels.assign(n, -1);
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < n; ++i) free.push_back(i);
  for (int c = 0; c < k; ++c) {
    const Eigen::Index anchor = free.front();
    std::vector<Eigen::Index> order(free.begin() + 1, free.end());
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return similarity(anchor, a) > similarity(anchor, b);
    });
    out.labels[anchor] = c;
    for (Eigen::Index t = 0; t + 1 < block; ++t) out.labels[order[t]] = c;
    std::vector<Eigen::Index> rest;
    for (auto i : free) {
      if (out.labels[i] < 0) rest.push_back(i);
    }
    free = std::move(rest);
  }
  return out;
}

Reconstruction pca_reconstruct(const Matrix& x, const ProblemParams& params) {
  validate(params);
  const auto [rows, cols] = observed_shape(params);
  require(x.rows() == rows && x.cols() == cols, ErrorCode::kInvalidArgument,
          "observed matrix has the wrong shape");
  Reconstruction out;
  if (const auto* p = std::get_if<SparsePcaParams>(&params)) {
    const auto es = eigensolve(x, true);
    const Vector u = es.eigenvectors().col(p->n - 1) * std::sqrt(static_cast<double>(p->n));
    out.raw_embedding = u;
    const auto s = support_size(p->gamma, p->n);
    std::vector<std::int64_t> order(p->n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
      return std::abs(u(a)) > std::abs(u(b));
    });
    SparseSignVector v;
    v.n = p->n;
    v.gamma = p->gamma;
    v.support.assign(order.begin(), order.begin() + s);
    std::sort(v.support.begin(), v.support.end());
    for (auto i : v.support) v.signs.push_back(u(i) < 0 ? -1 : 1);
    out.estimate = v;
    return out;
  }

  const int k = std::visit(
      [](const auto& p) -> int {
        if constexpr (requires { p.k; }) return p.k; else return 2;
      },
      params);
  // The centered signal has rank k-1; project onto the top k-1 eigenvectors.
  const Matrix sym = problem_of(params) == Problem::kClustering ? Matrix(x * x.transpose()) : x;
  const auto es = eigensolve(sym, true);
  const auto size = sym.rows();
  const Matrix basis = es.eigenvectors().rightCols(k - 1);
  out.raw_embedding = basis;
  const Matrix projector = basis * basis.transpose();
  BalancedPartition sigma = greedy_balanced_assignment(projector, k);
  if (const auto* c = std::get_if<ClusteringParams>(&params)) {
    ClusteringTruth t;
    t.partition = sigma;
    t.centers = Matrix::Zero(c->n, k);
    if (c->rho > 0.0) {
      Matrix sums = Matrix::Zero(k, c->n);
      for (Eigen::Index i = 0; i < size; ++i) sums.row(sigma.labels[i]) += x.row(i);
      const double scale = k * std::sqrt(static_cast<double>(c->n)) /
                           (static_cast<double>(size) * std::sqrt(c->rho));
      t.centers = scale * sums.transpose();
    }
    out.estimate = t;
  } else {
    out.estimate = sigma;
  }
  return out;
}

SplitEstimate sample_split_cluster_estimate(const Matrix& x, const ClusteringParams& params,
                                            double delta) {
  validate(params);
  require(delta > 0.0 && delta < 1.0, ErrorCode::kDomain, "delta must lie in (0, 1)");
  const std::int64_t m = sample_count(params.alpha, params.n);
  require(x.rows() == m && x.cols() == params.n, ErrorCode::kInvalidArgument,
          "observed matrix must be m x n");
  const auto n1 = static_cast<std::int64_t>(std::llround((1.0 - delta) * params.n));
  require(n1 >= 1 && n1 < params.n, ErrorCode::kDomain,
          "delta leaves an empty block after rounding");

  ClusteringParams first = params;
  first.n = n1;
  first.alpha = static_cast<double>(m) / static_cast<double>(n1);
  first.rho = params.rho * static_cast<double>(n1) / static_cast<double>(params.n);
  const Matrix x1 = x.leftCols(n1);

  SplitEstimate out;
  if (glr_search_space(first) <= kMaxSearch) {
    out.sigma_hat = std::get<ClusteringTruth>(glr_search(x1, first).best_truth).partition;
  } else {
    out.spectral_surrogate = true;
    out.sigma_hat = std::get<ClusteringTruth>(pca_reconstruct(x1, first).estimate).partition;
  }
  Matrix s = Matrix::Zero(m, params.k);
  for (std::int64_t i = 0; i < m; ++i) s(i, out.sigma_hat.labels[i]) = 1.0;
  out.m_hat = Matrix::Zero(m, params.n);
  out.m_hat.rightCols(params.n - n1) =
      (static_cast<double>(params.k) / static_cast<double>(m)) * s * (s.transpose() * x.rightCols(params.n - n1));
  return out;
}

}  // namespace planted
