#include "planted/moments.hpp"

#include <bit>
#include <cmath>
#include <limits>

#include "enumerate.hpp"
#include "planted/detectors.hpp"
#include "planted/error.hpp"
#include "planted/models.hpp"
#include "planted/parallel.hpp"
#include "planted/rng.hpp"

namespace planted {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

MeanEstimate summarize(const std::vector<double>& values) {
  MeanEstimate out;
  out.trials = static_cast<std::int64_t>(values.size());
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / values.size();
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.standard_error = std::sqrt(ss / (values.size() - 1) / values.size());
  }
  return out;
}

// Weighted sum of matrices with weights given in log space. The running sum
// is kept relative to the largest log weight seen so far.
class WeightedMean {
 public:
  WeightedMean(Eigen::Index rows, Eigen::Index cols, bool track)
      : track_(track), acc_(track ? Matrix::Zero(rows, cols) : Matrix()) {}

  // Returns the multiplier to apply to the term being added to acc().
  double add(double log_w) {
    if (log_w <= max_) {
      const double w = std::exp(log_w - max_);
      sum_ += w;
      return w;
    }
    const double shrink = std::exp(max_ - log_w);
    sum_ = sum_ * shrink + 1.0;
    if (track_ && max_ != kNegInf) acc_ *= shrink;
    max_ = log_w;
    return 1.0;
  }

  Matrix& acc() { return acc_; }
  bool tracking() const { return track_; }
  double log_sum() const { return sum_ == 0.0 ? kNegInf : max_ + std::log(sum_); }
  Matrix mean() const { return acc_ / sum_; }

 private:
  bool track_;
  Matrix acc_;
  double max_ = kNegInf;
  double sum_ = 0.0;
};

void require_enumerable(const ProblemParams& params) {
  require(prior_support_size(params) <= kMaxSearch, ErrorCode::kInfeasible,
          "prior enumeration exceeds 2e8 atoms");
}

// Returns log P(X)/Q(X) at signal scale sqrt(beta); fills the posterior mean
// when asked.
double sparse_pca_exact(const Matrix& x, const SparsePcaParams& p, double beta, Matrix* post) {
  const int n = static_cast<int>(p.n);
  const int s = static_cast<int>(support_size(p.gamma, p.n));
  const double nd = static_cast<double>(n);
  const double scale = std::sqrt(beta);
  const double amp = p.lambda / (std::sqrt(nd) * p.gamma);  // M_ij on the support, up to sign
  const double c = 0.5;
  const double energy = c * beta * p.lambda * p.lambda * nd / 2.0;

  WeightedMean wm(n, n, post != nullptr);
  Matrix sub(s, s);
  std::vector<double> g(s);
  std::vector<int> sign(s);
  double count = 0.0;
  detail::for_each_combination(n, s, [&](const std::vector<int>& idx) {
    for (int a = 0; a < s; ++a) {
      for (int b = 0; b < s; ++b) sub(a, b) = x(idx[a], idx[b]);
    }
    std::fill(sign.begin(), sign.end(), 1);
    double q = sub.sum();
    for (int a = 0; a < s; ++a) g[a] = sub.row(a).sum();
    const std::uint64_t steps = s > 1 ? (std::uint64_t{1} << (s - 1)) : 1;
    for (std::uint64_t t = 0; t < steps; ++t) {
      if (t > 0) {
        const int j = std::countr_zero(t) + 1;
        q += -4.0 * sign[j] * g[j] + 4.0 * sub(j, j);
        for (int a = 0; a < s; ++a) g[a] -= 2.0 * sign[j] * sub(a, j);
        sign[j] = -sign[j];
      }
      const double w = wm.add(c * scale * amp * q - energy);
      count += 1.0;
      if (wm.tracking()) {
        Matrix& acc = wm.acc();
        for (int a = 0; a < s; ++a) {
          for (int b = 0; b < s; ++b) acc(idx[a], idx[b]) += w * amp * sign[a] * sign[b];
        }
      }
    }
  });
  if (post) *post = wm.mean();
  return wm.log_sum() - std::log(count);
}

double submatrix_exact(const Matrix& x, const SubmatrixParams& p, double beta, Matrix* post) {
  const int n = static_cast<int>(p.n);
  const double nd = static_cast<double>(n);
  const int k = p.k;
  const double scale = std::sqrt(beta);
  const double amp = p.mu / std::sqrt(nd);
  const double c = 0.5;
  const double energy = c * beta * p.mu * p.mu * nd * (k - 1) / (2.0 * k * k);
  double all = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) all += x(i, j);
  }
  const double diag = x.trace() * (1.0 - 1.0 / k);

  WeightedMean wm(n, n, post != nullptr);
  std::vector<int> current(n, -1);
  std::vector<double> trail(n, 0.0);
  double same = 0.0;
  double count = 0.0;
  detail::walk_balanced(
      n, k,
      [&](int i, int cls) {
        double add = 0.0;
        for (int j = 0; j < i; ++j) {
          if (current[j] == cls) add += x(i, j);
        }
        current[i] = cls;
        trail[i] = add;
        same += add;
      },
      [&](int i, int) {
        same -= trail[i];
        current[i] = -1;
      },
      [&](const std::vector<int>& labels) {
        const double inner = amp * (2.0 * (same - all / k) + diag);
        const double w = wm.add(c * scale * inner - energy);
        count += 1.0;
        if (wm.tracking()) {
          Matrix& acc = wm.acc();
          for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
              if (labels[i] == labels[j]) acc(i, j) += w;
            }
          }
        }
      });
  if (post) {
    *post = amp * (wm.mean().array() - 1.0 / k).matrix();
  }
  return wm.log_sum() - std::log(count);
}

struct ClusteringConstants {
  double log_det;  // -(n(k-1)/2) log(1 + rho beta alpha/(k-1))
  double quad;     // coefficient of sum_s |C_s|^2 - |T|^2/k
  double mean;     // E[M|X,sigma] = mean * (C_sigma(i) - T/k)
};

ClusteringConstants clustering_constants(const ClusteringParams& p, double beta) {
  const double nd = static_cast<double>(p.n);
  const double km1 = p.k - 1.0;
  const double rb = p.rho * beta;
  const double denom = rb * p.alpha + km1;
  ClusteringConstants out;
  out.log_det = -0.5 * nd * km1 * std::log1p(rb * p.alpha / km1);
  out.quad = 0.5 * rb * p.k / (nd * denom);
  out.mean = std::sqrt(beta) * (p.rho / nd) * (p.k / denom);
  return out;
}

double clustering_exact(const Matrix& x, const ClusteringParams& p, double beta, Matrix* post) {
  const std::int64_t m = sample_count(p.alpha, p.n);
  const int k = p.k;
  const ClusteringConstants cc = clustering_constants(p, beta);
  const Eigen::RowVectorXd total = x.colwise().sum();
  const double total2 = total.squaredNorm() / k;
  std::vector<double> row_norm2(m);
  for (std::int64_t i = 0; i < m; ++i) row_norm2[i] = x.row(i).squaredNorm();

  WeightedMean wm(m, p.n, post != nullptr);
  Matrix sums = Matrix::Zero(k, p.n);
  std::vector<double> trail(m, 0.0);
  double class2 = 0.0;
  double count = 0.0;
  detail::walk_balanced(
      static_cast<int>(m), k,
      [&](int i, int cls) {
        const double delta = 2.0 * sums.row(cls).dot(x.row(i)) + row_norm2[i];
        sums.row(cls) += x.row(i);
        trail[i] = delta;
        class2 += delta;
      },
      [&](int i, int cls) {
        sums.row(cls) -= x.row(i);
        class2 -= trail[i];
      },
      [&](const std::vector<int>& labels) {
        const double w = wm.add(cc.log_det + cc.quad * (class2 - total2));
        count += 1.0;
        if (wm.tracking()) {
          Matrix& acc = wm.acc();
          for (std::int64_t i = 0; i < m; ++i) acc.row(i) += w * sums.row(labels[i]);
        }
      });
  if (post) {
    Matrix e = wm.mean();
    e.rowwise() -= total / k;
    *post = cc.mean * e;
  }
  return wm.log_sum() - std::log(count);
}

double exact_dispatch(const Matrix& x, const ProblemParams& params, double beta, Matrix* post) {
  validate(params);
  require(beta >= 0.0, ErrorCode::kDomain, "beta must be nonnegative");
  const auto [rows, cols] = observed_shape(params);
  require(x.rows() == rows && x.cols() == cols, ErrorCode::kInvalidArgument,
          "observed matrix has the wrong shape");
  require_enumerable(params);
  double out = 0.0;
  if (const auto* p = std::get_if<SparsePcaParams>(&params)) {
    out = sparse_pca_exact(x, *p, beta, post);
  } else if (const auto* p = std::get_if<SubmatrixParams>(&params)) {
    out = submatrix_exact(x, *p, beta, post);
  } else {
    out = clustering_exact(x, std::get<ClusteringParams>(params), beta, post);
  }
  require(std::isfinite(out), ErrorCode::kNumeric, "likelihood ratio is not finite");
  return out;
}

// Draws (M, W) for one planted trial.
std::pair<Matrix, Matrix> draw_planted(const ProblemParams& params, Stream& rng) {
  const GroundTruth truth = sample_truth(params, rng);
  Matrix m = build_signal(params, truth);
  const auto [rows, cols] = observed_shape(params);
  Matrix w = sample_noise(rows, cols, problem_of(params) != Problem::kClustering, rng);
  return {std::move(m), std::move(w)};
}

MmseSample evaluate(const ProblemParams& params, const Matrix& m, const Matrix& w, double beta) {
  const double c = noise_factor(problem_of(params));
  const double scale = std::sqrt(beta);
  const Matrix x = scale * m + w;
  Matrix e;
  const double log_lr = exact_dispatch(x, params, beta, &e);
  const double n = static_cast<double>(m.cols());
  const double cond = c * (scale * (x.array() * m.array()).sum() - beta * m.squaredNorm() / 2.0);
  return {(m - e).squaredNorm() / n, e.squaredNorm() / n, (cond - log_lr) / n};
}

}  // namespace

const char* moment_method_name(MomentMethod method) {
  return method == MomentMethod::kExact ? "exact" : "mc";
}

double noise_factor(Problem problem) { return problem == Problem::kClustering ? 1.0 : 0.5; }

double prior_support_size(const ProblemParams& params) {
  validate(params);
  if (const auto* p = std::get_if<SparsePcaParams>(&params)) {
    const auto s = support_size(p->gamma, p->n);
    return std::exp((s - 1) * std::log(2.0) + detail::log_binomial(double(p->n), double(s)));
  }
  auto canonical = [](std::int64_t n, int k) {
    const double b = static_cast<double>(n / k);
    return std::exp(std::lgamma(n + 1.0) - k * std::lgamma(b + 1.0) - std::lgamma(k + 1.0));
  };
  if (const auto* p = std::get_if<SubmatrixParams>(&params)) return canonical(p->n, p->k);
  const auto& c = std::get<ClusteringParams>(params);
  return canonical(sample_count(c.alpha, c.n), c.k);
}

double likelihood_ratio_exact(const Matrix& x, const ProblemParams& params, double beta) {
  return exact_dispatch(x, params, beta, nullptr);
}

double clustering_partition_llr(const Matrix& x, const ClusteringParams& params,
                                const BalancedPartition& sigma, double beta) {
  validate(params);
  const std::int64_t m = sample_count(params.alpha, params.n);
  require(x.rows() == m && x.cols() == params.n && sigma.size() == m && sigma.k == params.k,
          ErrorCode::kInvalidArgument, "shape mismatch");
  const ClusteringConstants cc = clustering_constants(params, beta);
  Matrix sums = Matrix::Zero(params.k, params.n);
  for (std::int64_t i = 0; i < m; ++i) sums.row(sigma.labels[i]) += x.row(i);
  const double total2 = x.colwise().sum().squaredNorm() / params.k;
  return cc.log_det + cc.quad * (sums.squaredNorm() - total2);
}

MomentReport second_moment_sparse_pca(const SparsePcaParams& params) {
  validate(params);
  const std::int64_t n = params.n;
  const std::int64_t s = support_size(params.gamma, n);
  const detail::LogFactorials lf(n);
  auto log_choose = [&](std::int64_t a, std::int64_t b) { return lf(a) - lf(b) - lf(a - b); };
  const double rate = params.lambda * params.lambda / (2.0 * static_cast<double>(n));
  const double log2 = std::log(2.0);
  detail::LogSumExp total;
  for (std::int64_t z = std::max<std::int64_t>(0, 2 * s - n); z <= s; ++z) {
    const double log_pz = log_choose(s, z) + log_choose(n - s, s - z) - log_choose(n, s);
    for (std::int64_t j = 0; j <= z; ++j) {
      const double overlap = static_cast<double>(z - 2 * j) / params.gamma;
      total.add(log_pz + log_choose(z, j) - z * log2 + rate * overlap * overlap);
    }
  }
  MomentReport out;
  out.params = params;
  out.method = MomentMethod::kExact;
  out.log_value = total.value();
  out.value = std::exp(out.log_value);
  return out;
}

MomentReport second_moment_submatrix(const SubmatrixParams& params) {
  validate(params);
  const int k = params.k;
  const std::int64_t n = params.n;
  const std::int64_t b = n / k;
  const detail::LogFactorials lf(n);
  const double nd = static_cast<double>(n);
  const double rate = params.mu * params.mu * nd / (2.0 * k * k);
  const double base = 2.0 * k * lf(b) - lf(n);

  // Count matrices with all row and column sums equal to b, filled row-major.
  std::vector<std::int64_t> col_left(k, b);
  detail::LogSumExp total;
  double log_prod = 0.0;  // sum of log Omega_st!
  double squares = 0.0;   // sum of Omega_st^2
  auto fill = [&](auto&& self, int r, int c, std::int64_t row_left) -> void {
    if (r == k) {
      const double omega2 = static_cast<double>(k) * k * squares / (nd * nd);
      total.add(base - log_prod + rate * (omega2 - 1.0));
      return;
    }
    if (c == k - 1) {
      if (row_left > col_left[c]) return;
      const std::int64_t v = row_left;
      col_left[c] -= v;
      log_prod += lf(v);
      squares += double(v) * v;
      self(self, r + 1, 0, b);
      squares -= double(v) * v;
      log_prod -= lf(v);
      col_left[c] += v;
      return;
    }
    const std::int64_t hi = std::min(row_left, col_left[c]);
    for (std::int64_t v = 0; v <= hi; ++v) {
      col_left[c] -= v;
      log_prod += lf(v);
      squares += double(v) * v;
      self(self, r, c + 1, row_left - v);
      squares -= double(v) * v;
      log_prod -= lf(v);
      col_left[c] += v;
    }
  };
  fill(fill, 0, 0, b);

  MomentReport out;
  out.params = params;
  out.method = MomentMethod::kExact;
  out.log_value = total.value();
  out.value = std::exp(out.log_value);
  return out;
}

MomentReport second_moment_mc(const ProblemParams& params, std::int64_t trials,
                              std::uint64_t seed, int threads) {
  validate(params);
  require(trials >= 2, ErrorCode::kInvalidArgument, "at least two trials are required");
  const double c = noise_factor(problem_of(params));
  std::vector<double> values(trials);
  parallel_for(trials, threads, [&](std::int64_t t) {
    Stream rng = Stream::substream(seed, static_cast<std::uint64_t>(t));
    const Matrix m1 = build_signal(params, sample_truth(params, rng));
    const Matrix m2 = build_signal(params, sample_truth(params, rng));
    values[t] = std::exp(c * (m1.array() * m2.array()).sum());
  });
  const MeanEstimate est = summarize(values);
  MomentReport out;
  out.params = params;
  out.method = MomentMethod::kMc;
  out.value = est.mean;
  out.log_value = std::log(est.mean);
  out.standard_error = est.standard_error;
  out.trials = trials;
  return out;
}

Matrix posterior_mean_exact(const Matrix& x, const ProblemParams& params, double beta) {
  Matrix e;
  exact_dispatch(x, params, beta, &e);
  return e;
}

std::vector<MmseReport> mmse_curve(const ProblemParams& params, const std::vector<double>& betas,
                                   std::int64_t trials, std::uint64_t seed, int threads,
                                   std::vector<std::vector<MmseSample>>* samples) {
  validate(params);
  require(trials >= 2, ErrorCode::kInvalidArgument, "at least two trials are required");
  for (double b : betas) {
    require(b >= 0.0 && b <= 1.0, ErrorCode::kDomain, "beta must lie in [0, 1]");
  }
  require_enumerable(params);
  const std::size_t nb = betas.size();
  std::vector<MmseSample> slots(static_cast<std::size_t>(trials) * nb);
  parallel_for(trials, threads, [&](std::int64_t t) {
    Stream rng = Stream::substream(seed, static_cast<std::uint64_t>(t));
    const auto [m, w] = draw_planted(params, rng);
    for (std::size_t b = 0; b < nb; ++b) slots[t * nb + b] = evaluate(params, m, w, betas[b]);
  });
  std::vector<MmseReport> out(nb);
  std::vector<double> a(trials), p(trials), i(trials);
  for (std::size_t b = 0; b < nb; ++b) {
    for (std::int64_t t = 0; t < trials; ++t) {
      a[t] = slots[t * nb + b].mmse;
      p[t] = slots[t * nb + b].posterior_norm;
      i[t] = slots[t * nb + b].info;
    }
    const MeanEstimate ea = summarize(a), ep = summarize(p), ei = summarize(i);
    out[b] = {betas[b], ea.mean, ea.standard_error, ep.mean, ep.standard_error,
              ei.mean, ei.standard_error, trials};
  }
  if (samples) {
    samples->assign(nb, std::vector<MmseSample>(trials));
    for (std::size_t b = 0; b < nb; ++b) {
      for (std::int64_t t = 0; t < trials; ++t) (*samples)[b][t] = slots[t * nb + b];
    }
  }
  return out;
}

MeanEstimate immse_residual(const ProblemParams& params, double beta, double h,
                            std::int64_t trials, std::uint64_t seed, int threads) {
  validate(params);
  require(h > 0.0 && beta - h >= 0.0, ErrorCode::kDomain, "need 0 <= beta - h and h > 0");
  require_enumerable(params);
  const double c = noise_factor(problem_of(params));
  std::vector<double> values(trials);
  parallel_for(trials, threads, [&](std::int64_t t) {
    Stream rng = Stream::substream(seed, static_cast<std::uint64_t>(t));
    const auto [m, w] = draw_planted(params, rng);
    const MmseSample lo = evaluate(params, m, w, beta - h);
    const MmseSample mid = evaluate(params, m, w, beta);
    const MmseSample hi = evaluate(params, m, w, beta + h);
    values[t] = (hi.info - lo.info) / (2.0 * h) - 0.5 * c * mid.mmse;
  });
  return summarize(values);
}

MeanEstimate nishimori_gap(const ProblemParams& params, std::int64_t trials, std::uint64_t seed,
                           int threads) {
  validate(params);
  require_enumerable(params);
  std::vector<double> values(trials);
  parallel_for(trials, threads, [&](std::int64_t t) {
    Stream rng = Stream::substream(seed, static_cast<std::uint64_t>(t));
    const auto [m, w] = draw_planted(params, rng);
    Matrix e;
    exact_dispatch(m + w, params, 1.0, &e);
    values[t] = (m.array() * e.array()).sum() - e.squaredNorm();
  });
  return summarize(values);
}

MeanEstimate first_moment_null(const ProblemParams& params, std::int64_t trials,
                               std::uint64_t seed, int threads) {
  validate(params);
  require_enumerable(params);
  const auto [rows, cols] = observed_shape(params);
  const bool symmetric = problem_of(params) != Problem::kClustering;
  std::vector<double> values(trials);
  parallel_for(trials, threads, [&](std::int64_t t) {
    Stream rng = Stream::substream(seed, static_cast<std::uint64_t>(t));
    const Matrix x = sample_noise(rows, cols, symmetric, rng);
    values[t] = std::exp(likelihood_ratio_exact(x, params));
  });
  return summarize(values);
}

MeanEstimate conditioning_event_rate(const ProblemParams& params, std::int64_t trials,
                                     std::uint64_t seed, const EventOptions& options,
                                     int threads) {
  validate(params);
  require(trials >= 1, ErrorCode::kInvalidArgument, "trials must be positive");
  require(options.noise_scale >= 0.0 && options.factor >= 0.0, ErrorCode::kDomain,
          "factor and noise scale must be nonnegative");
  require(problem_of(params) != Problem::kClustering, ErrorCode::kInvalidArgument,
          "conditioning events are defined for sparse PCA and submatrix only");

  auto spectral_norm = [](const Matrix& a) {
    if (a.rows() == 0) return 0.0;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(a),
                                                            Eigen::EigenvaluesOnly);
    return std::max(std::abs(es.eigenvalues()(0)),
                    std::abs(es.eigenvalues()(es.eigenvalues().size() - 1)));
  };

  std::vector<double> values(trials);
  // A principal submatrix of a Wigner matrix on a fixed index set is itself
  // Wigner, so only the restricted noise is drawn.
  if (const auto* p = std::get_if<SparsePcaParams>(&params)) {
    const double factor = options.factor > 0.0 ? options.factor : 2.1;
    const std::int64_t s = support_size(p->gamma, p->n);
    const double limit = factor * std::sqrt(static_cast<double>(p->n) * p->gamma);
    parallel_for(trials, threads, [&](std::int64_t t) {
      Stream rng = Stream::substream(seed, static_cast<std::uint64_t>(t));
      const Matrix w = options.noise_scale * sample_noise(s, s, true, rng);
      values[t] = spectral_norm(w) <= limit ? 1.0 : 0.0;
    });
  } else {
    const auto& q = std::get<SubmatrixParams>(params);
    const double factor = options.factor > 0.0 ? options.factor : 3.0;
    const std::int64_t b = q.n / q.k;
    const double limit = factor * std::sqrt(static_cast<double>(b));
    parallel_for(trials, threads, [&](std::int64_t t) {
      Stream rng = Stream::substream(seed, static_cast<std::uint64_t>(t));
      bool ok = true;
      for (int block = 0; block < q.k; ++block) {
        const Matrix w = options.noise_scale * sample_noise(b, b, true, rng);
        ok = ok && spectral_norm(w) <= limit;
      }
      values[t] = ok ? 1.0 : 0.0;
    });
  }
  return summarize(values);
}

}  // namespace planted
