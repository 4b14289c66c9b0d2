#include "planted/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "planted/error.hpp"

namespace planted {

namespace {

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

// Below this the third branch of the sparse PCA lower bound applies.
const double kTinyGammaCutoff = std::exp(-41.0) / 81.0;

}  // namespace

double entropy(double gamma) {
  require(gamma >= 0.0 && gamma <= 1.0, ErrorCode::kDomain, "entropy needs gamma in [0, 1]");
  return -xlogx(gamma) - xlogx(1.0 - gamma);
}

double bernoulli_kl(double p0, double p1) {
  require(p0 > 0.0 && p0 < 1.0, ErrorCode::kDomain, "bernoulli_kl needs 0 < p0 < 1");
  require(p1 >= 0.0 && p1 <= 1.0, ErrorCode::kDomain, "bernoulli_kl needs 0 <= p1 <= 1");
  double out = 0.0;
  if (p1 > 0.0) out += p1 * std::log(p1 / p0);
  if (p1 < 1.0) out += (1.0 - p1) * std::log((1.0 - p1) / (1.0 - p0));
  return out;
}

double lambert_w(double y) {
  require(y >= 0.0 && !std::isnan(y), ErrorCode::kDomain, "lambert_w needs y >= 0");
  if (y == 0.0) return 0.0;
  if (std::isinf(y)) return y;
  if (y > std::numbers::e) {
    // Newton on x + log x = log y, which stays well scaled for large y.
    const double ly = std::log(y);
    const double l2 = std::log(ly);
    double x = ly - l2 + l2 / ly;
    for (int it = 0; it < 100; ++it) {
      const double g = x + std::log(x) - ly;
      const double step = g / (1.0 + 1.0 / x);
      x -= step;
      if (std::abs(step) <= 4 * std::numeric_limits<double>::epsilon() * x) break;
    }
    return x;
  }
  // Halley on x e^x - y.
  double x = std::log1p(y);
  for (int it = 0; it < 100; ++it) {
    const double ex = std::exp(x);
    const double f = x * ex - y;
    const double fp = ex * (x + 1.0);
    const double step = f / (fp - (x + 2.0) * f / (2.0 * x + 2.0));
    x -= step;
    if (std::abs(step) <= 4 * std::numeric_limits<double>::epsilon() * std::max(x, 1e-300)) break;
  }
  return x;
}

double sparse_pca_lambert_bound(double gamma) {
  require(gamma > 0.0 && gamma <= 1.0, ErrorCode::kDomain, "gamma must lie in (0, 1]");
  const double y = 1.0 / (2.0 * std::sqrt(std::numbers::e) * gamma);
  return std::sqrt(2.0 * gamma * lambert_w(y));
}

double psi(double zeta, const PsiContext& ctx) {
  const double g = ctx.gamma;
  require(g > 0.0 && g < 1.0, ErrorCode::kDomain, "psi needs 0 < gamma < 1");
  require(zeta > 0.0 && zeta <= g, ErrorCode::kDomain, "psi needs zeta in (0, gamma]");
  const double eta = ctx.eta();
  const double gap = g - zeta;
  double out = (eta * eta * zeta - 1.0) * zeta / 2.0 - zeta * std::log(zeta / g) + g * std::log(g);
  if (gap > 0.0) out -= gap * std::log(gap / (1.0 - g));
  return out;
}

double psi_derivative(double zeta, const PsiContext& ctx) {
  const double g = ctx.gamma;
  const double eta = ctx.eta();
  return eta * eta * zeta - 0.5 - std::log(zeta * (1.0 - g) / (g * (g - zeta)));
}

double psi_max(const PsiContext& ctx) {
  const double g = ctx.gamma;
  const double a = g * g / (ctx.lambda * ctx.lambda);
  const double b = g;
  if (a > b) return -std::numeric_limits<double>::infinity();
  if (a == b) return psi(b, ctx);

  // Geometric plus uniform hybrid grid; psi has at most three interior
  // critical points, so the grid brackets the global maximum.
  constexpr int kHalf = 2048;
  std::vector<double> grid;
  grid.reserve(2 * kHalf);
  const double ratio = std::log(b / a);
  for (int i = 0; i < kHalf; ++i) {
    const double f = static_cast<double>(i) / (kHalf - 1);
    grid.push_back(a * std::exp(ratio * f));
    grid.push_back(a + (b - a) * f);
  }
  grid.front() = a;
  std::sort(grid.begin(), grid.end());
  grid.back() = b;

  std::size_t best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double z = std::clamp(grid[i], a, b);
    const double v = psi(z, ctx);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }

  // Newton polish on psi' inside the bracketing grid cell pair, with bisection
  // fallback.
  if (best > 0 && best + 1 < grid.size()) {
    double lo = grid[best - 1];
    double hi = grid[best + 1];
    double z = grid[best];
    for (int it = 0; it < 60; ++it) {
      const double d = psi_derivative(z, ctx);
      if (d > 0) lo = z; else hi = z;
      const double d2 = ctx.eta() * ctx.eta() - 1.0 / z - 1.0 / (g - z);
      double next = (d2 < 0) ? z - d / d2 : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - z) <= 1e-16 * z) break;
      z = next;
    }
    best_val = std::max(best_val, psi(z, ctx));
  }
  return best_val;
}

double sparse_pca_psi_bound(double gamma) {
  require(gamma > 0.0 && gamma < 1.0, ErrorCode::kDomain, "psi bound needs 0 < gamma < 1");
  auto holds = [gamma](double lambda) { return psi_max({gamma, lambda}) < -1e-12 * gamma; };
  double lo = 0.5 * sparse_pca_lambert_bound(gamma);
  while (!holds(lo)) lo *= 0.5;
  double hi = 1.0;
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    if (holds(mid)) lo = mid; else hi = mid;
  }
  return std::min(lo, 1.0);
}

BoundSet sparse_pca_bounds(double gamma) {
  require(gamma > 0.0 && gamma <= 1.0, ErrorCode::kDomain, "gamma must lie in (0, 1]");
  BoundSet b;
  b.problem = Problem::kSparsePca;
  b.gamma = gamma;
  b.upper = 2.0 * std::sqrt(entropy(gamma) + gamma * std::numbers::ln2);
  b.lower_lambert = sparse_pca_lambert_bound(gamma);
  if (gamma >= 0.6) {
    b.lower_theorem = 1.0;
  } else if (gamma >= kTinyGammaCutoff) {
    b.lower_theorem = *b.lower_lambert;
  } else {
    const double lg = -std::log(gamma);
    b.lower_theorem = std::sqrt(4.0 * gamma *
                                (lg - 2.1 * std::sqrt(2.0 * lg) -
                                 1.5 * std::log(3.0 * std::numbers::e / (1.0 - gamma))));
  }
  if (gamma < 1.0) b.lower_psi = sparse_pca_psi_bound(gamma);
  b.spectral = 1.0;
  return b;
}

double submatrix_lower_large_k(double k) {
  const double lk = std::log(k);
  return 2.0 * std::sqrt(k * lk - 11.0 * k * std::pow(lk, 0.75));
}

BoundSet submatrix_bounds(int k) {
  require(k >= 2, ErrorCode::kDomain, "k must be at least 2");
  BoundSet b;
  b.problem = Problem::kSubmatrix;
  b.k = k;
  const double kd = k;
  b.upper = 2.0 * kd * std::sqrt(std::log(kd) / (kd - 1.0));
  if (k == 2) {
    b.lower_theorem = 2.0;
  } else if (std::log(kd) <= std::pow(22.0, 4)) {
    b.lower_theorem = kd * std::sqrt(2.0 * std::log(kd - 1.0) / (kd - 1.0));
  } else {
    b.lower_theorem = submatrix_lower_large_k(kd);
  }
  b.spectral = kd;
  return b;
}

BoundSet clustering_bounds(int k, double alpha) {
  require(k >= 2, ErrorCode::kDomain, "k must be at least 2");
  require(alpha > 0.0, ErrorCode::kDomain, "alpha must be positive");
  BoundSet b;
  b.problem = Problem::kClustering;
  b.k = k;
  b.alpha = alpha;
  const double kd = k;
  b.upper = 2.0 * std::sqrt(kd * std::log(kd) / alpha) + 2.0 * std::log(kd);
  b.lower_theorem = k == 2 ? std::sqrt(1.0 / alpha)
                           : std::sqrt(2.0 * (kd - 1.0) * std::log(kd - 1.0) / alpha);
  b.spectral = (kd - 1.0) / std::sqrt(alpha);
  return b;
}

BoundSet bounds_for(const ProblemParams& params) {
  if (const auto* p = std::get_if<SparsePcaParams>(&params)) return sparse_pca_bounds(p->gamma);
  if (const auto* p = std::get_if<SubmatrixParams>(&params)) return submatrix_bounds(p->k);
  const auto& c = std::get<ClusteringParams>(params);
  return clustering_bounds(c.k, c.alpha);
}

double phi(const Matrix& omega, double xi) {
  const auto k = omega.rows();
  require(k >= 1 && omega.cols() == k, ErrorCode::kDomain, "omega must be square");
  require(xi >= 0.0, ErrorCode::kDomain, "xi must be non-negative");
  for (Eigen::Index i = 0; i < k; ++i) {
    require(std::abs(omega.row(i).sum() - 1.0) <= 1e-9 &&
                std::abs(omega.col(i).sum() - 1.0) <= 1e-9,
            ErrorCode::kDomain, "omega is not doubly stochastic");
  }
  require(omega.minCoeff() >= 0.0, ErrorCode::kDomain, "omega has negative entries");
  double h = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) h -= xlogx(omega(i, j));
  }
  h /= static_cast<double>(k);
  return h - std::log(static_cast<double>(k)) + 0.5 * xi * (omega.squaredNorm() - 1.0);
}

bool an_condition(double xi, int k) {
  if (k == 2) return xi < 1.0;
  if (k < 2) return false;
  return xi < 2.0 * std::log(k - 1.0) / (k - 1.0);
}

Matrix sinkhorn(Matrix a, int max_iter, double tol) {
  for (int it = 0; it < max_iter; ++it) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) a.row(i) /= a.row(i).sum();
    for (Eigen::Index j = 0; j < a.cols(); ++j) a.col(j) /= a.col(j).sum();
    double dev = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) dev = std::max(dev, std::abs(a.row(i).sum() - 1.0));
    if (dev <= tol) break;
  }
  return a;
}

PhiAscentResult maximize_phi(int k, double xi, int restarts, Stream& rng) {
  require(k >= 2 && restarts >= 1, ErrorCode::kInvalidArgument, "need k >= 2 and restarts >= 1");
  constexpr double kFloor = 1e-12;
  const double step = 0.5 * k;
  PhiAscentResult best;
  best.value = -std::numeric_limits<double>::infinity();
  best.restarts = restarts;
  for (int r = 0; r < restarts; ++r) {
    Matrix w(k, k);
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) w(i, j) = std::exp(3.0 * rng.normal());
    }
    w = sinkhorn(w);
    for (int it = 0; it < 20000; ++it) {
      Matrix next(k, k);
      for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
          const double g = -(std::log(w(i, j)) + 1.0) / k + xi * w(i, j);
          next(i, j) = w(i, j) * std::exp(step * g);
        }
      }
      next = sinkhorn(next.cwiseMax(kFloor));
      const double change = (next - w).cwiseAbs().maxCoeff();
      w = std::move(next);
      if (change < 1e-14) break;
    }
    const double v = phi(w, xi);
    if (v > best.value) {
      best.value = v;
      best.omega = w;
    }
  }
  best.frobenius2 = best.omega.squaredNorm();
  return best;
}

std::pair<double, double> chi2_tail_bounds(int d, double nc, double t) {
  require(d >= 1, ErrorCode::kDomain, "d must be at least 1");
  require(nc >= 0.0 && t >= 0.0, ErrorCode::kDomain, "non-centrality and t must be >= 0");
  const double center = d + nc;
  const double dev = 2.0 * std::sqrt((d + 2.0 * nc) * t);
  return {center - dev, center + dev + 2.0 * t};
}

}  // namespace planted
