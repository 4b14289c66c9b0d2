#pragma once

#include <optional>
#include <utility>

#include "planted/rng.hpp"
#include "planted/types.hpp"

namespace planted {

// Threshold values for one problem at one parameter point. Absent bounds are
// std::nullopt.
struct BoundSet {
  Problem problem = Problem::kSparsePca;
  double gamma = 0.0;  // sparse PCA
  int k = 0;           // submatrix, clustering
  double alpha = 0.0;  // clustering
  double upper = 0.0;
  double lower_theorem = 0.0;
  std::optional<double> lower_psi;
  std::optional<double> lower_lambert;
  double spectral = 0.0;
};

// Natural-log binary entropy with 0 log 0 = 0.
double entropy(double gamma);

// KL divergence between Bernoulli(p1) and Bernoulli(p0).
double bernoulli_kl(double p0, double p1);

// Principal branch of the Lambert W function for y >= 0.
double lambert_w(double y);

BoundSet sparse_pca_bounds(double gamma);
BoundSet submatrix_bounds(int k);
BoundSet clustering_bounds(int k, double alpha);
BoundSet bounds_for(const ProblemParams& params);

// The large-k branch of the submatrix lower bound, exposed for direct
// evaluation since it only applies beyond k = exp(22^4).
double submatrix_lower_large_k(double k);

// sqrt(2 gamma W(1 / (2 sqrt(e) gamma))).
double sparse_pca_lambert_bound(double gamma);

struct PsiContext {
  double gamma;
  double lambda;
  double eta() const { return lambda / gamma; }
};

// Exponential rate of the large-overlap part of the sparse PCA second moment.
double psi(double zeta, const PsiContext& ctx);
double psi_derivative(double zeta, const PsiContext& ctx);

// Maximum of psi over [gamma^2/lambda^2, gamma]; -inf when the interval is empty.
double psi_max(const PsiContext& ctx);

// sup{lambda in (0,1) : psi < 0 on [gamma^2/lambda^2, gamma]}.
double sparse_pca_psi_bound(double gamma);

// Entropy-plus-energy functional over k x k doubly stochastic matrices.
double phi(const Matrix& omega, double xi);

// Sufficient condition under which phi is maximized at J/k.
bool an_condition(double xi, int k);

struct PhiAscentResult {
  Matrix omega;  // best stationary point found
  double value = 0.0;
  double frobenius2 = 0.0;
  int restarts = 0;
};

// Multi-start ascent of phi over doubly stochastic matrices (exponentiated
// gradient steps followed by Sinkhorn normalization).
PhiAscentResult maximize_phi(int k, double xi, int restarts, Stream& rng);

// Sinkhorn-normalizes a positive matrix to be doubly stochastic.
Matrix sinkhorn(Matrix a, int max_iter = 10000, double tol = 1e-15);

// Lower and upper deviation thresholds for a non-central chi-square with d
// degrees of freedom and non-centrality nc; each tail beyond its threshold
// has probability below exp(-t).
std::pair<double, double> chi2_tail_bounds(int d, double nc, double t);

}  // namespace planted
