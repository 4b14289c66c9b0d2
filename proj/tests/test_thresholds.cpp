#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "planted/error.hpp"
#include "planted/models.hpp"
#include "planted/rng.hpp"
#include "planted/thresholds.hpp"

using namespace planted;

namespace {

// Entropy by an independent route: base-2 logs rescaled.
double entropy_ref(double g) {
  if (g <= 0.0 || g >= 1.0) return 0.0;
  return -(g * std::log2(g) + (1 - g) * std::log2(1 - g)) * std::log(2.0);
}

}  // namespace

TEST_CASE("entropy") {
  CHECK(entropy(0.5) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(entropy(0.0) == 0.0);
  CHECK(entropy(1.0) == 0.0);
  CHECK(entropy(0.054) == doctest::Approx(entropy_ref(0.054)).epsilon(1e-13));
  CHECK(entropy(0.054) == doctest::Approx(0.21015).epsilon(1e-4));
  for (double g = 0.01; g < 1.0; g += 0.01) {
    CHECK(entropy(g) == doctest::Approx(entropy(1 - g)).epsilon(1e-13));
    CHECK(entropy(g) <= std::log(2.0) + 1e-15);
  }
  CHECK_THROWS_AS(entropy(1.5), Error);
}

TEST_CASE("Bernoulli divergence") {
  for (double p : {0.1, 0.3, 0.77}) CHECK(bernoulli_kl(p, p) == doctest::Approx(0.0));
  CHECK(bernoulli_kl(0.5, 1.0) == doctest::Approx(std::log(2.0)));
  CHECK(bernoulli_kl(0.2, 0.6) == doctest::Approx(0.6 * std::log(3.0) + 0.4 * std::log(0.5)));
  CHECK(bernoulli_kl(0.2, 0.6) == doctest::Approx(0.38190).epsilon(1e-4));
  CHECK_THROWS_AS(bernoulli_kl(0.0, 0.5), Error);
}

TEST_CASE("Lambert W") {
  CHECK(lambert_w(std::exp(1.0)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(lambert_w(0.0) == 0.0);
  CHECK(lambert_w(2 * std::exp(2.0)) == doctest::Approx(2.0).epsilon(1e-14));
  for (double e = -6; e <= 12; e += 0.25) {
    const double y = std::pow(10.0, e);
    const double w = lambert_w(y);
    CHECK(std::abs(w * std::exp(w) - y) <= 1e-12 * std::max(1.0, y));
  }
  CHECK_THROWS_AS(lambert_w(-0.1), Error);
}

TEST_CASE("sparse PCA bounds") {
  const double upper_054 = 2 * std::sqrt(entropy_ref(0.054) + 0.054 * std::log(2.0));
  CHECK(sparse_pca_bounds(0.054).upper == doctest::Approx(upper_054).epsilon(1e-13));
  CHECK(sparse_pca_bounds(0.054).upper == doctest::Approx(0.99516).epsilon(1e-4));
  CHECK(sparse_pca_bounds(0.055).upper == doctest::Approx(1.00220).epsilon(1e-4));
  CHECK(sparse_pca_bounds(0.7).lower_theorem == 1.0);
  CHECK(sparse_pca_bounds(0.5).upper == doctest::Approx(2 * std::sqrt(1.5 * std::log(2.0))));
  CHECK(sparse_pca_bounds(0.5).upper == doctest::Approx(2.03936).epsilon(1e-5));
  CHECK(sparse_pca_bounds(0.3).spectral == 1.0);

  SUBCASE("middle branch uses the Lambert bound") {
    const double g = 0.01;
    const double w = lambert_w(1 / (2 * g * std::sqrt(std::exp(1.0))));
    CHECK(sparse_pca_bounds(g).lower_theorem == doctest::Approx(std::sqrt(2 * g * w)));
  }
  SUBCASE("ordering on a 200-point grid") {
    for (int i = 0; i < 200; ++i) {
      const double g = std::exp(std::log(1e-4) + (std::log(0.99) - std::log(1e-4)) * (i + 0.5) / 200);
      const BoundSet b = sparse_pca_bounds(g);
      REQUIRE(b.lower_psi.has_value());
      REQUIRE(b.lower_lambert.has_value());
      CHECK(*b.lower_lambert <= *b.lower_psi);
      CHECK(*b.lower_psi <= b.upper);
      CHECK(*b.lower_psi <= 1.0);
      CHECK(b.lower_theorem <= b.upper);
    }
  }
  SUBCASE("asymptotic gap between upper and Lambert bounds") {
    double previous = 10.0;
    for (double g : {1e-3, 1e-6, 1e-9, 1e-12}) {
      const BoundSet b = sparse_pca_bounds(g);
      const double ratio = b.upper / *b.lower_lambert;
      CHECK(ratio > std::sqrt(2.0));
      CHECK(ratio < previous);
      CHECK(*b.lower_lambert <= *b.lower_psi);
      CHECK(*b.lower_psi <= b.upper);
      previous = ratio;
    }
    // The ratio only enters (sqrt 2, 2) below gamma = 1e-3.
    CHECK(sparse_pca_bounds(1e-3).upper / *sparse_pca_bounds(1e-3).lower_lambert ==
          doctest::Approx(2.0084).epsilon(1e-4));
    CHECK(sparse_pca_bounds(1e-4).upper / *sparse_pca_bounds(1e-4).lower_lambert < 2.0);
  }
  SUBCASE("upper bound is tight against 2 sqrt(-gamma log gamma) for tiny gamma") {
    for (double g : {1e-6, 1e-8, 1e-10, 1e-12}) {
      const double r = sparse_pca_bounds(g).upper / (2 * std::sqrt(-g * std::log(g)));
      CHECK(r >= 1.0);
      CHECK(r <= 1.3);
    }
  }
  CHECK_THROWS_AS(sparse_pca_bounds(0.0), Error);
}

TEST_CASE("psi function") {
  CHECK(psi(0.04, {0.2, 0.8}) == doctest::Approx(-0.0072).epsilon(1e-10));
  CHECK(psi(0.25, {0.25, 0.5}) == doctest::Approx((0.25 - 0.25) / 2 - 0.25 * std::log(4.0)));
  CHECK(psi(0.25, {0.25, 0.5}) == doctest::Approx(-0.34657).epsilon(1e-5));
  {
    const double g = 0.1, l = 0.5;
    CHECK(psi(g * g / (l * l), {g, l}) == doctest::Approx(-g * bernoulli_kl(g, g / (l * l))).epsilon(1e-12));
  }
  Stream rng(5);
  for (int t = 0; t < 1000; ++t) {
    const double g = 0.01 + 0.98 * rng.uniform();
    const double l = 0.01 + 0.98 * rng.uniform();
    CHECK(std::abs(psi(g * g, {g, l}) - (l * l - 1) * g * g / 2) <= 1e-10);
  }
  SUBCASE("derivative matches a central difference") {
    const PsiContext ctx{0.3, 0.7};
    for (double z : {0.2, 0.25, 0.29}) {
      const double h = 1e-6;
      const double fd = (psi(z + h, ctx) - psi(z - h, ctx)) / (2 * h);
      CHECK(psi_derivative(z, ctx) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
  CHECK_THROWS_AS(psi(0.5, {0.3, 0.7}), Error);
}

TEST_CASE("psi-based lower bound is the largest lambda keeping psi negative") {
  for (double g : {0.01, 0.1, 0.3}) {
    const double l = *sparse_pca_bounds(g).lower_psi;
    if (l >= 1.0) continue;
    CHECK(psi_max({g, l * (1 - 1e-6)}) < 0.0);
    CHECK(psi_max({g, l * (1 + 1e-4)}) >= -1e-12);
  }
}

TEST_CASE("submatrix bounds") {
  CHECK(submatrix_bounds(2).lower_theorem == 2.0);
  CHECK(submatrix_bounds(3).lower_theorem == doctest::Approx(3 * std::sqrt(std::log(2.0))));
  CHECK(submatrix_bounds(3).lower_theorem == doctest::Approx(2.49767).epsilon(1e-5));
  CHECK(submatrix_bounds(11).upper == doctest::Approx(22 * std::sqrt(std::log(11.0) / 10)));
  CHECK(submatrix_bounds(11).upper < 11.0);
  CHECK(submatrix_bounds(10).upper > 10.0);
  CHECK(submatrix_bounds(10).upper == doctest::Approx(20 * std::sqrt(std::log(10.0) / 9)));
  CHECK(submatrix_bounds(10).upper == doctest::Approx(10.1162).epsilon(1e-5));
  CHECK(submatrix_bounds(7).spectral == 7.0);
  CHECK_FALSE(submatrix_bounds(7).lower_psi.has_value());
  // The third branch needs log k > 22^4, beyond any int k.
  const int kmax = std::numeric_limits<int>::max();
  CHECK(submatrix_bounds(kmax).lower_theorem ==
        doctest::Approx(kmax * std::sqrt(2.0 * std::log(kmax - 1.0) / (kmax - 1.0))));
  CHECK_THROWS_AS(submatrix_bounds(1), Error);
}

TEST_CASE("clustering bounds") {
  CHECK(clustering_bounds(2, 4.0).lower_theorem == doctest::Approx(0.5));
  CHECK(clustering_bounds(2, 1.0).upper ==
        doctest::Approx(2 * std::sqrt(2 * std::log(2.0)) + 2 * std::log(2.0)));
  CHECK(clustering_bounds(2, 1.0).upper == doctest::Approx(3.74116).epsilon(1e-5));
  CHECK(clustering_bounds(3, 1.0).spectral == 2.0);
  CHECK(clustering_bounds(4, 2.0).lower_theorem == doctest::Approx(std::sqrt(6 * std::log(3.0) / 2)));
  CHECK_THROWS_AS(clustering_bounds(2, 0.0), Error);
}

TEST_CASE("phi functional") {
  for (int k = 2; k <= 8; ++k) {
    const Matrix j = Matrix::Constant(k, k, 1.0 / k);
    CHECK(std::abs(phi(j, 0.7)) < 1e-13);
  }
  CHECK(phi(Matrix::Identity(2, 2), 1.0) == doctest::Approx(0.5 - std::log(2.0)));
  for (int k : {2, 3, 5}) {
    const Matrix id = Matrix::Identity(k, k);
    CHECK(phi(id, 11.0) - phi(id, 10.0) == doctest::Approx((k - 1) / 2.0));
  }
  Matrix bad = Matrix::Identity(2, 2);
  bad(0, 0) = 0.5;
  CHECK_THROWS_AS(phi(bad, 1.0), Error);
}

TEST_CASE("sufficient condition for the uniform maximizer") {
  CHECK(an_condition(0.99, 2));
  CHECK_FALSE(an_condition(1.0, 2));
  CHECK_FALSE(an_condition(std::log(2.0), 3));
  CHECK(an_condition(0.5, 3));
  SUBCASE("numerical ascent lands on J/k whenever the condition holds") {
    Stream rng(2024);
    for (int k = 2; k <= 4; ++k) {
      const double limit = k == 2 ? 1.0 : 2 * std::log(k - 1.0) / (k - 1);
      for (double frac : {0.3, 0.7, 0.95}) {
        const double xi = frac * limit;
        REQUIRE(an_condition(xi, k));
        const auto r = maximize_phi(k, xi, 100, rng);
        CHECK(r.frobenius2 <= 1 + 1e-3);
      }
    }
  }
}

TEST_CASE("Sinkhorn normalization") {
  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  const Matrix s = sinkhorn(a);
  for (int i = 0; i < 2; ++i) {
    CHECK(s.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.col(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("chi-square tail thresholds") {
  auto [lo0, hi0] = chi2_tail_bounds(10, 0.0, 0.0);
  CHECK(lo0 == 10.0);
  CHECK(hi0 == 10.0);
  auto [lo1, hi1] = chi2_tail_bounds(10, 0.0, 1.0);
  CHECK(lo1 == doctest::Approx(10 - 2 * std::sqrt(10.0)));
  CHECK(hi1 == doctest::Approx(10 + 2 * std::sqrt(10.0) + 2));
  SUBCASE("Monte Carlo tails stay below exp(-t)") {
    const auto [lo, hi] = chi2_tail_bounds(50, 0.0, 3.0);
    Stream rng(31);
    int above = 0, below = 0;
    const int draws = 100000;
    for (int t = 0; t < draws; ++t) {
      double q = 0.0;
      for (int i = 0; i < 50; ++i) {
        const double z = rng.normal();
        q += z * z;
      }
      above += q > hi;
      below += q < lo;
    }
    CHECK(above / double(draws) < std::exp(-3.0));
    CHECK(below / double(draws) < std::exp(-3.0));
  }
  SUBCASE("non-central upper tail") {
    const double nc = 20.0;
    const auto [lo, hi] = chi2_tail_bounds(5, nc, 2.0);
    Stream rng(32);
    int above = 0, below = 0;
    const int draws = 50000;
    const double shift = std::sqrt(nc);
    for (int t = 0; t < draws; ++t) {
      double q = 0.0;
      for (int i = 0; i < 5; ++i) {
        const double z = rng.normal() + (i == 0 ? shift : 0.0);
        q += z * z;
      }
      above += q > hi;
      below += q < lo;
    }
    CHECK(above / double(draws) < std::exp(-2.0));
    CHECK(below / double(draws) < std::exp(-2.0));
  }
}

TEST_CASE("bounds_for dispatches on the problem") {
  CHECK(bounds_for(SparsePcaParams{1, 0.5, 10}).problem == Problem::kSparsePca);
  CHECK(bounds_for(SubmatrixParams{1, 3, 9}).k == 3);
  CHECK(bounds_for(ClusteringParams{1, 2.0, 2, 5}).alpha == 2.0);
}
