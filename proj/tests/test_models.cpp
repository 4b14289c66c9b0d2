#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

#include "planted/detectors.hpp"
#include "planted/error.hpp"
#include "planted/models.hpp"
#include "planted/rng.hpp"

using namespace planted;

TEST_CASE("balanced partition sampling") {
  SUBCASE("two points, two classes: both labelings occur equally often") {
    int first = 0;
    const int draws = 20000;
    for (int t = 0; t < draws; ++t) {
      Stream rng = Stream::substream(11, t);
      const auto p = sample_balanced_partition(2, 2, rng);
      CHECK(p.labels[0] != p.labels[1]);
      first += p.labels[0] == 0;
    }
    CHECK(std::abs(first / double(draws) - 0.5) < 0.02);
  }
  SUBCASE("n=4, k=2 is uniform over the six labeled partitions") {
    std::map<std::vector<int>, int> freq;
    const int draws = 100000;
    for (int t = 0; t < draws; ++t) {
      Stream rng = Stream::substream(12, t);
      ++freq[sample_balanced_partition(4, 2, rng).labels];
    }
    CHECK(freq.size() == 6);
    for (const auto& [labels, count] : freq) CHECK(std::abs(count / double(draws) - 1.0 / 6) < 0.01);
  }
  SUBCASE("n=6, k=3 classes always have two members") {
    Stream rng(13);
    for (int t = 0; t < 1000; ++t) {
      const auto p = sample_balanced_partition(6, 3, rng);
      std::vector<int> counts(3, 0);
      for (int l : p.labels) ++counts[l];
      CHECK(counts == std::vector<int>{2, 2, 2});
    }
  }
  SUBCASE("k must divide n") {
    Stream rng(1);
    CHECK_THROWS_AS(sample_balanced_partition(5, 2, rng), Error);
  }
}

TEST_CASE("sparse sign vector sampling") {
  SUBCASE("full support when gamma = 1") {
    Stream rng(3);
    const auto v = sample_sparse_sign_vector(4, 1.0, rng);
    CHECK(v.support == std::vector<std::int64_t>{0, 1, 2, 3});
    for (double x : v.dense()) CHECK(std::abs(x) == 1.0);
  }
  SUBCASE("n=4, gamma=0.5 supports are uniform and norms are exact") {
    std::map<std::vector<std::int64_t>, int> freq;
    const int draws = 100000;
    int plus = 0;
    for (int t = 0; t < draws; ++t) {
      Stream rng = Stream::substream(21, t);
      const auto v = sample_sparse_sign_vector(4, 0.5, rng);
      ++freq[v.support];
      plus += v.signs[0] > 0;
      const double norm2 = v.dense().squaredNorm();
      CHECK(std::abs(norm2 - 4.0) <= 8 * std::numeric_limits<double>::epsilon() * 4.0);
    }
    CHECK(freq.size() == 6);
    for (const auto& [s, count] : freq) CHECK(std::abs(count / double(draws) - 1.0 / 6) < 0.01);
    CHECK(std::abs(plus / double(draws) - 0.5) < 0.01);
  }
  SUBCASE("non-integer gamma*n is rejected") {
    Stream rng(1);
    CHECK_THROWS_AS(sample_sparse_sign_vector(5, 0.5, rng), Error);
  }
}

TEST_CASE("signal construction") {
  SUBCASE("sparse PCA rank-one example") {
    SparseSignVector v{2, 1.0, {0, 1}, {1, 1}};
    const Matrix m = build_signal(SparsePcaParams{1.0, 1.0, 2}, v);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) CHECK(m(i, j) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
    }
  }
  SUBCASE("submatrix two-point example") {
    const Matrix m = build_signal(SubmatrixParams{std::sqrt(2.0), 2, 2}, BalancedPartition{2, {0, 1}});
    CHECK(m(0, 0) == doctest::Approx(0.5));
    CHECK(m(1, 1) == doctest::Approx(0.5));
    CHECK(m(0, 1) == doctest::Approx(-0.5));
    CHECK(m(1, 0) == doctest::Approx(-0.5));
  }
  SUBCASE("submatrix rows sum to zero") {
    Stream rng(5);
    for (int t = 0; t < 50; ++t) {
      const SubmatrixParams p{1.7, 3, 12};
      const Matrix m = build_signal(p, sample_balanced_partition(12, 3, rng));
      for (int i = 0; i < 12; ++i) CHECK(std::abs(m.row(i).sum()) <= 1e-10 * 12);
    }
  }
  SUBCASE("clustering signal matches an entrywise construction") {
    const ClusteringParams p{2.0, 2.0, 2, 3};
    Stream rng(8);
    const auto truth = std::get<ClusteringTruth>(sample_truth(p, rng));
    const Matrix m = build_signal(p, truth);
    REQUIRE(m.rows() == 6);
    REQUIRE(m.cols() == 3);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 3; ++j) {
        double expect = 0.0;
        for (int s = 0; s < 2; ++s) {
          const double a = (truth.partition.labels[i] == s ? 1.0 : 0.0) - 0.5;
          expect += a * truth.centers(j, s);
        }
        expect *= std::sqrt(p.rho / p.n);
        CHECK(m(i, j) == doctest::Approx(expect).epsilon(1e-14));
      }
    }
    // S - J/k has columns summing to zero over the balanced classes, so the
    // signal has zero column sums.
    for (int j = 0; j < 3; ++j) CHECK(std::abs(m.col(j).sum()) < 1e-12);
  }
  SUBCASE("mismatched truth type is rejected") {
    CHECK_THROWS_AS(build_signal(SubmatrixParams{1.0, 2, 4}, SparseSignVector{4, 0.5, {0, 1}, {1, 1}}),
                    Error);
  }
}

TEST_CASE("noise sampling") {
  SUBCASE("Wigner variances and exact symmetry") {
    Stream rng(99);
    const Matrix w = sample_noise(500, 500, true, rng);
    CHECK(w == w.transpose());
    double off = 0.0;
    for (int i = 0; i < 500; ++i) {
      for (int j = i + 1; j < 500; ++j) off += w(i, j) * w(i, j);
    }
    CHECK(std::abs(off / (500.0 * 499 / 2) - 1.0) < 0.05);
    double diag_big = 0.0;
    const Matrix v = sample_noise(3000, 3000, true, rng);
    for (int i = 0; i < 3000; ++i) diag_big += v(i, i) * v(i, i);
    CHECK(std::abs(diag_big / 3000 - 2.0) < 0.2);
  }
  SUBCASE("rectangular mean") {
    Stream rng(7);
    const Matrix w = sample_noise(2000, 1, false, rng);
    CHECK(std::abs(w.mean()) < 0.07);
  }
  SUBCASE("cluster centers have variance k/(k-1)") {
    Stream rng(17);
    const Matrix v = sample_cluster_centers(20000, 3, rng);
    CHECK(std::abs(v.squaredNorm() / v.size() - 1.5) < 0.03);
  }
}

TEST_CASE("instance generation") {
  SUBCASE("determinism and truth bookkeeping") {
    const SparsePcaParams p{1.2, 0.25, 40};
    const auto a = generate_instance(p, Hypothesis::kPlanted, 77);
    const auto b = generate_instance(p, Hypothesis::kPlanted, 77);
    CHECK(a.x == b.x);
    CHECK(a.truth.has_value());
    CHECK(a.x == a.x.transpose());
    const auto null = generate_instance(p, Hypothesis::kNull, 77);
    CHECK_FALSE(null.truth.has_value());
    CHECK(generate_instance(SubmatrixParams{2, 2, 10}, Hypothesis::kPlanted, 1).x ==
          generate_instance(SubmatrixParams{2, 2, 10}, Hypothesis::kPlanted, 1).x.transpose());
  }
  SUBCASE("null sparse PCA top eigenvalue near 2 at n=400") {
    int inside = 0;
    for (int seed = 0; seed < 100; ++seed) {
      const auto inst = generate_instance(SparsePcaParams{1.0, 0.5, 400}, Hypothesis::kNull, seed);
      const double top = top_eigenvalue(inst.x) / 20.0;
      inside += top >= 1.85 && top <= 2.15;
    }
    CHECK(inside >= 95);
  }
  SUBCASE("planted sparse PCA top eigenvalue near lambda + 1/lambda") {
    for (int seed = 0; seed < 3; ++seed) {
      const auto inst = generate_instance(SparsePcaParams{1.5, 0.5, 1000}, Hypothesis::kPlanted, seed);
      const double top = top_eigenvalue(inst.x) / std::sqrt(1000.0);
      CHECK(std::abs(top / (13.0 / 6.0) - 1.0) < 0.05);
    }
  }
  SUBCASE("planted clustering data are centered") {
    const ClusteringParams p{3.0, 2.0, 2, 200};
    const auto inst = generate_instance(p, Hypothesis::kPlanted, 4);
    const double mn = static_cast<double>(inst.x.size());
    CHECK(std::abs(inst.x.mean()) <= 4.0 / std::sqrt(mn));
  }
  SUBCASE("clustering needs k to divide m, not n") {
    CHECK_NOTHROW(validate(ClusteringParams{1.0, 4.0, 2, 3}));
    CHECK_THROWS_AS(validate(ClusteringParams{1.0, 1.0, 2, 3}), Error);
  }
}

TEST_CASE("parameter rounding") {
  std::string note;
  const auto r = round_to_valid(SparsePcaParams{1.0, 0.33, 10}, &note);
  CHECK(std::get<SparsePcaParams>(r).gamma == doctest::Approx(0.3));
  CHECK_FALSE(note.empty());
  const auto same = round_to_valid(SparsePcaParams{1.0, 0.5, 10}, &note);
  CHECK(std::get<SparsePcaParams>(same).gamma == 0.5);
  CHECK(note.empty());
}
