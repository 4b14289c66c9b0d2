#pragma once

// Exhaustive enumeration helpers shared by the exact searches and sums.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace planted::detail {

// Calls visit(indices) for every s-subset of [0, n) in lexicographic order.
template <class Visit>
void for_each_combination(int n, int s, Visit&& visit) {
  std::vector<int> idx(s);
  for (int i = 0; i < s; ++i) idx[i] = i;
  if (s > n) return;
  for (;;) {
    visit(idx);
    int i = s - 1;
    while (i >= 0 && idx[i] == n - s + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < s; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// Depth-first walk over balanced partitions of [0, n) into k classes of size
// n/k, one representative per relabeling class: labels appear in order of
// first use. Leaves are reached in lexicographic order of the label string.
//   assign(i, c)   element i placed in class c
//   unassign(i, c) undo
//   leaf(labels)   complete partition
template <class Assign, class Unassign, class Leaf>
class BalancedWalker {
 public:
  BalancedWalker(int n, int k, Assign assign, Unassign unassign, Leaf leaf)
      : n_(n), k_(k), block_(n / k), labels_(n, -1), counts_(k, 0), assign_(assign),
        unassign_(unassign), leaf_(leaf) {}

  void run() { recurse(0, 0); }

 private:
  void recurse(int i, int used) {
    if (i == n_) {
      leaf_(labels_);
      return;
    }
    const int limit = used < k_ ? used + 1 : k_;
    for (int c = 0; c < limit; ++c) {
      if (counts_[c] == block_) continue;
      labels_[i] = c;
      ++counts_[c];
      assign_(i, c);
      recurse(i + 1, c == used ? used + 1 : used);
      unassign_(i, c);
      --counts_[c];
    }
    labels_[i] = -1;
  }

  int n_, k_, block_;
  std::vector<int> labels_;
  std::vector<int> counts_;
  Assign assign_;
  Unassign unassign_;
  Leaf leaf_;
};

template <class Assign, class Unassign, class Leaf>
void walk_balanced(int n, int k, Assign assign, Unassign unassign, Leaf leaf) {
  BalancedWalker<Assign, Unassign, Leaf>(n, k, assign, unassign, leaf).run();
}

inline double log_binomial(double n, double r) {
  return std::lgamma(n + 1) - std::lgamma(r + 1) - std::lgamma(n - r + 1);
}

// Streaming log-sum-exp.
class LogSumExp {
 public:
  void add(double x) {
    if (x == -std::numeric_limits<double>::infinity()) return;
    if (x <= max_) {
      sum_ += std::exp(x - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - x) + 1.0;
      max_ = x;
    }
  }
  void merge(const LogSumExp& other) {
    if (other.sum_ == 0.0) return;
    add_scaled(other.max_, other.sum_);
  }
  double value() const {
    return sum_ == 0.0 ? -std::numeric_limits<double>::infinity() : max_ + std::log(sum_);
  }

 private:
  void add_scaled(double m, double s) {
    if (m <= max_) {
      sum_ += s * std::exp(m - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - m) + s;
      max_ = m;
    }
  }
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
};

// log n! for n < size, tabulated.
class LogFactorials {
 public:
  explicit LogFactorials(std::int64_t size) : table_(size + 1, 0.0) {
    for (std::int64_t i = 1; i <= size; ++i) table_[i] = table_[i - 1] + std::log(double(i));
  }
  double operator()(std::int64_t i) const { return table_[i]; }

 private:
  std::vector<double> table_;
};

}  // namespace planted::detail
