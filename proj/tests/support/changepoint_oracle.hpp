#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace oog::testing {

/// Independent exhaustive-search oracle for penalized kernel segmentation.
/// Costs are computed directly from the definition (no incremental sums)
/// and the search is a memoized recursion rather than the forward table the
/// library builds. Ties follow the same documented rule: totals equal
/// within 1e-9 * (1 + |total|) prefer fewer segments, then the smaller
/// predecessor boundary.
class ChangepointOracle {
 public:
  ChangepointOracle(const std::vector<double>& series, double penalty,
                    double bandwidth, int min_segment)
      : x_(series),
        penalty_(penalty),
        bandwidth_(bandwidth),
        min_segment_(std::max(1, min_segment)) {}

  std::vector<int> splits() {
    const int n = static_cast<int>(x_.size());
    memo_.assign(n + 1, Entry{});
    solve(n);
    std::vector<int> out;
    int t = n;
    while (memo_[t].prev > 0) {
      out.push_back(memo_[t].prev);
      t = memo_[t].prev;
    }
    std::reverse(out.begin(), out.end());
    return out;
  }

  /// Within-segment RBF kernel cost of [s, t), direct double loop.
  double segment_cost(int s, int t) const {
    const int len = t - s;
    double sum = 0.0;
    for (int i = s; i < t; ++i) {
      for (int j = s; j < t; ++j) {
        const double d = x_[i] - x_[j];
        sum += std::exp(-d * d / (2.0 * bandwidth_ * bandwidth_));
      }
    }
    return static_cast<double>(len) - sum / len;
  }

 private:
  struct Entry {
    bool done = false;
    double total = std::numeric_limits<double>::infinity();
    int segments = 0;
    int prev = -1;
  };

  const Entry& solve(int t) {
    Entry& e = memo_[t];
    if (e.done) return e;
    e.done = true;
    if (t == 0) {
      e.total = 0.0;
      e.segments = 0;
      e.prev = -1;
      return e;
    }
    for (int s = 0; s + min_segment_ <= t; ++s) {
      if (s != 0 && s < min_segment_) continue;
      const Entry& sub = solve(s);
      if (!std::isfinite(sub.total)) continue;
      const double total =
          sub.total + segment_cost(s, t) + (s > 0 ? penalty_ : 0.0);
      const double tol = 1e-9 * (1.0 + std::abs(total));
      const int segments = sub.segments + 1;
      if (total < e.total - tol ||
          (total <= e.total + tol && segments < e.segments)) {
        e.total = total;
        e.segments = segments;
        e.prev = s;
      }
    }
    return e;
  }

  std::vector<double> x_;
  double penalty_;
  double bandwidth_;
  int min_segment_;
  std::vector<Entry> memo_;
};

/// Brute-force enumeration of every admissible split set; only usable for
/// tiny series. Requires the optimum to be unique up to the tie rule.
inline std::vector<int> enumerate_best_segmentation(
    const std::vector<double>& series, double penalty, double bandwidth,
    int min_segment) {
  const int n = static_cast<int>(series.size());
  const ChangepointOracle costs(series, penalty, bandwidth, min_segment);
  std::vector<int> best_splits;
  double best_total = std::numeric_limits<double>::infinity();
  int best_count = 0;

  std::vector<int> current;
  const auto consider = [&](const std::vector<int>& splits) {
    double total = 0.0;
    int prev = 0;
    for (int s : splits) {
      total += costs.segment_cost(prev, s) + penalty;
      prev = s;
    }
    total += costs.segment_cost(prev, n);
    const double tol = 1e-9 * (1.0 + std::abs(total));
    const int count = static_cast<int>(splits.size()) + 1;
    const bool better =
        total < best_total - tol ||
        (total <= best_total + tol &&
         (count < best_count ||
          (count == best_count && splits < best_splits)));
    if (better || !std::isfinite(best_total)) {
      best_total = total;
      best_count = count;
      best_splits = splits;
    }
  };

  // Recursive enumeration of admissible split positions.
  const std::function<void(int)> recurse = [&](int from) {
    if (n - (current.empty() ? 0 : current.back()) >= min_segment) {
      consider(current);
    }
    for (int s = from; s + min_segment <= n; ++s) {
      const int prev = current.empty() ? 0 : current.back();
      if (s - prev < min_segment) continue;
      current.push_back(s);
      recurse(s + 1);
      current.pop_back();
    }
  };
  recurse(min_segment);
  return best_splits;
}

}  // namespace oog::testing
