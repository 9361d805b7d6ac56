#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <unordered_map>
#include <vector>

#include "oog/geometry.hpp"

namespace oog::detail {

/// Uniform hash grid for bounded-radius point queries. Queries are exact
/// for any radius <= the cell size chosen at construction; the grid is an
/// accelerator only, never an approximation.
class SpatialGrid {
 public:
  SpatialGrid(const std::vector<Vec3>& points, double cell)
      : points_(points), cell_(cell), inv_cell_(1.0 / cell) {
    cells_.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      cells_[key(points[i])].push_back(static_cast<int>(i));
    }
  }

  bool any_within(const Vec3& q, double r) const {
    const double r2 = r * r;
    bool found = false;
    visit(q, [&](int i) {
      if ((points_[i] - q).squared_norm() <= r2) found = true;
      return found;  // stop early
    });
    return found;
  }

  /// Index of the nearest point within radius r, or -1. Ties break toward
  /// the smallest index.
  int nearest_within(const Vec3& q, double r, double* sqdist = nullptr) const {
    const double r2 = r * r;
    double best = std::numeric_limits<double>::infinity();
    int best_i = -1;
    visit(q, [&](int i) {
      const double d2 = (points_[i] - q).squared_norm();
      if (d2 <= r2 && (d2 < best || (d2 == best && i < best_i))) {
        best = d2;
        best_i = i;
      }
      return false;
    });
    if (sqdist) *sqdist = best;
    return best_i;
  }

  /// All indices within radius r of q, in increasing index order.
  std::vector<int> neighbors_within(const Vec3& q, double r) const {
    const double r2 = r * r;
    std::vector<int> out;
    visit(q, [&](int i) {
      if ((points_[i] - q).squared_norm() <= r2) out.push_back(i);
      return false;
    });
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  struct Key {
    std::int64_t x, y, z;
    bool operator==(const Key& o) const {
      return x == o.x && y == o.y && z == o.z;
    }
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      std::uint64_t h = 1469598103934665603ull;
      for (std::int64_t v : {k.x, k.y, k.z}) {
        h ^= static_cast<std::uint64_t>(v);
        h *= 1099511628211ull;
      }
      return static_cast<std::size_t>(h);
    }
  };

  Key key(const Vec3& p) const {
    return {static_cast<std::int64_t>(std::floor(p.x * inv_cell_)),
            static_cast<std::int64_t>(std::floor(p.y * inv_cell_)),
            static_cast<std::int64_t>(std::floor(p.z * inv_cell_))};
  }

  /// Calls fn(index) for every point in the 27 cells around q; fn returning
  /// true aborts the scan.
  template <typename Fn>
  void visit(const Vec3& q, Fn&& fn) const {
    const Key c = key(q);
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          const auto it = cells_.find(Key{c.x + dx, c.y + dy, c.z + dz});
          if (it == cells_.end()) continue;
          for (int i : it->second) {
            if (fn(i)) return;
          }
        }
      }
    }
  }

  const std::vector<Vec3>& points_;
  double cell_;
  double inv_cell_;
  std::unordered_map<Key, std::vector<int>, KeyHash> cells_;
};

}  // namespace oog::detail
