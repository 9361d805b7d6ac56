#include "oog/registration.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "oog/errors.hpp"
#include "oog/rng.hpp"
#include "spatial_grid.hpp"

namespace oog {

namespace {

Eigen::Vector3d to_eigen(const Vec3& v) { return {v.x, v.y, v.z}; }

Pose pose_from_isometry(const Eigen::Matrix4d& m) {
  double r[9] = {m(0, 0), m(0, 1), m(0, 2), m(1, 0), m(1, 1),
                 m(1, 2), m(2, 0), m(2, 1), m(2, 2)};
  Pose p;
  p.rotation = UnitQuaternion::from_rotation_matrix(r);
  p.translation = {m(0, 3), m(1, 3), m(2, 3)};
  return p;
}

/// Least-squares rigid transform (no scale) mapping src[i] -> dst[i].
Pose rigid_from_correspondences(const std::vector<Vec3>& src,
                                const std::vector<Vec3>& dst) {
  Eigen::Matrix3Xd a(3, src.size()), b(3, dst.size());
  for (std::size_t i = 0; i < src.size(); ++i) {
    a.col(i) = to_eigen(src[i]);
    b.col(i) = to_eigen(dst[i]);
  }
  const Eigen::Matrix4d m = Eigen::umeyama(a, b, false);
  return pose_from_isometry(m);
}

}  // namespace

PointCloud voxel_downsample(const PointCloud& cloud, double voxel) {
  if (voxel <= 0.0) return cloud;
  struct Cell {
    Vec3 sum;
    int count = 0;
    int order = 0;
  };
  std::unordered_map<std::int64_t, Cell> cells;
  const double inv = 1.0 / voxel;
  int next_order = 0;
  for (const Vec3& p : cloud.points) {
    const auto ix = static_cast<std::int64_t>(std::floor(p.x * inv));
    const auto iy = static_cast<std::int64_t>(std::floor(p.y * inv));
    const auto iz = static_cast<std::int64_t>(std::floor(p.z * inv));
    // 21 bits per axis, offset to keep the packed key positive.
    const std::int64_t key =
        ((ix + (1 << 20)) << 42) | ((iy + (1 << 20)) << 21) | (iz + (1 << 20));
    Cell& c = cells[key];
    if (c.count == 0) c.order = next_order++;
    c.sum += p;
    c.count += 1;
  }
  std::vector<const Cell*> ordered(cells.size());
  for (const auto& [key, cell] : cells) ordered[cell.order] = &cell;
  PointCloud out;
  out.points.reserve(ordered.size());
  for (const Cell* c : ordered) {
    out.points.push_back(c->sum / static_cast<double>(c->count));
  }
  return out;
}

std::vector<Vec3> estimate_normals(const PointCloud& cloud, double radius) {
  const std::size_t n = cloud.size();
  std::vector<Vec3> normals(n);
  const detail::SpatialGrid grid(cloud.points, radius);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<int> nbrs = grid.neighbors_within(cloud.points[i], radius);
    if (nbrs.size() < 3) {
      // Sparse region: fall back to the 3 nearest points overall.
      std::vector<std::pair<double, int>> dists;
      dists.reserve(n);
      for (std::size_t j = 0; j < n; ++j) {
        dists.emplace_back((cloud.points[j] - cloud.points[i]).squared_norm(),
                           static_cast<int>(j));
      }
      std::partial_sort(dists.begin(), dists.begin() + 3, dists.end());
      nbrs = {dists[0].second, dists[1].second, dists[2].second};
    }
    Eigen::Vector3d c = Eigen::Vector3d::Zero();
    for (int j : nbrs) c += to_eigen(cloud.points[j]);
    c /= static_cast<double>(nbrs.size());
    Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
    for (int j : nbrs) {
      const Eigen::Vector3d q = to_eigen(cloud.points[j]) - c;
      scatter += q * q.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(scatter);
    const Eigen::Vector3d nv = es.eigenvectors().col(0);
    normals[i] = Vec3{nv.x(), nv.y(), nv.z()}.normalized();
  }
  return normals;
}

namespace {

/// Soft (linearly interpolated) accumulation of a feature in [0, 1] into an
/// 11-bin histogram slice. Soft binning keeps descriptors continuous in the
/// inputs, which the rigid-invariance guarantee depends on.
void soft_bin(std::array<double, kFeatureDim>& hist, int offset, double value,
              double weight) {
  constexpr int kBins = 11;
  const double x = std::clamp(value, 0.0, 1.0) * (kBins - 1);
  const int i0 = std::min(static_cast<int>(x), kBins - 2);
  const double frac = x - i0;
  hist[offset + i0] += weight * (1.0 - frac);
  hist[offset + i0 + 1] += weight * frac;
}

void l1_normalize(std::array<double, kFeatureDim>& hist) {
  double sum = 0.0;
  for (double v : hist) sum += v;
  if (sum > 0.0) {
    for (double& v : hist) v /= sum;
  }
}

std::array<double, kFeatureDim> spfh_at(const PointCloud& cloud,
                                        const std::vector<Vec3>& normals,
                                        const std::vector<int>& nbrs, int i) {
  std::array<double, kFeatureDim> hist{};
  const Vec3& p = cloud.points[i];
  const Vec3& np = normals[i];
  for (int j : nbrs) {
    if (j == i) continue;
    const Vec3 diff = cloud.points[j] - p;
    const double d = diff.norm();
    if (d < 1e-12) continue;
    const Vec3 u = diff / d;
    // Absolute cosines: insensitive to the PCA normal sign ambiguity.
    soft_bin(hist, 0, std::abs(np.dot(normals[j])), 1.0);
    soft_bin(hist, 11, std::abs(np.dot(u)), 1.0);
    soft_bin(hist, 22, std::abs(normals[j].dot(u)), 1.0);
  }
  return hist;
}

}  // namespace

FeatureSet compute_features(const PointCloud& cloud, double normal_radius,
                            double feature_radius) {
  if (cloud.size() < 10) {
    throw TooFewPoints("feature computation needs at least 10 points");
  }
  if (!(normal_radius > 0.0) || !(feature_radius > 0.0)) {
    throw Error("feature radii must be > 0");
  }
  const std::size_t n = cloud.size();
  const std::vector<Vec3> normals = estimate_normals(cloud, normal_radius);
  const detail::SpatialGrid grid(cloud.points, feature_radius);

  std::vector<std::vector<int>> neighborhoods(n);
  std::vector<std::array<double, kFeatureDim>> spfh(n);
  for (std::size_t i = 0; i < n; ++i) {
    neighborhoods[i] =
        grid.neighbors_within(cloud.points[i], feature_radius);
    spfh[i] = spfh_at(cloud, normals, neighborhoods[i], static_cast<int>(i));
    l1_normalize(spfh[i]);
  }

  // Two-pass aggregation: own histogram plus a distance-weighted average of
  // the neighbors' histograms, blended half/half.
  FeatureSet out;
  out.descriptors.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::array<double, kFeatureDim> ctx{};
    double wsum = 0.0;
    for (int j : neighborhoods[i]) {
      if (j == static_cast<int>(i)) continue;
      const double d = (cloud.points[j] - cloud.points[i]).norm();
      const double w = 1.0 / (1.0 + d / feature_radius);
      for (int b = 0; b < kFeatureDim; ++b) ctx[b] += w * spfh[j][b];
      wsum += w;
    }
    std::array<double, kFeatureDim>& desc = out.descriptors[i];
    for (int b = 0; b < kFeatureDim; ++b) {
      desc[b] = 0.5 * spfh[i][b] + (wsum > 0.0 ? 0.5 * ctx[b] / wsum : 0.0);
    }
    l1_normalize(desc);
  }
  return out;
}

namespace {

double desc_sqdist(const std::array<double, kFeatureDim>& a,
                   const std::array<double, kFeatureDim>& b) {
  double s = 0.0;
  for (int i = 0; i < kFeatureDim; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::vector<int> nearest_in(const FeatureSet& from, const FeatureSet& to) {
  std::vector<int> nn(from.size(), -1);
  for (std::size_t i = 0; i < from.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < to.size(); ++j) {
      const double d = desc_sqdist(from.descriptors[i], to.descriptors[j]);
      if (d < best) {
        best = d;
        nn[i] = static_cast<int>(j);
      }
    }
  }
  return nn;
}

struct InlierStats {
  int count = 0;
  double rmse = 0.0;
};

InlierStats count_inliers(const std::vector<Vec3>& src,
                          const detail::SpatialGrid& dst_grid,
                          const Pose& transform, double corr_dist) {
  InlierStats stats;
  double sq_sum = 0.0;
  for (const Vec3& p : src) {
    double sq = 0.0;
    if (dst_grid.nearest_within(apply(transform, p), corr_dist, &sq) >= 0) {
      ++stats.count;
      sq_sum += sq;
    }
  }
  stats.rmse = stats.count > 0 ? std::sqrt(sq_sum / stats.count) : 0.0;
  return stats;
}

}  // namespace

RegistrationResult global_register(const PointCloud& src, const PointCloud& dst,
                                   const RegistrationParams& params) {
  if (src.size() < 10 || dst.size() < 10) {
    throw TooFewPoints("registration needs at least 10 points per cloud");
  }
  PointCloud s = voxel_downsample(src, params.voxel);
  PointCloud d = voxel_downsample(dst, params.voxel);
  if (s.size() < 10) s = src;
  if (d.size() < 10) d = dst;

  const FeatureSet fs =
      compute_features(s, params.normal_radius, params.feature_radius);
  const FeatureSet fd =
      compute_features(d, params.normal_radius, params.feature_radius);

  // Mutual nearest neighbors in descriptor space.
  const std::vector<int> s2d = nearest_in(fs, fd);
  const std::vector<int> d2s = nearest_in(fd, fs);
  std::vector<std::pair<int, int>> corr;
  for (std::size_t i = 0; i < s2d.size(); ++i) {
    if (s2d[i] >= 0 && d2s[s2d[i]] == static_cast<int>(i)) {
      corr.emplace_back(static_cast<int>(i), s2d[i]);
    }
  }
  if (corr.size() < 3) {
    throw RegistrationFailed("fewer than 3 mutual feature matches", 0.0);
  }

  const detail::SpatialGrid dst_grid(d.points, params.corr_dist);
  const int m = static_cast<int>(corr.size());

  Pose best_pose;
  int best_count = -1;
  for (int it = 0; it < params.ransac_iters; ++it) {
    Rng rng(Rng::derive(params.seed, static_cast<std::uint64_t>(it)));
    const int c0 = rng.uniform_int(m);
    const int c1 = rng.uniform_int(m);
    const int c2 = rng.uniform_int(m);
    if (c0 == c1 || c0 == c2 || c1 == c2) continue;

    const std::array<int, 3> picks{c0, c1, c2};
    std::vector<Vec3> sp(3), dp(3);
    for (int k = 0; k < 3; ++k) {
      sp[k] = s.points[corr[picks[k]].first];
      dp[k] = d.points[corr[picks[k]].second];
    }
    // Edge-length similarity: cheap rejection of inconsistent samples.
    bool ok = true;
    for (int k = 0; k < 3 && ok; ++k) {
      const double es = (sp[k] - sp[(k + 1) % 3]).norm();
      const double ed = (dp[k] - dp[(k + 1) % 3]).norm();
      ok = es > 2.0 * params.voxel && ed > 2.0 * params.voxel &&
           es > 0.9 * ed && ed > 0.9 * es;
    }
    if (!ok) continue;

    const Pose hypo = rigid_from_correspondences(sp, dp);
    const InlierStats stats =
        count_inliers(s.points, dst_grid, hypo, params.corr_dist);
    if (stats.count > best_count) {
      best_count = stats.count;
      best_pose = hypo;
    }
  }
  if (best_count < 3) {
    throw RegistrationFailed("no RANSAC hypothesis found enough inliers", 0.0);
  }

  // Point-to-point ICP polish, fixed iteration count.
  Pose pose = best_pose;
  for (int it = 0; it < params.icp_iters; ++it) {
    std::vector<Vec3> sp, dp;
    for (const Vec3& p : s.points) {
      const int j = dst_grid.nearest_within(apply(pose, p), params.corr_dist);
      if (j >= 0) {
        sp.push_back(p);
        dp.push_back(d.points[j]);
      }
    }
    if (sp.size() < 3) break;
    pose = rigid_from_correspondences(sp, dp);
  }

  const InlierStats final_stats =
      count_inliers(s.points, dst_grid, pose, params.corr_dist);
  RegistrationResult result;
  result.transform = pose;
  result.fitness = static_cast<double>(final_stats.count) /
                   static_cast<double>(s.points.size());
  result.inlier_rmse = final_stats.rmse;
  if (result.fitness < params.min_fitness) {
    throw RegistrationFailed("registration fitness below threshold",
                             result.fitness);
  }
  return result;
}

}  // namespace oog
