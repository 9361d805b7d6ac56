#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "oog/geometry.hpp"

namespace oog {

// ============================================================================
// Rotation-invariant local geometric descriptors (FPFH-style histograms of
// pairwise normal/direction angles, 3 features x 11 soft bins = 33 dims)
// and seeded global registration: feature matching + 3-point RANSAC + ICP
// polish.
// ============================================================================

inline constexpr int kFeatureDim = 33;

struct FeatureSet {
  std::vector<std::array<double, kFeatureDim>> descriptors;  // L1-normalized

  std::size_t size() const { return descriptors.size(); }
};

/// Surface normals from PCA over neighbors within radius (falling back to
/// the 3 nearest points in sparse regions). Sign is unspecified; feature
/// computation is insensitive to it.
std::vector<Vec3> estimate_normals(const PointCloud& cloud, double radius);

/// Per-point descriptors, invariant under rigid motion of the whole cloud.
/// Throws TooFewPoints below 10 points.
FeatureSet compute_features(const PointCloud& cloud, double normal_radius,
                            double feature_radius);

/// Grid average downsampling; deterministic (cells emitted in first-seen
/// order). voxel <= 0 returns the input unchanged.
PointCloud voxel_downsample(const PointCloud& cloud, double voxel);

struct RegistrationParams {
  int ransac_iters = 1000;
  double corr_dist = 0.0075;  // inlier distance, meters
  std::uint64_t seed = 0;
  double voxel = 0.005;        // downsampling before features
  double normal_radius = 0.01;   // 2 * voxel
  double feature_radius = 0.025;  // 5 * voxel
  double min_fitness = 0.25;
  int icp_iters = 30;
};

struct RegistrationResult {
  Pose transform;       // maps src points onto dst
  double fitness = 0.0;  // fraction of src points within corr_dist of dst
  double inlier_rmse = 0.0;
};

/// Estimates the rigid transform aligning src onto dst: mutual-nearest-
/// neighbor feature matches, RANSAC over 3-point correspondence samples
/// scored by inlier count at corr_dist, best hypothesis refined by
/// point-to-point ICP (fixed icp_iters iterations). Deterministic for a
/// fixed seed (per-iteration RNG streams derived from (seed, iteration)).
/// Throws RegistrationFailed when the final fitness is below min_fitness,
/// TooFewPoints below 10 points per cloud.
RegistrationResult global_register(const PointCloud& src, const PointCloud& dst,
                                   const RegistrationParams& params = {});

}  // namespace oog
