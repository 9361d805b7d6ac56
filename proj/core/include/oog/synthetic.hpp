#pragma once

#include <cstdint>

#include "oog/geometry.hpp"
#include "oog/recording.hpp"

namespace oog {

// ============================================================================
// Synthetic tabletop scenes: deterministic stand-ins for recorded
// demonstrations, used by the example generator and the test suites.
// ============================================================================

/// Surface samples of an axis-aligned box [0,ex] x [0,ey] x [0,ez],
/// area-weighted over the six faces.
PointCloud sample_box_surface(std::uint64_t seed, int n_points, double ex,
                              double ey, double ez);

/// Surface samples of an L-shaped block (two fused boxes, yaw-asymmetric),
/// resting on z = 0 with its corner at the origin. Points interior to the
/// union are rejected so only true surface points remain.
PointCloud make_l_block(std::uint64_t seed, int n_points);

/// Flat L-shaped plate, the coaster analog; resting on z = 0.
PointCloud make_l_plate(std::uint64_t seed, int n_points);

struct PickPlaceParams {
  std::uint64_t seed = 7;
  double fps = 30.0;
  int frames = 120;
  int block_points = 420;
  int coaster_points = 380;
  int keypoints_per_object = 8;
  double keypoint_jitter = 2e-5;  // per-axis tracker noise, meters
  double occlusion_rate = 0.03;   // fraction of occluded keypoint samples
  double transport_yaw = 0.44;    // block yaw change during transport, rad
  /// Camera-frame tilt about the x-axis (radians) plus offset; 0 leaves the
  /// recording already aligned with the table on z = 0.
  double camera_tilt = 0.0;
  Vec3 camera_offset{0.0, 0.0, 0.0};
};

/// A scripted single-hand pick-and-place demonstration: reach, grasp,
/// transport along a lifted arc onto the coaster analog, release, withdraw.
/// The contact set runs {} -> {block,hand} -> {block,hand},{block,coaster}
/// -> {block,coaster}: three transitions.
Recording make_pickplace_recording(const PickPlaceParams& params = {});

}  // namespace oog
