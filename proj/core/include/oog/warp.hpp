#pragma once

#include <optional>
#include <vector>

#include "oog/errors.hpp"
#include "oog/geometry.hpp"
#include "oog/oog.hpp"
#include "oog/plangen.hpp"
#include "oog/registration.hpp"
#include "oog/trajectory.hpp"

namespace oog {

// ============================================================================
// Trajectory normalization and rescaling: strip a demonstrated trajectory
// down to its directional/curvature pattern relative to its own endpoints,
// then re-anchor it onto new start/goal locations.
// ============================================================================

/// Endpoint anchors: the rigid transforms applied to the demo start point
/// and the demo end point respectively.
struct WarpSpec {
  Pose x_start;
  Pose x_end;
};

/// Componentwise progress values; first sample (0,0,0), last (1,1,1).
struct NormalizedTrajectory {
  std::vector<Vec3> values;
};

/// Raised by normalize_trajectory when one component's endpoint span is
/// below eps while the overall endpoint displacement is not.
class DegenerateAxis : public Error {
 public:
  DegenerateAxis(const std::string& message, int axis)
      : Error(message), axis_(axis) {}
  int axis() const { return axis_; }

 private:
  int axis_;
};

/// tau_norm(t)_k = (tau(t)_k - p_start_k) / (p_end_k - p_start_k).
/// Throws DegenerateTrajectory when |p_end - p_start| < eps overall,
/// DegenerateAxis(k) when only component k has span < eps (warp_trajectory
/// substitutes offset interpolation on such axes instead).
NormalizedTrajectory normalize_trajectory(const KeypointTrajectory& traj,
                                          double eps = 1e-6);

/// Re-anchors the trajectory: each component follows
///   tau_hat(t)_k = tau_norm(t)_k * (X_end p_end - X_start p_start)_k
///                + (X_start p_start)_k,
/// with output(0) = X_start p_start and output(T) = X_end p_end exactly.
/// A component with endpoint span < eps falls back to offset interpolation
///   (1-s) a0_k + s a1_k + (tau(t)_k - lerp(p_start_k, p_end_k, s)),
/// s = t / T, which preserves the demo deviation profile on that axis.
/// Throws DegenerateTrajectory when every axis is degenerate.
KeypointTrajectory warp_trajectory(const KeypointTrajectory& traj,
                                   const WarpSpec& spec, double eps = 1e-6);

// ============================================================================
// Segment-level prediction
// ============================================================================

struct SegmentObservation {
  PointCloud target_cloud;
  std::optional<PointCloud> ref_cloud;
};

struct SegmentPrediction {
  std::vector<KeypointTrajectory> trajectories;  // warped, target object
  Pose x_start;
  Pose x_end;
  RegistrationResult target_registration;
  std::optional<RegistrationResult> ref_registration;
};

/// Predicts the target object's motion for the segment (g_f, g_next):
/// registers the demo target cloud at keyframe f against the observed
/// target cloud (X_start) and, when a reference object exists, the demo
/// reference cloud at keyframe f+1 against the observed reference cloud
/// (X_end; otherwise X_end = X_start), then warps every target keypoint
/// trajectory onto the new anchors. Occluded samples are gap-filled before
/// warping. Propagates RegistrationFailed.
SegmentPrediction predict_segment_trajectories(
    const OOG& g_f, const OOG& g_next, const SegmentRoles& roles,
    const SegmentObservation& observed,
    const RegistrationParams& reg_params = {}, double eps = 1e-6);

}  // namespace oog
