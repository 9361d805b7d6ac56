#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "oog/geometry.hpp"
#include "oog/recording.hpp"
#include "oog/trajectory.hpp"

namespace oog {

// ============================================================================
// End-effector action synthesis: per-step SE(3) transports X_i minimizing
//   J = sum_i sum_j || tau_j(i+1) - X_i tau_j(i) ||^2
// by two-stage projected gradient descent (rotation-only, then joint), with
// the quaternion renormalized after every step.
// ============================================================================

struct OptimizerConfig {
  int rot_stage_steps = 200;
  int joint_stage_steps = 200;
  double step_size = 1e-2;  // initial backtracking step
  std::uint64_t seed = 0;
  /// Convergence bound: J_final <= tolerance * steps * tracks.
  double tolerance = 1e-6;
};

struct OptimizeResult {
  std::vector<Pose> poses;  // X_0 .. X_{N-1}
  double final_residual = 0.0;
  bool converged = true;
};

/// Optimizes the transport sequence for a set of equal-length keypoint
/// trajectories (N+1 samples each -> N poses). Each X_i is an independent
/// sub-problem seeded from (config.seed, i): the quaternion is drawn from a
/// standard normal and normalized, the translation from N(0, 0.01 m), then
/// stage one optimizes rotation only (translation held at the closed-form
/// centroid displacement) and stage two optimizes both. Occluded samples
/// are gap-filled first. Throws NonFiniteGradient if the gradient leaves
/// the finite range; a residual above the tolerance only clears the
/// converged flag, callers decide whether to proceed.
OptimizeResult optimize_actions(const std::vector<KeypointTrajectory>& tracks,
                                const OptimizerConfig& config = {});

struct ActionSequence {
  std::vector<Pose> poses;
  std::vector<GripState> grip_commands;  // one per pose
  Vec3 interaction_point;  // gripper approach target, world frame
};

/// Grip schedule per step: the hand state at keyframe f, switching to the
/// f+1 state on the final step. The interaction point is the thumb/index
/// midpoint mapped through x_start; a grasp transition (open -> closed)
/// takes it from the f+1 hand (where the demonstrated grasp is), anything
/// else from the f hand.
ActionSequence augment_with_grip(const std::vector<Pose>& actions,
                                 const HandObservation& hand_at_f,
                                 const HandObservation& hand_at_f1,
                                 const Pose& x_start);

/// Cumulative end-effector targets: pose_k = X_{k-1} ∘ ... ∘ X_0 ∘ start.
/// The transports are world-frame, so a gripper rigidly following the
/// keypoints visits exactly these poses.
std::vector<Pose> absolute_poses(const std::vector<Pose>& transports,
                                 const Pose& start);

// ============================================================================
// Diagnostic surface for gradient checks: the per-step transport objective
// J_i(q, t) = sum_j || R(q/|q|) from_j + t - to_j ||^2 as a function of a
// raw (not necessarily unit) quaternion.
// ============================================================================

struct TransportObjective {
  std::vector<Vec3> from;
  std::vector<Vec3> to;

  double value(const std::array<double, 4>& q, const Vec3& t) const;
  /// Analytic gradient wrt the raw quaternion (through the normalization)
  /// and the translation.
  void gradient(const std::array<double, 4>& q, const Vec3& t,
                std::array<double, 4>& grad_q, Vec3& grad_t) const;
};

}  // namespace oog
