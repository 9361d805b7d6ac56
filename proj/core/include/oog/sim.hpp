#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oog/geometry.hpp"
#include "oog/oog.hpp"
#include "oog/plangen.hpp"
#include "oog/registration.hpp"
#include "oog/se3opt.hpp"

namespace oog {

// ============================================================================
// Toy rigid kinematic simulator: free-floating gripper, rigid objects on a
// table at z = 0, attachment instead of grasp physics. Worlds are values;
// step() is pure.
// ============================================================================

struct SimObject {
  int object_id = 0;
  PointCloud canonical;
  Pose pose;

  PointCloud current_cloud() const { return apply(pose, canonical); }
};

struct World {
  std::vector<SimObject> objects;
  Pose gripper;
  GripState grip = GripState::Open;
  std::optional<int> attached;  // object_id; implies grip == Closed
};

/// Per-object placement ranges, sampled symmetrically: x/y offsets within
/// [-dx, dx] x [-dy, dy] of the demo pose, yaw within [-yaw, yaw] about the
/// object centroid.
struct PlacementRange {
  double dx = 0.0;
  double dy = 0.0;
  double yaw = 0.0;
};

struct Scenario {
  std::uint64_t seed = 0;
  std::vector<PlacementRange> ranges;  // one per object (plan order)
  double clearance = 0.02;             // min pairwise cloud distance, meters
  int max_attempts = 1000;
};

/// Places the plan's initial-keyframe objects at seeded random poses within
/// the ranges (rejection-sampled for pairwise clearance); gripper open at
/// the home pose. Zero-width ranges reproduce the demo layout exactly.
/// Throws PlacementFailure after max_attempts rejections.
World spawn_scenario(const ManipulationPlan& plan, const Scenario& scenario,
                     const Pose& home_pose);

/// Teleports the gripper to target (an attached object follows rigidly),
/// then applies the grip command: open->closed attaches the nearest object
/// whose cloud is within grasp_eps of the gripper interaction point (a
/// failed grasp closes on air, which is state, not an error);
/// closed->open detaches.
World step(const World& w, const Pose& target, GripState grip_cmd,
           double grasp_eps = 0.01);

/// The simulated gripper observed as a hand: two fingertips (coincident at
/// the interaction point when closed, separated along the gripper x-axis
/// when open) plus the grip state.
HandObservation gripper_hand(const World& w, double open_halfwidth = 0.04);

/// Contact relations of the world state, gripper observed as the hand.
ContactSet world_contacts(const World& w, double contact_thresh,
                          double open_halfwidth = 0.04);

// ============================================================================
// Closed-loop rollout
// ============================================================================

enum class FailureMode { MissedTracking, MissedGrasping, UnsatisfiedContacts };

std::string to_string(FailureMode mode);

struct RolloutReport {
  bool success = false;
  std::optional<FailureMode> failure_mode;
  int steps_executed = 0;
  int segments_executed = 0;
  std::vector<double> segment_residuals;
  std::string detail;
};

struct RolloutConfig {
  double contact_thresh = 0.01;
  double grasp_eps = 0.01;
  /// Segments whose demo target displacement stays below this are executed
  /// as approach + grip only (no warped transport).
  double static_eps = 0.005;
  double open_finger_halfwidth = 0.04;
  int max_segment_factor = 3;  // hard cap: factor * F segments
  RegistrationParams registration;
  OptimizerConfig optimizer;
  Pose home_pose{UnitQuaternion::identity(), Vec3{0.0, 0.0, 0.4}};
};

/// The retrieve -> predict -> optimize -> execute loop, repeated until the
/// observed contact set matches the final OOG (success) or a failure is
/// diagnosed: lost retrieval/registration -> MissedTracking, a grasp
/// command that attaches nothing -> MissedGrasping, exhausted segment
/// budget or unreachable final set -> UnsatisfiedContacts.
RolloutReport run_rollout(const ManipulationPlan& plan, const World& world,
                          const RolloutConfig& config = {});

/// True iff the world's contact set equals the final OOG's.
bool check_success(const World& w, const OOG& final_oog, double contact_thresh);

// ============================================================================
// Batch evaluation
// ============================================================================

struct BatchConfig {
  int trials = 100;
  std::uint64_t seed = 0;  // trial i runs scenario seed derive(seed, i)
  std::vector<PlacementRange> ranges;
  double clearance = 0.02;
  RolloutConfig rollout;
  int threads = 1;
};

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  RolloutReport report;
};

/// Runs seeded rollouts over independently spawned worlds. Results are
/// ordered by trial index and identical for any thread count.
std::vector<TrialRecord> run_rollout_batch(const ManipulationPlan& plan,
                                           const BatchConfig& config);

struct BatchSummary {
  int trials = 0;
  int successes = 0;
  double success_rate = 0.0;
  int missed_tracking = 0;
  int missed_grasping = 0;
  int unsatisfied_contacts = 0;
};

BatchSummary summarize(const std::vector<TrialRecord>& records);

}  // namespace oog
