#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oog/oog.hpp"
#include "oog/recording.hpp"

namespace oog {

// ============================================================================
// Velocity statistics
// ============================================================================

/// Per-frame mean keypoint speeds in m/s; series length = frame count - 1.
struct VelocityStats {
  std::vector<double> overall;
  std::map<int, std::vector<double>> per_object;  // keyed by object_id
};

/// Mean speed over keypoints visible at both endpoints of each step.
/// A step with no visible keypoint copies the previous value (0 at t=0).
/// Throws NoVisibleKeypoints when no step has any visible keypoint pair.
VelocityStats keypoint_velocity_series(const Recording& rec);

/// Centered moving average with edge clamping. window must be odd and >= 1.
std::vector<double> smooth_series(const std::vector<double>& series,
                                  int window);

// ============================================================================
// Changepoint detection
// ============================================================================

struct ChangepointParams {
  /// Per-breakpoint penalty; <= 0 selects 3 * log(T) * median(series)^2.
  double penalty = 0.0;
  /// RBF kernel bandwidth; <= 0 selects the median pairwise distance.
  double bandwidth = 0.0;
  /// Minimum segment length in samples.
  int min_segment = 5;
};

/// Exact penalized optimal partitioning of the series under the within-
/// segment RBF kernel cost
///     c(s, t) = (t - s) - (1 / (t - s)) * sum_{s <= i, j < t} k(x_i, x_j),
///     k(x, y) = exp(-(x - y)^2 / (2 * bandwidth^2)).
/// Minimizes sum of segment costs + penalty * (number of breakpoints) over
/// all segmentations with segments >= min_segment. Returns interior split
/// positions in ascending order; callers prepend/append the series bounds.
///
/// Tie rule (applied when totals are equal within 1e-9 * (1 + |total|)):
/// fewer segments win, then the smaller predecessor boundary. Any
/// equally-exact search honoring the same rule returns the same splits.
std::vector<int> detect_keyframes(const std::vector<double>& series,
                                  const ChangepointParams& params);

// ============================================================================
// Plan generation
// ============================================================================

/// Roles of one plan segment (G_f -> G_{f+1}). target_object is the object
/// in motion (or, for motionless segments, the object whose contact
/// relations change); it is empty only for the degenerate static plan.
struct SegmentRoles {
  std::optional<int> target_object;
  std::optional<int> reference_object;
};

struct ManipulationPlan {
  double fps = 0.0;
  int frame_count = 0;
  std::vector<std::string> object_names;
  std::vector<int> keyframes;  // strictly increasing; first 0, last final frame
  std::vector<OOG> oogs;       // one per keyframe
  std::vector<SegmentRoles> segments;  // one per consecutive OOG pair
};

struct PlanConfig {
  double contact_thresh = 0.01;  // meters
  ChangepointParams changepoint;
  int smoothing_window = 3;
  double motion_floor = 0.005;  // m/s
};

struct PlanDiagnostics {
  std::vector<double> velocity_series;
  std::vector<double> velocity_series_smoothed;
  std::vector<int> changepoints;      // raw detector output (series positions)
  std::vector<int> merged_keyframes;  // keyframe frames removed by the merge pass
  std::vector<std::string> warnings;
};

struct PlanResult {
  ManipulationPlan plan;
  PlanDiagnostics diagnostics;
};

/// Builds the OOG sequence for an aligned recording: detects keyframes on
/// the smoothed overall velocity series, constructs one OOG per keyframe,
/// merges adjacent keyframes with identical contact sets (keeping the
/// earlier frame; the structurally required final keyframe survives by
/// dropping its duplicate predecessor instead) and resolves segment roles.
PlanResult generate_plan(const Recording& rec, const PlanConfig& config = {});

/// Mean keypoint speed per object over the segment stored in g (m/s).
std::map<int, double> mean_keypoint_speeds(const OOG& g);

/// The object with maximal mean keypoint speed. Throws NoMotion when every
/// object is below motion_floor (final keyframe or static segment).
int select_target_object(const OOG& g, double motion_floor = 0.005);

/// The non-target object in an edge whose contact flag differs between g_f
/// and g_next and involves the target; empty for pure grasp/release.
/// Multiple candidates resolve to the smallest id with a warning.
std::optional<int> select_reference_object(
    const OOG& g_f, const OOG& g_next, int target,
    std::vector<std::string>* warnings = nullptr);

/// Throws SchemaError on any ManipulationPlan invariant violation.
void validate(const ManipulationPlan& plan);

}  // namespace oog
