#pragma once

#include <cstddef>
#include <vector>

#include "oog/geometry.hpp"

namespace oog {

/// Time-indexed 3D positions of one tracked keypoint, with per-sample
/// occlusion flags. Occluded samples hold whatever the tracker last
/// reported; consumers must check the flag.
struct KeypointTrajectory {
  std::vector<Vec3> positions;
  std::vector<bool> occluded;

  std::size_t size() const { return positions.size(); }
  bool visible(std::size_t t) const { return !occluded[t]; }
  bool has_visible() const;
};

/// Sub-trajectory over [begin, end], inclusive.
KeypointTrajectory slice(const KeypointTrajectory& traj, std::size_t begin,
                         std::size_t end);

/// Fills occluded samples by linear interpolation between the nearest
/// visible neighbors; leading/trailing gaps clamp to the nearest visible
/// sample. Used when exporting trajectories for warping and optimization;
/// velocity statistics work on the raw flags instead.
KeypointTrajectory fill_gaps(const KeypointTrajectory& traj);

}  // namespace oog
