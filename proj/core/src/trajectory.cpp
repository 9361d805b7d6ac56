#include "oog/trajectory.hpp"

#include "oog/errors.hpp"

namespace oog {

bool KeypointTrajectory::has_visible() const {
  for (std::size_t t = 0; t < occluded.size(); ++t) {
    if (!occluded[t]) return true;
  }
  return false;
}

KeypointTrajectory slice(const KeypointTrajectory& traj, std::size_t begin,
                         std::size_t end) {
  KeypointTrajectory out;
  if (begin > end || end >= traj.size()) {
    throw Error("trajectory slice out of range");
  }
  out.positions.assign(traj.positions.begin() + begin,
                       traj.positions.begin() + end + 1);
  out.occluded.assign(traj.occluded.begin() + begin,
                      traj.occluded.begin() + end + 1);
  return out;
}

KeypointTrajectory fill_gaps(const KeypointTrajectory& traj) {
  const std::size_t n = traj.size();
  if (!traj.has_visible()) {
    throw NoVisibleKeypoints("trajectory has no visible sample");
  }
  KeypointTrajectory out;
  out.positions = traj.positions;
  out.occluded.assign(n, false);

  std::vector<std::size_t> vis;
  for (std::size_t t = 0; t < n; ++t) {
    if (traj.visible(t)) vis.push_back(t);
  }
  // leading gap
  for (std::size_t t = 0; t < vis.front(); ++t) {
    out.positions[t] = traj.positions[vis.front()];
  }
  // trailing gap
  for (std::size_t t = vis.back() + 1; t < n; ++t) {
    out.positions[t] = traj.positions[vis.back()];
  }
  // interior gaps
  for (std::size_t k = 0; k + 1 < vis.size(); ++k) {
    const std::size_t a = vis[k];
    const std::size_t b = vis[k + 1];
    for (std::size_t t = a + 1; t < b; ++t) {
      const double s = static_cast<double>(t - a) / static_cast<double>(b - a);
      out.positions[t] =
          traj.positions[a] * (1.0 - s) + traj.positions[b] * s;
    }
  }
  return out;
}

}  // namespace oog
