#include "oog/warp.hpp"

#include <cmath>

#include "oog/errors.hpp"

namespace oog {

namespace {

double component(const Vec3& v, int k) {
  return k == 0 ? v.x : (k == 1 ? v.y : v.z);
}

void set_component(Vec3& v, int k, double value) {
  (k == 0 ? v.x : (k == 1 ? v.y : v.z)) = value;
}

}  // namespace

NormalizedTrajectory normalize_trajectory(const KeypointTrajectory& traj,
                                          double eps) {
  if (traj.size() < 2) throw Error("trajectory needs at least 2 samples");
  const Vec3 p_start = traj.positions.front();
  const Vec3 p_end = traj.positions.back();
  if ((p_end - p_start).norm() < eps) {
    throw DegenerateTrajectory("trajectory endpoints coincide");
  }
  for (int k = 0; k < 3; ++k) {
    if (std::abs(component(p_end, k) - component(p_start, k)) < eps) {
      throw DegenerateAxis("endpoint span below eps on axis " +
                               std::to_string(k),
                           k);
    }
  }
  NormalizedTrajectory out;
  out.values.reserve(traj.size());
  for (const Vec3& p : traj.positions) {
    Vec3 v;
    for (int k = 0; k < 3; ++k) {
      set_component(v, k,
                    (component(p, k) - component(p_start, k)) /
                        (component(p_end, k) - component(p_start, k)));
    }
    out.values.push_back(v);
  }
  return out;
}

KeypointTrajectory warp_trajectory(const KeypointTrajectory& traj,
                                   const WarpSpec& spec, double eps) {
  if (traj.size() < 2) throw Error("trajectory needs at least 2 samples");
  const Vec3 p_start = traj.positions.front();
  const Vec3 p_end = traj.positions.back();
  if ((p_end - p_start).norm() < eps) {
    throw DegenerateTrajectory("trajectory endpoints coincide");
  }
  const Vec3 a0 = apply(spec.x_start, p_start);
  const Vec3 a1 = apply(spec.x_end, p_end);
  const std::size_t n = traj.size();

  KeypointTrajectory out;
  out.positions.resize(n);
  out.occluded.assign(n, false);
  for (std::size_t t = 0; t < n; ++t) {
    const Vec3& p = traj.positions[t];
    const double s = static_cast<double>(t) / static_cast<double>(n - 1);
    Vec3 v;
    for (int k = 0; k < 3; ++k) {
      const double span = component(p_end, k) - component(p_start, k);
      double value;
      if (std::abs(span) >= eps) {
        const double progress = (component(p, k) - component(p_start, k)) / span;
        value = progress * (component(a1, k) - component(a0, k)) +
                component(a0, k);
      } else {
        // Offset interpolation: anchor lerp plus the demo's deviation from
        // its own endpoint lerp.
        const double anchor =
            (1.0 - s) * component(a0, k) + s * component(a1, k);
        const double demo_lerp =
            (1.0 - s) * component(p_start, k) + s * component(p_end, k);
        value = anchor + (component(p, k) - demo_lerp);
      }
      set_component(v, k, value);
    }
    out.positions[t] = v;
  }
  return out;
}

namespace {

const PointCloud& cloud_of(const OOG& g, int object_id) {
  for (const ObjectNode& node : g.object_nodes) {
    if (node.object_id == object_id) return node.cloud;
  }
  throw Error("object " + std::to_string(object_id) + " not in OOG");
}

/// Warp with every axis treated as degenerate: pure anchor interpolation
/// plus the demo deviation profile. Used when a whole trajectory is static.
KeypointTrajectory warp_static(const KeypointTrajectory& traj,
                               const WarpSpec& spec) {
  const Vec3 p_start = traj.positions.front();
  const Vec3 p_end = traj.positions.back();
  const Vec3 a0 = apply(spec.x_start, p_start);
  const Vec3 a1 = apply(spec.x_end, p_end);
  const std::size_t n = traj.size();
  KeypointTrajectory out;
  out.positions.resize(n);
  out.occluded.assign(n, false);
  for (std::size_t t = 0; t < n; ++t) {
    const double s = static_cast<double>(t) / static_cast<double>(n - 1);
    const Vec3 anchor = a0 * (1.0 - s) + a1 * s;
    const Vec3 demo_lerp = p_start * (1.0 - s) + p_end * s;
    out.positions[t] = anchor + (traj.positions[t] - demo_lerp);
  }
  return out;
}

}  // namespace

SegmentPrediction predict_segment_trajectories(
    const OOG& g_f, const OOG& g_next, const SegmentRoles& roles,
    const SegmentObservation& observed, const RegistrationParams& reg_params,
    double eps) {
  if (!roles.target_object) {
    throw Error("segment has no target object");
  }
  const int target = *roles.target_object;

  SegmentPrediction out;
  out.target_registration =
      global_register(cloud_of(g_f, target), observed.target_cloud, reg_params);
  out.x_start = out.target_registration.transform;
  if (roles.reference_object) {
    if (!observed.ref_cloud) {
      throw Error("segment has a reference object but none was observed");
    }
    out.ref_registration = global_register(
        cloud_of(g_next, *roles.reference_object), *observed.ref_cloud,
        reg_params);
    out.x_end = out.ref_registration->transform;
  } else {
    out.x_end = out.x_start;  // grasp-like segment: move relative to target
  }

  const WarpSpec spec{out.x_start, out.x_end};
  for (const PointNode& node : g_f.point_nodes) {
    if (node.object_id != target || node.trajectory.size() < 2) continue;
    const KeypointTrajectory filled = fill_gaps(node.trajectory);
    try {
      out.trajectories.push_back(warp_trajectory(filled, spec, eps));
    } catch (const DegenerateTrajectory&) {
      out.trajectories.push_back(warp_static(filled, spec));
    }
  }
  return out;
}

}  // namespace oog
