#include "oog/synthetic.hpp"

#include <cmath>

#include "oog/errors.hpp"
#include "oog/rng.hpp"

namespace oog {

namespace {

struct Box {
  Vec3 lo;
  Vec3 hi;

  bool strictly_inside(const Vec3& p, double margin) const {
    return p.x > lo.x + margin && p.x < hi.x - margin && p.y > lo.y + margin &&
           p.y < hi.y - margin && p.z > lo.z + margin && p.z < hi.z - margin;
  }
};

Vec3 sample_box_face(Rng& rng, const Box& box) {
  const Vec3 ext = box.hi - box.lo;
  const double ax = ext.y * ext.z;
  const double ay = ext.x * ext.z;
  const double az = ext.x * ext.y;
  const double total = 2.0 * (ax + ay + az);
  double pick = rng.uniform() * total;
  const double u = rng.uniform();
  const double v = rng.uniform();
  if (pick < 2.0 * ax) {
    const double x = pick < ax ? box.lo.x : box.hi.x;
    return {x, box.lo.y + u * ext.y, box.lo.z + v * ext.z};
  }
  pick -= 2.0 * ax;
  if (pick < 2.0 * ay) {
    const double y = pick < ay ? box.lo.y : box.hi.y;
    return {box.lo.x + u * ext.x, y, box.lo.z + v * ext.z};
  }
  pick -= 2.0 * ay;
  const double z = pick < az ? box.lo.z : box.hi.z;
  return {box.lo.x + u * ext.x, box.lo.y + v * ext.y, z};
}

PointCloud sample_union_surface(std::uint64_t seed, int n_points,
                                const std::vector<Box>& boxes) {
  Rng rng(seed);
  std::vector<double> areas;
  double total = 0.0;
  for (const Box& b : boxes) {
    const Vec3 e = b.hi - b.lo;
    const double a = 2.0 * (e.x * e.y + e.y * e.z + e.x * e.z);
    areas.push_back(a);
    total += a;
  }
  PointCloud out;
  out.points.reserve(n_points);
  int guard = 0;
  while (static_cast<int>(out.points.size()) < n_points && guard < n_points * 50) {
    ++guard;
    double pick = rng.uniform() * total;
    std::size_t which = 0;
    while (which + 1 < boxes.size() && pick >= areas[which]) {
      pick -= areas[which];
      ++which;
    }
    const Vec3 p = sample_box_face(rng, boxes[which]);
    bool interior = false;
    for (std::size_t b = 0; b < boxes.size(); ++b) {
      if (b != which && boxes[b].strictly_inside(p, 1e-9)) {
        interior = true;
        break;
      }
    }
    if (!interior) out.points.push_back(p);
  }
  return out;
}

}  // namespace

PointCloud sample_box_surface(std::uint64_t seed, int n_points, double ex,
                              double ey, double ez) {
  return sample_union_surface(seed, n_points,
                              {Box{{0, 0, 0}, {ex, ey, ez}}});
}

PointCloud make_l_block(std::uint64_t seed, int n_points) {
  // Main bar plus a shorter side bar: no yaw symmetry.
  return sample_union_surface(
      seed, n_points,
      {Box{{0.0, 0.0, 0.0}, {0.07, 0.03, 0.03}},
       Box{{0.0, 0.03, 0.0}, {0.03, 0.06, 0.03}}});
}

PointCloud make_l_plate(std::uint64_t seed, int n_points) {
  return sample_union_surface(
      seed, n_points,
      {Box{{0.0, 0.0, 0.0}, {0.10, 0.04, 0.012}},
       Box{{0.0, 0.04, 0.0}, {0.04, 0.09, 0.012}}});
}

namespace {

/// Cosine ease: 0 -> 1 with zero end velocities.
double ease(double s) { return 0.5 * (1.0 - std::cos(M_PI * s)); }

Pose yaw_about(const Vec3& center, double yaw) {
  const UnitQuaternion r = UnitQuaternion::from_axis_angle({0, 0, 1}, yaw);
  return Pose{r, center - r.rotate(center)};
}

}  // namespace

Recording make_pickplace_recording(const PickPlaceParams& params) {
  // Scene layout (aligned frame, table on z = 0).
  const Vec3 block_at{0.00, -0.15, 0.0};
  const Vec3 coaster_at{0.18, 0.12, 0.0};
  const Vec3 hand_home{-0.12, -0.30, 0.18};
  const Vec3 hand_rest{-0.10, -0.28, 0.22};

  PointCloud block = make_l_block(Rng::derive(params.seed, 1),
                                  params.block_points);
  PointCloud coaster = make_l_plate(Rng::derive(params.seed, 2),
                                    params.coaster_points);
  for (Vec3& p : block.points) p += block_at;
  for (Vec3& p : coaster.points) p += coaster_at;

  const Vec3 block_center = block.centroid();
  // Grasp on the top face of the main bar.
  const Vec3 grasp_point = block_at + Vec3{0.035, 0.015, 0.030};
  // Final block placement: center over the coaster's side arm, raised by
  // the plate thickness so the block rests on top of it.
  const Vec3 goal_shift{coaster_at.x + 0.035 - block_center.x,
                        coaster_at.y + 0.045 - block_center.y, 0.012};

  // Timeline (frame indices, inclusive).
  const int t_reach_end = 24;    // hand arrives at the grasp point
  const int t_close = 26;        // grip closes
  const int t_move_begin = 30;   // block starts moving
  const int t_move_end = 65;     // block settled on the coaster
  const int t_open = 72;         // grip releases
  const int frames = params.frames;
  if (frames < t_open + 10) throw Error("pick-place script needs >= 82 frames");

  // Block pose per frame (relative to its initial placement).
  const auto block_pose_at = [&](int t) -> Pose {
    if (t < t_move_begin) return Pose::identity();
    const double s =
        ease(std::min(1.0, static_cast<double>(t - t_move_begin) /
                               static_cast<double>(t_move_end - t_move_begin)));
    const Vec3 lift{0.0, 0.0, 0.08 * std::sin(M_PI * s)};
    Pose p = yaw_about(block_center, params.transport_yaw * s);
    p.translation += goal_shift * s + lift;
    return p;
  };

  const auto hand_at = [&](int t) -> HandObservation {
    HandObservation hand;
    Vec3 pos;
    double finger = 0.012;  // open spread
    if (t <= t_reach_end) {
      const double s = ease(static_cast<double>(t) / t_reach_end);
      pos = hand_home * (1.0 - s) + grasp_point * s;
    } else if (t < t_open) {
      pos = apply(block_pose_at(t), grasp_point);
    } else {
      const double s = ease(std::min(
          1.0, static_cast<double>(t - t_open) / (frames - 1 - t_open)));
      const Vec3 released = apply(block_pose_at(t_move_end), grasp_point);
      pos = released * (1.0 - s) + hand_rest * s;
    }
    hand.grip = (t >= t_close && t < t_open) ? GripState::Closed
                                             : GripState::Open;
    if (hand.grip == GripState::Closed) finger = 0.004;
    hand.thumb_tip = pos + Vec3{0.0, finger, 0.0};
    hand.index_tip = pos - Vec3{0.0, finger, 0.0};
    return hand;
  };

  Recording rec;
  rec.version = "1.0";
  rec.fps = params.fps;
  rec.object_names = {"block", "coaster"};

  // Table points: a grid patch of the tabletop.
  for (int ix = 0; ix < 20; ++ix) {
    for (int iy = 0; iy < 20; ++iy) {
      rec.table_points.push_back(
          {-0.30 + ix * 0.035, -0.35 + iy * 0.037, 0.0});
    }
  }

  // Keypoints: a seeded subset of each object's surface points.
  Rng kp_rng(Rng::derive(params.seed, 3));
  std::vector<Vec3> block_kps, coaster_kps;
  for (int k = 0; k < params.keypoints_per_object; ++k) {
    block_kps.push_back(
        block.points[kp_rng.uniform_int(static_cast<int>(block.size()))]);
    coaster_kps.push_back(
        coaster.points[kp_rng.uniform_int(static_cast<int>(coaster.size()))]);
  }

  Rng noise_rng(Rng::derive(params.seed, 4));
  Rng occ_rng(Rng::derive(params.seed, 5));
  const Pose camera = [&] {
    Pose tilt;
    tilt.rotation =
        UnitQuaternion::from_axis_angle({1, 0, 0}, params.camera_tilt);
    tilt.translation = params.camera_offset;
    return tilt;
  }();
  const bool use_camera =
      params.camera_tilt != 0.0 || params.camera_offset.norm() != 0.0;
  const auto to_camera = [&](const Vec3& p) {
    return use_camera ? apply(camera, p) : p;
  };

  rec.keypoint_tracks.resize(2 * params.keypoints_per_object);
  for (int k = 0; k < params.keypoints_per_object; ++k) {
    rec.keypoint_tracks[k].object_id = 0;
    rec.keypoint_tracks[params.keypoints_per_object + k].object_id = 1;
  }

  for (int t = 0; t < frames; ++t) {
    const Pose bp = block_pose_at(t);
    Frame frame;
    frame.index = t;

    ObjectObservation block_obs;
    block_obs.object_id = 0;
    block_obs.cloud.points.reserve(block.size());
    for (const Vec3& p : block.points) {
      block_obs.cloud.points.push_back(to_camera(apply(bp, p)));
    }
    ObjectObservation coaster_obs;
    coaster_obs.object_id = 1;
    coaster_obs.cloud.points.reserve(coaster.size());
    for (const Vec3& p : coaster.points) {
      coaster_obs.cloud.points.push_back(to_camera(p));
    }
    frame.objects = {std::move(block_obs), std::move(coaster_obs)};

    HandObservation hand = hand_at(t);
    hand.thumb_tip = to_camera(hand.thumb_tip);
    hand.index_tip = to_camera(hand.index_tip);
    frame.hand = hand;
    rec.frames.push_back(std::move(frame));

    const auto jitter = [&] {
      return Vec3{params.keypoint_jitter * noise_rng.normal(),
                  params.keypoint_jitter * noise_rng.normal(),
                  params.keypoint_jitter * noise_rng.normal()};
    };
    for (int k = 0; k < params.keypoints_per_object; ++k) {
      const bool occluded = t != 0 && t != frames - 1 &&
                            occ_rng.uniform() < params.occlusion_rate;
      KeypointTrajectory& btraj = rec.keypoint_tracks[k].trajectory;
      btraj.positions.push_back(
          occluded ? Vec3{} : to_camera(apply(bp, block_kps[k])) + jitter());
      btraj.occluded.push_back(occluded);

      const bool occluded2 = t != 0 && t != frames - 1 &&
                             occ_rng.uniform() < params.occlusion_rate;
      KeypointTrajectory& ctraj =
          rec.keypoint_tracks[params.keypoints_per_object + k].trajectory;
      ctraj.positions.push_back(occluded2 ? Vec3{}
                                          : to_camera(coaster_kps[k]) + jitter());
      ctraj.occluded.push_back(occluded2);
    }
  }

  if (use_camera) {
    for (Vec3& p : rec.table_points) p = apply(camera, p);
  }
  return rec;
}

}  // namespace oog
