#pragma once

#include <functional>
#include <oog/recording.hpp>
#include <vector>

namespace oog::testing {

/// Builds a minimal recording from scripted object centers and hand states.
/// Each object's cloud is a single point (its center), keypoints are the
/// center plus fixed offsets, so contact distances and velocities are fully
/// controlled by the script.
struct MiniScript {
  double fps = 30.0;
  int frames = 100;
  std::vector<std::function<Vec3(int)>> object_centers;
  std::function<HandObservation(int)> hand;
  int keypoints_per_object = 2;
};

inline Recording build_mini_recording(const MiniScript& script) {
  Recording rec;
  rec.version = "1.0";
  rec.fps = script.fps;
  for (std::size_t i = 0; i < script.object_centers.size(); ++i) {
    rec.object_names.push_back("obj" + std::to_string(i));
  }
  rec.keypoint_tracks.resize(script.object_centers.size() *
                             script.keypoints_per_object);
  for (std::size_t i = 0; i < script.object_centers.size(); ++i) {
    for (int k = 0; k < script.keypoints_per_object; ++k) {
      rec.keypoint_tracks[i * script.keypoints_per_object + k].object_id =
          static_cast<int>(i);
    }
  }
  for (int t = 0; t < script.frames; ++t) {
    Frame frame;
    frame.index = t;
    for (std::size_t i = 0; i < script.object_centers.size(); ++i) {
      const Vec3 c = script.object_centers[i](t);
      ObjectObservation obs;
      obs.object_id = static_cast<int>(i);
      obs.cloud.points = {c};
      frame.objects.push_back(std::move(obs));
      for (int k = 0; k < script.keypoints_per_object; ++k) {
        KeypointTrajectory& traj =
            rec.keypoint_tracks[i * script.keypoints_per_object + k]
                .trajectory;
        traj.positions.push_back(c + Vec3{0.0005 * k, 0.0, 0.0});
        traj.occluded.push_back(false);
      }
    }
    frame.hand = script.hand(t);
    rec.frames.push_back(std::move(frame));
  }
  return rec;
}

}  // namespace oog::testing
