#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oog/geometry.hpp"
#include "oog/trajectory.hpp"

namespace oog {

enum class GripState { Open, Closed };

struct HandObservation {
  Vec3 thumb_tip;
  Vec3 index_tip;
  GripState grip = GripState::Open;

  Vec3 midpoint() const { return (thumb_tip + index_tip) * 0.5; }
};

struct ObjectObservation {
  int object_id = 0;  // index into Recording::object_names
  PointCloud cloud;
};

struct Frame {
  int index = 0;
  std::vector<ObjectObservation> objects;
  HandObservation hand;
};

struct KeypointTrack {
  int object_id = 0;
  KeypointTrajectory trajectory;  // length == frame count
};

/// A demonstration recording: per-frame object point clouds, hand
/// observations and long-horizon keypoint tracks, as produced by an
/// upstream perception stack and serialized to the JSON format described
/// in the README.
struct Recording {
  std::string version;
  double fps = 0.0;
  std::vector<std::string> object_names;
  std::vector<Vec3> table_points;  // optional; empty when absent
  std::vector<Frame> frames;
  std::vector<KeypointTrack> keypoint_tracks;

  std::size_t frame_count() const { return frames.size(); }
  std::size_t object_count() const { return object_names.size(); }
};

/// Parses and fully validates a recording. Throws ParseError on malformed
/// JSON, VersionError on an unsupported version, SchemaError (with the
/// offending path) on any invariant violation.
Recording load_recording(const std::string& text);

/// Serializes with enough digits that load_recording(serialize(r)) == r
/// bit-exactly.
std::string serialize_recording(const Recording& rec);

Recording load_recording_file(const std::string& path);
void save_recording_file(const Recording& rec, const std::string& path);

/// Throws SchemaError if any Recording invariant is violated.
void validate(const Recording& rec);

struct TableAlignParams {
  double dist_thresh = 0.01;  // plane-fit inlier threshold, meters
  int iterations = 256;
  std::uint64_t seed = 0;
  /// Fraction of lowest-z frame-0 points used as the table proxy when no
  /// table_points are declared.
  double fallback_decile = 0.1;
};

/// Fits the table plane (to declared table_points, or to the lowest-z
/// decile of frame-0 object points when none are declared) and rigidly
/// transforms every cloud, keypoint position, fingertip and table point so
/// the table lies on z = 0. Idempotent up to numerical tolerance.
Recording table_align(const Recording& rec, const TableAlignParams& params = {});

}  // namespace oog
