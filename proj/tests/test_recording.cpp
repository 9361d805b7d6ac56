#include <doctest.h>

#include <cmath>
#include <oog/errors.hpp>
#include <oog/json_io.hpp>
#include <oog/recording.hpp>
#include <oog/rng.hpp>
#include <oog/synthetic.hpp>

#include "support/generators.hpp"

using namespace oog;

namespace {

const char* kMinimalRecording = R"({
  "version": "1.0",
  "fps": 30.0,
  "object_names": ["cube"],
  "frames": [
    {"index": 0,
     "objects": [{"object_id": 0, "points": [[0,0,0],[0.01,0,0],[0,0.01,0]]}],
     "hand": {"thumb_tip": [0.1,0,0.1], "index_tip": [0.1,0.02,0.1], "grip": "open"}},
    {"index": 1,
     "objects": [{"object_id": 0, "points": [[0,0,0],[0.01,0,0],[0,0.01,0]]}],
     "hand": {"thumb_tip": [0.1,0,0.1], "index_tip": [0.1,0.02,0.1], "grip": "open"}}
  ],
  "keypoint_tracks": [
    {"object_id": 0, "positions": [[0,0,0],[0.001,0,0]]}
  ]
})";

bool recordings_equal(const Recording& a, const Recording& b) {
  const std::string sa = serialize_recording(a);
  const std::string sb = serialize_recording(b);
  return sa == sb;
}

double max_pairwise_distance_change(const Frame& a, const Frame& b) {
  double worst = 0.0;
  const auto& pa = a.objects[0].cloud.points;
  const auto& pb = b.objects[0].cloud.points;
  for (std::size_t i = 0; i + 1 < pa.size(); i += 7) {
    for (std::size_t j = i + 1; j < pa.size(); j += 11) {
      worst = std::max(worst, std::abs((pa[i] - pa[j]).norm() -
                                       (pb[i] - pb[j]).norm()));
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("load_recording: minimal valid file") {
  const Recording rec = load_recording(kMinimalRecording);
  CHECK(rec.frames.size() == 2);
  CHECK(rec.object_names.size() == 1);
  CHECK(rec.keypoint_tracks.size() == 1);
  CHECK(rec.fps == doctest::Approx(30.0));
}

TEST_CASE("load_recording: malformed JSON") {
  CHECK_THROWS_AS(load_recording("{not json"), ParseError);
}

TEST_CASE("load_recording: track length mismatch names the track") {
  std::string text = kMinimalRecording;
  const std::string needle = "\"positions\": [[0,0,0],[0.001,0,0]]";
  text.replace(text.find(needle), needle.size(),
               "\"positions\": [[0,0,0]]");
  try {
    load_recording(text);
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    CHECK(e.path().find("keypoint_tracks[0]") != std::string::npos);
  }
}

TEST_CASE("load_recording: unsupported version") {
  std::string text = kMinimalRecording;
  const std::string needle = "\"version\": \"1.0\"";
  text.replace(text.find(needle), needle.size(), "\"version\": \"9.0\"");
  CHECK_THROWS_AS(load_recording(text), VersionError);
}

TEST_CASE("load_recording: schema violations carry paths") {
  std::string text = kMinimalRecording;
  const std::string needle = "\"fps\": 30.0";
  text.replace(text.find(needle), needle.size(), "\"fps\": -1");
  CHECK_THROWS_AS(load_recording(text), SchemaError);
}

TEST_CASE("recording round trip is bit exact") {
  PickPlaceParams params;
  params.frames = 90;
  params.occlusion_rate = 0.05;
  const Recording rec = make_pickplace_recording(params);
  const std::string once = serialize_recording(rec);
  const Recording reloaded = load_recording(once);
  CHECK(serialize_recording(reloaded) == once);
}

TEST_CASE("table_align: aligned recording is a fixed point") {
  PickPlaceParams params;
  params.frames = 90;
  const Recording rec = make_pickplace_recording(params);  // table on z=0
  const Recording aligned = table_align(rec);
  double worst = 0.0;
  for (std::size_t f = 0; f < rec.frames.size(); ++f) {
    const auto& a = rec.frames[f].objects[0].cloud.points;
    const auto& b = aligned.frames[f].objects[0].cloud.points;
    for (std::size_t i = 0; i < a.size(); ++i) {
      worst = std::max(worst, (a[i] - b[i]).norm());
    }
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("table_align: undoes a camera tilt") {
  PickPlaceParams params;
  params.frames = 90;
  params.camera_tilt = 30.0 * M_PI / 180.0;
  params.camera_offset = {0.02, -0.05, 0.04};
  const Recording rec = make_pickplace_recording(params);
  const Recording aligned = table_align(rec);
  for (const Vec3& p : aligned.table_points) {
    CHECK(std::abs(p.z) < 0.01);
  }
  // Objects rest on the table again: frame-0 cloud minima near z=0.
  double min_z = 1e9;
  for (const ObjectObservation& obs : aligned.frames[0].objects) {
    for (const Vec3& p : obs.cloud.points) min_z = std::min(min_z, p.z);
  }
  CHECK(std::abs(min_z) < 0.01);
}

TEST_CASE("table_align: idempotent and rigid") {
  PickPlaceParams params;
  params.frames = 90;
  params.camera_tilt = 0.35;
  const Recording rec = make_pickplace_recording(params);
  const Recording once = table_align(rec);
  const Recording twice = table_align(once);
  double worst = 0.0;
  for (std::size_t f = 0; f < once.frames.size(); ++f) {
    const auto& a = once.frames[f].objects[0].cloud.points;
    const auto& b = twice.frames[f].objects[0].cloud.points;
    for (std::size_t i = 0; i < a.size(); ++i) {
      worst = std::max(worst, (a[i] - b[i]).norm());
    }
    CHECK(max_pairwise_distance_change(rec.frames[f], once.frames[f]) < 1e-9);
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("table_align: lowest-z decile fallback when no table points") {
  // The fallback assumes a roughly level camera: under strong tilt the
  // lowest-z decile concentrates on the low edge of the scene.
  PickPlaceParams params;
  params.frames = 90;
  params.camera_tilt = 0.1;
  Recording rec = make_pickplace_recording(params);
  rec.table_points.clear();
  const Recording aligned = table_align(rec);
  // The proxy plane comes from object bottoms, which rest on the table.
  double min_z = 1e9, max_min_z = -1e9;
  for (const ObjectObservation& obs : aligned.frames[0].objects) {
    double obj_min = 1e9;
    for (const Vec3& p : obs.cloud.points) obj_min = std::min(obj_min, p.z);
    min_z = std::min(min_z, obj_min);
    max_min_z = std::max(max_min_z, obj_min);
  }
  CHECK(std::abs(min_z) < 0.02);
  CHECK(std::abs(max_min_z) < 0.02);
}

TEST_CASE("fill_gaps: interpolates interior and clamps edges") {
  KeypointTrajectory traj;
  traj.positions = {{0, 0, 0}, {0, 0, 0}, {0.2, 0, 0}, {0.3, 0, 0}, {0, 0, 0}};
  traj.occluded = {true, false, true, false, true};
  const KeypointTrajectory filled = fill_gaps(traj);
  CHECK((filled.positions[0] - Vec3{0, 0, 0}).norm() ==
        doctest::Approx(0.0));  // clamps to first visible
  CHECK(filled.positions[2].x == doctest::Approx(0.15));  // midpoint
  CHECK(filled.positions[4].x == doctest::Approx(0.3));   // clamps to last
  for (std::size_t t = 0; t < filled.size(); ++t) CHECK(filled.visible(t));
}
