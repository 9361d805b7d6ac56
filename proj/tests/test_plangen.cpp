#include <doctest.h>

#include <cmath>
#include <oog/errors.hpp>
#include <oog/plangen.hpp>
#include <oog/rng.hpp>
#include <oog/synthetic.hpp>

#include "support/changepoint_oracle.hpp"
#include "support/generators.hpp"
#include "support/scripted_recording.hpp"

using namespace oog;

namespace {

std::vector<double> piecewise(const std::vector<std::pair<int, double>>& runs,
                              double sigma, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out;
  for (const auto& [len, level] : runs) {
    for (int i = 0; i < len; ++i) {
      out.push_back(level + (sigma > 0 ? sigma * rng.normal() : 0.0));
    }
  }
  return out;
}

/// A grasp-then-transport script: object 0 is grasped at t=16, carried with
/// a pause in the middle of the flight, placed next to object 1, released.
testing::MiniScript pause_script(int scale = 1) {
  testing::MiniScript script;
  script.fps = 30.0 * scale;
  script.frames = 100 * scale;
  const double step = 0.004 / scale;
  const auto a_center = [=](int t) -> Vec3 {
    const int t20 = 20 * scale, t40 = 40 * scale, t52 = 52 * scale,
              t72 = 72 * scale;
    double x = 0.0;
    if (t <= t20) {
      x = 0.0;
    } else if (t <= t40) {
      x = step * (t - t20);
    } else if (t <= t52) {
      x = step * (t40 - t20);  // mid-flight pause
    } else if (t <= t72) {
      x = step * (t40 - t20) + step * (t - t52);
    } else {
      x = step * (t40 - t20) + step * (t72 - t52);
    }
    return {x, 0.0, 0.0};
  };
  script.object_centers.push_back(a_center);
  script.object_centers.push_back([](int) { return Vec3{0.168, 0.0, 0.0}; });
  script.hand = [=](int t) -> HandObservation {
    const int t14 = 14 * scale, t16 = 16 * scale, t78 = 78 * scale;
    HandObservation hand;
    const Vec3 home{-0.2, 0.0, 0.1};
    const Vec3 pos = t < t14 ? home : a_center(t);
    hand.thumb_tip = pos + Vec3{0, 0.002, 0};
    hand.index_tip = pos - Vec3{0, 0.002, 0};
    hand.grip = (t >= t16 && t < t78) ? GripState::Closed : GripState::Open;
    return hand;
  };
  return script;
}

}  // namespace

// ============================================================================
// Velocity statistics
// ============================================================================

TEST_CASE("velocity series: static scene is all zeros") {
  testing::MiniScript script;
  script.frames = 30;
  script.object_centers.push_back([](int) { return Vec3{0, 0, 0}; });
  script.hand = [](int) {
    return HandObservation{{1, 1, 1}, {1, 1.01, 1}, GripState::Open};
  };
  const VelocityStats stats =
      keypoint_velocity_series(testing::build_mini_recording(script));
  CHECK(stats.overall.size() == 29);
  for (double v : stats.overall) CHECK(v == doctest::Approx(0.0));
}

TEST_CASE("velocity series: single keypoint at constant speed") {
  testing::MiniScript script;
  script.frames = 30;
  script.keypoints_per_object = 1;
  script.object_centers.push_back(
      [](int t) { return Vec3{0.01 * t, 0, 0}; });
  script.hand = [](int) {
    return HandObservation{{1, 1, 1}, {1, 1.01, 1}, GripState::Open};
  };
  const VelocityStats stats =
      keypoint_velocity_series(testing::build_mini_recording(script));
  for (double v : stats.overall) CHECK(v == doctest::Approx(0.3).epsilon(1e-9));
}

TEST_CASE("velocity series: mean over two keypoints") {
  // One keypoint at 0.1 m/s, one at 0.3 m/s -> overall 0.2.
  Recording rec;
  rec.version = "1.0";
  rec.fps = 30.0;
  rec.object_names = {"a", "b"};
  for (int t = 0; t < 10; ++t) {
    Frame frame;
    frame.index = t;
    for (int i = 0; i < 2; ++i) {
      ObjectObservation obs;
      obs.object_id = i;
      obs.cloud.points = {{0.0, static_cast<double>(i), 0.0}};
      frame.objects.push_back(obs);
    }
    frame.hand = HandObservation{{1, 1, 1}, {1, 1.01, 1}, GripState::Open};
    rec.frames.push_back(frame);
  }
  rec.keypoint_tracks.resize(2);
  for (int k = 0; k < 2; ++k) {
    rec.keypoint_tracks[k].object_id = k;
    const double speed = k == 0 ? 0.1 : 0.3;
    for (int t = 0; t < 10; ++t) {
      rec.keypoint_tracks[k].trajectory.positions.push_back(
          {speed / 30.0 * t, static_cast<double>(k), 0.0});
      rec.keypoint_tracks[k].trajectory.occluded.push_back(false);
    }
  }
  const VelocityStats stats = keypoint_velocity_series(rec);
  for (double v : stats.overall) CHECK(v == doctest::Approx(0.2).epsilon(1e-9));
  CHECK(stats.per_object.at(0)[0] == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(stats.per_object.at(1)[0] == doctest::Approx(0.3).epsilon(1e-9));
}

TEST_CASE("velocity series: occluded steps copy the previous value") {
  testing::MiniScript script;
  script.frames = 10;
  script.keypoints_per_object = 1;
  script.object_centers.push_back([](int t) { return Vec3{0.01 * t, 0, 0}; });
  script.hand = [](int) {
    return HandObservation{{1, 1, 1}, {1, 1.01, 1}, GripState::Open};
  };
  Recording rec = testing::build_mini_recording(script);
  rec.keypoint_tracks[0].trajectory.occluded[5] = true;  // hides steps 4 and 5
  const VelocityStats stats = keypoint_velocity_series(rec);
  CHECK(stats.overall[4] == doctest::Approx(stats.overall[3]));
  CHECK(stats.overall[5] == doctest::Approx(stats.overall[3]));

  for (std::size_t t = 0; t < rec.keypoint_tracks[0].trajectory.size(); ++t) {
    rec.keypoint_tracks[0].trajectory.occluded[t] = t != 0;
  }
  CHECK_THROWS_AS(keypoint_velocity_series(rec), NoVisibleKeypoints);
}

// ============================================================================
// Changepoint detection
// ============================================================================

TEST_CASE("detect_keyframes: constant series has no changepoints") {
  const std::vector<double> series(60, 0.25);
  ChangepointParams params;
  params.penalty = 1e-6;
  CHECK(detect_keyframes(series, params).empty());
  params.penalty = 0.0;  // auto
  CHECK(detect_keyframes(series, params).empty());
}

TEST_CASE("detect_keyframes: clean step at 50") {
  const std::vector<double> series =
      piecewise({{50, 0.3}, {50, 0.0}}, 0.0, 0);
  const std::vector<int> splits = detect_keyframes(series, {});
  CHECK(splits == std::vector<int>{50});

  const testing::ChangepointOracle oracle(series,
                                          /*penalty computed below*/ 0, 0, 5);
  (void)oracle;
}

TEST_CASE("detect_keyframes: noisy step within +/-2 in >=95% of seeds") {
  int hits = 0;
  for (int seed = 0; seed < 100; ++seed) {
    const std::vector<double> series =
        piecewise({{50, 0.3}, {50, 0.0}}, 0.01, 1000 + seed);
    const std::vector<int> splits = detect_keyframes(series, {});
    if (splits.size() == 1 && std::abs(splits[0] - 50) <= 2) ++hits;
  }
  CHECK(hits >= 95);
}

TEST_CASE("detect_keyframes: equals the DP oracle on random series") {
  Rng rng(71);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 1 + rng.uniform_int(3);
    std::vector<std::pair<int, double>> runs;
    int total = 0;
    for (int i = 0; i <= k; ++i) {
      const int len = 12 + rng.uniform_int(40);
      runs.push_back({len, rng.uniform(0.05, 0.6)});
      total += len;
    }
    if (total > 200) {
      runs.back().first -= (total - 200);
      if (runs.back().first < 12) runs.back().first = 12;
    }
    const double sigma = trial % 2 ? 0.01 : 0.0;
    const std::vector<double> series = piecewise(runs, sigma, 500 + trial);

    // Pin explicit parameters so the oracle sees the identical problem.
    ChangepointParams params;
    params.penalty = 1.0;
    params.bandwidth = 0.05;
    params.min_segment = 5;
    const std::vector<int> got = detect_keyframes(series, params);
    testing::ChangepointOracle oracle(series, params.penalty, params.bandwidth,
                                      params.min_segment);
    CHECK(got == oracle.splits());
  }
}

TEST_CASE("detect_keyframes: matches full enumeration on tiny series") {
  Rng rng(72);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> series;
    const int n = 8 + rng.uniform_int(5);
    for (int i = 0; i < n; ++i) {
      series.push_back(i < n / 2 ? rng.uniform(0.0, 0.05)
                                 : rng.uniform(0.4, 0.5));
    }
    ChangepointParams params;
    params.penalty = 0.5;
    params.bandwidth = 0.1;
    params.min_segment = 3;
    const std::vector<int> got = detect_keyframes(series, params);
    testing::ChangepointOracle oracle(series, params.penalty, params.bandwidth,
                                      params.min_segment);
    const std::vector<int> brute = testing::enumerate_best_segmentation(
        series, params.penalty, params.bandwidth, params.min_segment);
    CHECK(got == oracle.splits());
    CHECK(got == brute);
  }
}

TEST_CASE("detect_keyframes: respects min_segment and rejects short series") {
  const std::vector<double> series = piecewise({{6, 0.3}, {6, 0.0}}, 0.0, 0);
  ChangepointParams params;
  params.min_segment = 6;
  const std::vector<int> splits = detect_keyframes(series, params);
  for (std::size_t i = 0; i < splits.size(); ++i) {
    const int prev = i == 0 ? 0 : splits[i - 1];
    CHECK(splits[i] - prev >= 6);
  }
  params.min_segment = 7;
  CHECK_THROWS_AS(detect_keyframes(series, params), SeriesTooShort);
}

// ============================================================================
// Plan generation
// ============================================================================

TEST_CASE("generate_plan: synthetic pick-place has 4 OOGs, 3 transitions") {
  const Recording rec = make_pickplace_recording({});
  const PlanResult result = generate_plan(rec);
  const ManipulationPlan& plan = result.plan;

  REQUIRE(plan.oogs.size() == 4);
  CHECK(plan.keyframes.front() == 0);
  CHECK(plan.keyframes.back() == 119);
  CHECK(std::abs(plan.keyframes[1] - 30) <= 3);
  CHECK(std::abs(plan.keyframes[2] - 65) <= 3);

  const ContactSet s0 = contact_set(plan.oogs[0]);
  const ContactSet s1 = contact_set(plan.oogs[1]);
  const ContactSet s2 = contact_set(plan.oogs[2]);
  const ContactSet s3 = contact_set(plan.oogs[3]);
  CHECK(s0.empty());
  CHECK(s1 == ContactSet{ContactPair::hand(0)});
  CHECK(s2 == ContactSet{ContactPair::objects(0, 1), ContactPair::hand(0)});
  CHECK(s3 == ContactSet{ContactPair::objects(0, 1)});

  REQUIRE(plan.segments.size() == 3);
  CHECK(plan.segments[0].target_object == 0);
  CHECK(!plan.segments[0].reference_object);  // pure grasp
  CHECK(plan.segments[1].target_object == 0);
  CHECK(plan.segments[1].reference_object == 1);
  CHECK(plan.segments[2].target_object == 0);
  CHECK(!plan.segments[2].reference_object);  // pure release
}

TEST_CASE("generate_plan: static recording collapses to 2 OOGs with warning") {
  testing::MiniScript script;
  script.frames = 60;
  script.object_centers.push_back([](int) { return Vec3{0, 0, 0}; });
  script.object_centers.push_back([](int) { return Vec3{0.2, 0, 0}; });
  script.hand = [](int) {
    return HandObservation{{1, 1, 1}, {1, 1.01, 1}, GripState::Open};
  };
  const PlanResult result =
      generate_plan(testing::build_mini_recording(script));
  CHECK(result.plan.oogs.size() == 2);
  CHECK(contact_set(result.plan.oogs[0]) == contact_set(result.plan.oogs[1]));
  bool warned = false;
  for (const std::string& w : result.diagnostics.warnings) {
    if (w.find("degenerate") != std::string::npos) warned = true;
  }
  CHECK(warned);
}

TEST_CASE("generate_plan: mid-flight pause merges away") {
  const Recording rec = testing::build_mini_recording(pause_script());
  const PlanResult result = generate_plan(rec);
  // The pause creates velocity breakpoints near 40 and 52 whose contact
  // sets equal the grasp keyframe's; the merge pass removes them.
  CHECK(!result.diagnostics.merged_keyframes.empty());
  REQUIRE(result.plan.oogs.size() == 4);
  CHECK(std::abs(result.plan.keyframes[1] - 20) <= 2);
  CHECK(std::abs(result.plan.keyframes[2] - 72) <= 2);
  for (std::size_t f = 0; f + 1 < result.plan.oogs.size(); ++f) {
    CHECK(contact_set(result.plan.oogs[f]) !=
          contact_set(result.plan.oogs[f + 1]));
  }
}

TEST_CASE("generate_plan: keyframe count invariant under upsampling") {
  // Upsampling time by k scales every frame-denominated quantity, so the
  // minimum segment length (frames) scales along with the recording.
  PlanConfig base_config;
  base_config.changepoint.min_segment = 5;
  const PlanResult base = generate_plan(
      testing::build_mini_recording(pause_script(1)), base_config);
  for (int k : {2, 3}) {
    PlanConfig config;
    config.changepoint.min_segment = 5 * k;
    const PlanResult up = generate_plan(
        testing::build_mini_recording(pause_script(k)), config);
    REQUIRE(up.plan.keyframes.size() == base.plan.keyframes.size());
    for (std::size_t i = 0; i < base.plan.keyframes.size(); ++i) {
      CHECK(std::abs(up.plan.keyframes[i] - k * base.plan.keyframes[i]) <= k);
    }
  }
}

TEST_CASE("generate_plan: every OOG satisfies the structural invariants") {
  const Recording rec = make_pickplace_recording({});
  const PlanResult result = generate_plan(rec);
  validate(result.plan);  // throws on violation
  for (std::size_t f = 0; f + 1 < result.plan.oogs.size(); ++f) {
    const OOG& g = result.plan.oogs[f];
    const std::size_t span = static_cast<std::size_t>(
        result.plan.keyframes[f + 1] - result.plan.keyframes[f] + 1);
    for (const PointNode& node : g.point_nodes) {
      CHECK(node.trajectory.size() == span);
    }
  }
  CHECK(result.plan.oogs.back().point_nodes[0].trajectory.size() == 0);
}

// ============================================================================
// Role selection
// ============================================================================

namespace {

OOG oog_with_speeds(double speed_a, double speed_b) {
  OOG g;
  g.fps = 30.0;
  g.object_nodes = {{0, PointCloud{{{0, 0, 0}}, {}}},
                    {1, PointCloud{{{1, 0, 0}}, {}}}};
  g.object_object_edges = {{0, 1, false}};
  g.object_hand_edges = {{0, false}, {1, false}};
  for (int id = 0; id < 2; ++id) {
    PointNode node;
    node.object_id = id;
    const double step = (id == 0 ? speed_a : speed_b) / 30.0;
    for (int t = 0; t < 10; ++t) {
      node.trajectory.positions.push_back({step * t, 0, 0});
      node.trajectory.occluded.push_back(false);
    }
    g.point_nodes.push_back(node);
  }
  return g;
}

}  // namespace

TEST_CASE("select_target_object: fastest object wins, floor enforced") {
  CHECK(select_target_object(oog_with_speeds(0.2, 0.0)) == 0);
  CHECK(select_target_object(oog_with_speeds(0.10, 0.20)) == 1);
  CHECK_THROWS_AS(select_target_object(oog_with_speeds(0.0, 0.0)), NoMotion);
  CHECK_THROWS_AS(select_target_object(oog_with_speeds(0.004, 0.001)),
                  NoMotion);
}

TEST_CASE("select_reference_object: contact-change cases") {
  // Three objects; target = 0.
  const auto make = [](bool c01, bool c02, bool h0) {
    OOG g;
    g.fps = 30.0;
    g.object_nodes = {{0, PointCloud{{{0, 0, 0}}, {}}},
                      {1, PointCloud{{{1, 0, 0}}, {}}},
                      {2, PointCloud{{{2, 0, 0}}, {}}}};
    g.object_object_edges = {{0, 1, c01}, {0, 2, c02}, {1, 2, false}};
    g.object_hand_edges = {{0, h0}, {1, false}, {2, false}};
    return g;
  };

  // (target, B) flips false -> true: reference is B.
  CHECK(select_reference_object(make(false, false, false),
                                make(true, false, false), 0) == 1);
  // Only (target, hand) flips: pure grasp, no reference.
  CHECK(!select_reference_object(make(false, false, false),
                                 make(false, false, true), 0));
  // Both (target,1) and (target,2) flip: smallest id wins with a warning.
  std::vector<std::string> warnings;
  CHECK(select_reference_object(make(false, false, false),
                                make(true, true, false), 0,
                                &warnings) == 1);
  CHECK(warnings.size() == 1);
}

TEST_CASE("select_target_object: invariant under rigid transforms") {
  Rng rng(73);
  const Recording rec = make_pickplace_recording({});
  const PlanResult base = generate_plan(rec);

  const Pose q = testing::random_pose(rng);
  Recording moved = rec;
  for (Frame& frame : moved.frames) {
    for (ObjectObservation& obs : frame.objects) {
      for (Vec3& p : obs.cloud.points) p = apply(q, p);
    }
    frame.hand.thumb_tip = apply(q, frame.hand.thumb_tip);
    frame.hand.index_tip = apply(q, frame.hand.index_tip);
  }
  for (KeypointTrack& track : moved.keypoint_tracks) {
    for (std::size_t t = 0; t < track.trajectory.size(); ++t) {
      if (track.trajectory.visible(t)) {
        track.trajectory.positions[t] = apply(q, track.trajectory.positions[t]);
      }
    }
  }
  const PlanResult transformed = generate_plan(moved);
  REQUIRE(transformed.plan.segments.size() == base.plan.segments.size());
  for (std::size_t f = 0; f < base.plan.segments.size(); ++f) {
    CHECK(transformed.plan.segments[f].target_object ==
          base.plan.segments[f].target_object);
  }
}
