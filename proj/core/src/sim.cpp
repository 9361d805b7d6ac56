#include "oog/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "oog/errors.hpp"
#include "oog/rng.hpp"
#include "oog/trajectory.hpp"
#include "oog/warp.hpp"
#include "spatial_grid.hpp"

namespace oog {

std::string to_string(FailureMode mode) {
  switch (mode) {
    case FailureMode::MissedTracking:
      return "missed_tracking";
    case FailureMode::MissedGrasping:
      return "missed_grasping";
    case FailureMode::UnsatisfiedContacts:
      return "unsatisfied_contacts";
  }
  return "unknown";
}

World spawn_scenario(const ManipulationPlan& plan, const Scenario& scenario,
                     const Pose& home_pose) {
  const OOG& g0 = plan.oogs.front();
  const std::size_t n = g0.object_nodes.size();
  if (scenario.ranges.size() != n) {
    throw Error("scenario needs one placement range per plan object");
  }

  Rng rng(scenario.seed);
  for (int attempt = 0; attempt < scenario.max_attempts; ++attempt) {
    World w;
    w.gripper = home_pose;
    for (std::size_t i = 0; i < n; ++i) {
      const PlacementRange& range = scenario.ranges[i];
      const double dx = range.dx > 0.0 ? rng.uniform(-range.dx, range.dx) : 0.0;
      const double dy = range.dy > 0.0 ? rng.uniform(-range.dy, range.dy) : 0.0;
      const double yaw =
          range.yaw > 0.0 ? rng.uniform(-range.yaw, range.yaw) : 0.0;

      SimObject obj;
      obj.object_id = g0.object_nodes[i].object_id;
      obj.canonical = g0.object_nodes[i].cloud;
      // Yaw about the object centroid keeps z intact, so whatever rests on
      // the table keeps resting; then offset in the plane.
      const Vec3 c = obj.canonical.centroid();
      const UnitQuaternion r = UnitQuaternion::from_axis_angle({0, 0, 1}, yaw);
      obj.pose.rotation = r;
      obj.pose.translation = c - r.rotate(c) + Vec3{dx, dy, 0.0};
      w.objects.push_back(std::move(obj));
    }

    bool clear = true;
    std::vector<PointCloud> clouds;
    clouds.reserve(n);
    for (const SimObject& obj : w.objects) clouds.push_back(obj.current_cloud());
    for (std::size_t i = 0; i < n && clear; ++i) {
      const detail::SpatialGrid grid(clouds[i].points, scenario.clearance);
      for (std::size_t k = i + 1; k < n && clear; ++k) {
        for (const Vec3& p : clouds[k].points) {
          if (grid.any_within(p, scenario.clearance)) {
            clear = false;
            break;
          }
        }
      }
    }
    if (clear) return w;
  }
  throw PlacementFailure("no clear layout found in " +
                         std::to_string(scenario.max_attempts) + " attempts");
}

World step(const World& w, const Pose& target, GripState grip_cmd,
           double grasp_eps) {
  World out = w;
  const Pose delta = compose(target, inverse(out.gripper));
  out.gripper = target;
  if (out.attached) {
    for (SimObject& obj : out.objects) {
      if (obj.object_id == *out.attached) {
        obj.pose = compose(delta, obj.pose);
      }
    }
  }

  if (grip_cmd == GripState::Closed && out.grip == GripState::Open) {
    out.grip = GripState::Closed;
    // Attach the nearest object within reach of the interaction point.
    double best = std::numeric_limits<double>::infinity();
    std::optional<int> best_id;
    for (const SimObject& obj : out.objects) {
      const PointCloud cloud = obj.current_cloud();
      const detail::SpatialGrid grid(cloud.points, grasp_eps);
      double sq = 0.0;
      if (grid.nearest_within(out.gripper.translation, grasp_eps, &sq) >= 0 &&
          sq < best) {
        best = sq;
        best_id = obj.object_id;
      }
    }
    out.attached = best_id;  // closes on air when nothing is in reach
  } else if (grip_cmd == GripState::Open && out.grip == GripState::Closed) {
    out.grip = GripState::Open;
    out.attached.reset();
  }
  return out;
}

HandObservation gripper_hand(const World& w, double open_halfwidth) {
  HandObservation hand;
  hand.grip = w.grip;
  if (w.grip == GripState::Closed) {
    hand.thumb_tip = w.gripper.translation;
    hand.index_tip = w.gripper.translation;
  } else {
    const Vec3 offset = w.gripper.rotation.rotate({open_halfwidth, 0.0, 0.0});
    hand.thumb_tip = w.gripper.translation + offset;
    hand.index_tip = w.gripper.translation - offset;
  }
  return hand;
}

ContactSet world_contacts(const World& w, double contact_thresh,
                          double open_halfwidth) {
  std::vector<ObjectNode> nodes;
  nodes.reserve(w.objects.size());
  for (const SimObject& obj : w.objects) {
    nodes.push_back({obj.object_id, obj.current_cloud()});
  }
  return compute_contacts(nodes, gripper_hand(w, open_halfwidth),
                          contact_thresh);
}

bool check_success(const World& w, const OOG& final_oog,
                   double contact_thresh) {
  return world_contacts(w, contact_thresh) == contact_set(final_oog);
}

namespace {

const SimObject* find_object(const World& w, int object_id) {
  for (const SimObject& obj : w.objects) {
    if (obj.object_id == object_id) return &obj;
  }
  return nullptr;
}

const PointCloud& node_cloud(const OOG& g, int object_id) {
  for (const ObjectNode& node : g.object_nodes) {
    if (node.object_id == object_id) return node.cloud;
  }
  throw Error("object " + std::to_string(object_id) + " not in OOG");
}

RolloutReport fail(RolloutReport report, FailureMode mode, std::string detail) {
  report.success = false;
  report.failure_mode = mode;
  report.detail = std::move(detail);
  return report;
}

}  // namespace

RolloutReport run_rollout(const ManipulationPlan& plan, const World& world,
                          const RolloutConfig& config) {
  const int total_segments = static_cast<int>(plan.oogs.size()) - 1;
  const int max_segments = config.max_segment_factor * total_segments;
  RolloutReport report;
  World w = world;
  bool ran_final_segment = false;

  while (true) {
    const ContactSet observed =
        world_contacts(w, config.contact_thresh, config.open_finger_halfwidth);
    const MatchResult match = match_oog(plan.oogs, observed);
    if (match.status == MatchStatus::AtFinal) {
      report.success = true;
      return report;
    }
    if (match.status == MatchStatus::NoMatch) {
      if (ran_final_segment) {
        return fail(std::move(report), FailureMode::UnsatisfiedContacts,
                    "final contact set not reached");
      }
      return fail(std::move(report), FailureMode::MissedTracking,
                  "observed contact set matches no plan keyframe");
    }
    if (report.segments_executed >= max_segments) {
      return fail(std::move(report), FailureMode::UnsatisfiedContacts,
                  "segment budget exhausted");
    }

    const int f = match.index;
    const OOG& g_f = plan.oogs[f];
    const OOG& g_next = plan.oogs[f + 1];
    const SegmentRoles& roles = plan.segments[f];
    if (!roles.target_object) {
      return fail(std::move(report), FailureMode::UnsatisfiedContacts,
                  "segment " + std::to_string(f) + " has no target object");
    }
    const int target = *roles.target_object;
    const SimObject* target_obj = find_object(w, target);
    if (!target_obj) {
      return fail(std::move(report), FailureMode::MissedTracking,
                  "target object missing from the world");
    }

    // Demo trajectories of the target over this segment.
    std::vector<KeypointTrajectory> demo_tracks;
    double max_displacement = 0.0;
    for (const PointNode& node : g_f.point_nodes) {
      if (node.object_id != target || node.trajectory.size() < 2) continue;
      KeypointTrajectory filled = fill_gaps(node.trajectory);
      max_displacement =
          std::max(max_displacement,
                   (filled.positions.back() - filled.positions.front()).norm());
      demo_tracks.push_back(std::move(filled));
    }
    const bool static_segment =
        demo_tracks.empty() || max_displacement < config.static_eps;

    const int n_action_steps = plan.keyframes[f + 1] - plan.keyframes[f];
    std::vector<Pose> poses;
    Pose x_start;
    double residual = 0.0;
    try {
      if (static_segment) {
        // Approach-and-grip segment: nothing to transport, but the
        // interaction point still needs the demo->world transform.
        x_start = global_register(node_cloud(g_f, target),
                                  target_obj->current_cloud(),
                                  config.registration)
                      .transform;
        poses.assign(n_action_steps, Pose::identity());
      } else {
        SegmentObservation obs;
        obs.target_cloud = target_obj->current_cloud();
        if (roles.reference_object) {
          const SimObject* ref_obj = find_object(w, *roles.reference_object);
          if (!ref_obj) {
            return fail(std::move(report), FailureMode::MissedTracking,
                        "reference object missing from the world");
          }
          obs.ref_cloud = ref_obj->current_cloud();
        }
        const SegmentPrediction prediction = predict_segment_trajectories(
            g_f, g_next, roles, obs, config.registration);
        x_start = prediction.x_start;
        const OptimizeResult opt =
            optimize_actions(prediction.trajectories, config.optimizer);
        poses = opt.poses;
        residual = opt.final_residual;
      }
    } catch (const RegistrationFailed& e) {
      return fail(std::move(report), FailureMode::MissedTracking,
                  std::string("registration failed: ") + e.what());
    }

    const ActionSequence seq =
        augment_with_grip(poses, g_f.hand_node, g_next.hand_node, x_start);

    if (!w.attached) {
      // Reset primitive between interactions, then reach the interaction
      // point. Skipped while holding an object.
      w = step(w, config.home_pose, w.grip, config.grasp_eps);
      w = step(w, Pose{UnitQuaternion::identity(), seq.interaction_point},
               w.grip, config.grasp_eps);
      report.steps_executed += 2;
    }

    for (std::size_t i = 0; i < seq.poses.size(); ++i) {
      const GripState before = w.grip;
      const Pose target_pose = compose(seq.poses[i], w.gripper);
      w = step(w, target_pose, seq.grip_commands[i], config.grasp_eps);
      ++report.steps_executed;
      if (before == GripState::Open &&
          seq.grip_commands[i] == GripState::Closed && !w.attached) {
        return fail(std::move(report), FailureMode::MissedGrasping,
                    "grasp command closed on air");
      }
    }
    ++report.segments_executed;
    report.segment_residuals.push_back(residual);
    if (f == total_segments - 1) ran_final_segment = true;
  }
}

std::vector<TrialRecord> run_rollout_batch(const ManipulationPlan& plan,
                                           const BatchConfig& config) {
  std::vector<TrialRecord> records(std::max(0, config.trials));
  const auto run_trial = [&](int trial) {
    TrialRecord& rec = records[trial];
    rec.trial = trial;
    rec.seed = Rng::derive(config.seed, static_cast<std::uint64_t>(trial));
    Scenario scenario;
    scenario.seed = rec.seed;
    scenario.ranges = config.ranges;
    scenario.clearance = config.clearance;
    const World w = spawn_scenario(plan, scenario, config.rollout.home_pose);
    rec.report = run_rollout(plan, w, config.rollout);
  };

  const int threads = std::max(1, config.threads);
  if (threads == 1 || config.trials <= 1) {
    for (int trial = 0; trial < config.trials; ++trial) run_trial(trial);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        while (true) {
          const int trial = next.fetch_add(1);
          if (trial >= config.trials) return;
          run_trial(trial);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }
  return records;
}

BatchSummary summarize(const std::vector<TrialRecord>& records) {
  BatchSummary s;
  s.trials = static_cast<int>(records.size());
  for (const TrialRecord& rec : records) {
    if (rec.report.success) {
      ++s.successes;
    } else if (rec.report.failure_mode) {
      switch (*rec.report.failure_mode) {
        case FailureMode::MissedTracking:
          ++s.missed_tracking;
          break;
        case FailureMode::MissedGrasping:
          ++s.missed_grasping;
          break;
        case FailureMode::UnsatisfiedContacts:
          ++s.unsatisfied_contacts;
          break;
      }
    }
  }
  s.success_rate =
      s.trials > 0 ? static_cast<double>(s.successes) / s.trials : 0.0;
  return s;
}

}  // namespace oog
