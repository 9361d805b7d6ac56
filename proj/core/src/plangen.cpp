#include "oog/plangen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "oog/errors.hpp"

namespace oog {

// ============================================================================
// Velocity statistics
// ============================================================================

VelocityStats keypoint_velocity_series(const Recording& rec) {
  if (rec.frames.size() < 2) throw Error("need at least 2 frames");
  const std::size_t steps = rec.frames.size() - 1;

  VelocityStats stats;
  stats.overall.assign(steps, 0.0);
  std::set<int> object_ids;
  for (const KeypointTrack& track : rec.keypoint_tracks) {
    object_ids.insert(track.object_id);
  }
  for (int id : object_ids) stats.per_object[id].assign(steps, 0.0);

  bool any_step_visible = false;
  std::map<int, double> prev_per_object;
  double prev_overall = 0.0;
  for (int id : object_ids) prev_per_object[id] = 0.0;

  for (std::size_t t = 0; t < steps; ++t) {
    double sum = 0.0;
    int count = 0;
    std::map<int, std::pair<double, int>> obj_acc;
    for (const KeypointTrack& track : rec.keypoint_tracks) {
      const KeypointTrajectory& traj = track.trajectory;
      if (!traj.visible(t) || !traj.visible(t + 1)) continue;
      const double speed =
          (traj.positions[t + 1] - traj.positions[t]).norm() * rec.fps;
      sum += speed;
      ++count;
      auto& acc = obj_acc[track.object_id];
      acc.first += speed;
      acc.second += 1;
    }
    if (count > 0) {
      any_step_visible = true;
      prev_overall = sum / count;
    }
    stats.overall[t] = prev_overall;
    for (int id : object_ids) {
      const auto it = obj_acc.find(id);
      if (it != obj_acc.end() && it->second.second > 0) {
        prev_per_object[id] = it->second.first / it->second.second;
      }
      stats.per_object[id][t] = prev_per_object[id];
    }
  }
  if (!any_step_visible) {
    throw NoVisibleKeypoints("no step has a visible keypoint pair");
  }
  return stats;
}

std::vector<double> smooth_series(const std::vector<double>& series,
                                  int window) {
  if (window < 1 || window % 2 == 0) {
    throw Error("smoothing window must be odd and >= 1");
  }
  if (window == 1) return series;
  const int n = static_cast<int>(series.size());
  const int half = window / 2;
  std::vector<double> out(series.size());
  for (int i = 0; i < n; ++i) {
    const int lo = std::max(0, i - half);
    const int hi = std::min(n - 1, i + half);
    double sum = 0.0;
    for (int j = lo; j <= hi; ++j) sum += series[j];
    out[i] = sum / (hi - lo + 1);
  }
  return out;
}

// ============================================================================
// Changepoint detection
// ============================================================================

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double auto_bandwidth(const std::vector<double>& x) {
  std::vector<double> dists;
  dists.reserve(x.size() * (x.size() - 1) / 2);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      dists.push_back(std::abs(x[i] - x[j]));
    }
  }
  double bw = median_of(dists);
  if (bw <= 0.0) {
    // Degenerate median (over half the pairs identical): fall back to the
    // mean nonzero distance, then to 1 for a fully constant series.
    double sum = 0.0;
    int count = 0;
    for (double d : dists) {
      if (d > 0.0) {
        sum += d;
        ++count;
      }
    }
    bw = count > 0 ? sum / count : 1.0;
  }
  return bw;
}

}  // namespace

std::vector<int> detect_keyframes(const std::vector<double>& series,
                                  const ChangepointParams& params) {
  const int T = static_cast<int>(series.size());
  const int min_seg = std::max(1, params.min_segment);
  if (T < 2 * min_seg) {
    throw SeriesTooShort("series length " + std::to_string(T) +
                         " < 2 * min_segment");
  }
  const double bw =
      params.bandwidth > 0.0 ? params.bandwidth : auto_bandwidth(series);
  const double gamma = 1.0 / (2.0 * bw * bw);
  double penalty = params.penalty;
  if (penalty <= 0.0) {
    // 3 log(T) median(series)^2; a majority-static series has median 0,
    // which would disable the penalty entirely, so fall back to the mean.
    double scale = median_of(series);
    if (scale <= 0.0) {
      for (double v : series) scale += v;
      scale /= static_cast<double>(T);
    }
    penalty = 3.0 * std::log(static_cast<double>(T)) * scale * scale;
  }

  const auto kernel = [&](double a, double b) {
    const double d = a - b;
    return std::exp(-gamma * d * d);
  };

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> best(T + 1, inf);
  std::vector<int> nseg(T + 1, 0);
  std::vector<int> prev(T + 1, -1);
  best[0] = 0.0;

  // K[s] = sum_{s <= i, j < t} k(x_i, x_j), maintained incrementally as t
  // grows; col[s] = sum_{i = s}^{t-2} k(x_i, x_{t-1}) per new element.
  std::vector<double> K(T + 1, 0.0);
  std::vector<double> col(T + 1, 0.0);

  for (int t = 1; t <= T; ++t) {
    col[t - 1] = 0.0;
    for (int s = t - 2; s >= 0; --s) {
      col[s] = col[s + 1] + kernel(series[s], series[t - 1]);
    }
    for (int s = 0; s < t; ++s) {
      K[s] += 2.0 * col[s] + 1.0;  // k(x,x) = 1 for the RBF kernel
    }
    for (int s = 0; s <= t - min_seg; ++s) {
      if (s != 0 && s < min_seg) continue;
      if (best[s] == inf) continue;
      const int len = t - s;
      const double cost = static_cast<double>(len) - K[s] / len;
      const double total = best[s] + cost + (s > 0 ? penalty : 0.0);
      const double tol = 1e-9 * (1.0 + std::abs(total));
      const int segs = nseg[s] + 1;
      if (total < best[t] - tol ||
          (total <= best[t] + tol && segs < nseg[t])) {
        best[t] = total;
        nseg[t] = segs;
        prev[t] = s;
      }
    }
  }

  std::vector<int> splits;
  for (int t = T; prev[t] > 0; t = prev[t]) splits.push_back(prev[t]);
  std::reverse(splits.begin(), splits.end());
  return splits;
}

// ============================================================================
// Plan generation
// ============================================================================

namespace {

OOG build_oog(const Recording& rec, int frame, int next_frame,
              double contact_thresh) {
  const Frame& fr = rec.frames[frame];
  OOG g;
  g.keyframe_index = frame;
  g.fps = rec.fps;
  g.hand_node = fr.hand;

  g.object_nodes.resize(rec.object_count());
  for (const ObjectObservation& obs : fr.objects) {
    g.object_nodes[obs.object_id] = ObjectNode{obs.object_id, obs.cloud};
  }

  for (const KeypointTrack& track : rec.keypoint_tracks) {
    PointNode node;
    node.object_id = track.object_id;
    if (next_frame > frame) {
      node.trajectory = slice(track.trajectory, frame, next_frame);
    }
    g.point_nodes.push_back(std::move(node));
  }

  const ContactSet contacts =
      compute_contacts(g.object_nodes, g.hand_node, contact_thresh);
  const int n = static_cast<int>(rec.object_count());
  for (int i = 0; i < n; ++i) {
    for (int k = i + 1; k < n; ++k) {
      g.object_object_edges.push_back(
          {i, k, contacts.contains(ContactPair::objects(i, k))});
    }
    g.object_hand_edges.push_back(
        {i, contacts.contains(ContactPair::hand(i))});
  }
  return g;
}

/// Objects participating in edges whose contact flag differs; hand-edge
/// objects listed first, each group ascending.
std::vector<int> changed_edge_objects(const ContactSet& a, const ContactSet& b) {
  std::set<int> hand_objs, pair_objs;
  ContactSet sym;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(),
                                std::inserter(sym, sym.begin()));
  for (const ContactPair& p : sym) {
    if (p.is_hand()) {
      hand_objs.insert(p.a);
    } else {
      pair_objs.insert(p.a);
      pair_objs.insert(p.b);
    }
  }
  std::vector<int> out(hand_objs.begin(), hand_objs.end());
  for (int id : pair_objs) {
    if (!hand_objs.contains(id)) out.push_back(id);
  }
  return out;
}

}  // namespace

std::map<int, double> mean_keypoint_speeds(const OOG& g) {
  std::map<int, std::pair<double, int>> acc;
  for (const PointNode& node : g.point_nodes) {
    acc.try_emplace(node.object_id, 0.0, 0);
    const KeypointTrajectory& traj = node.trajectory;
    if (traj.size() < 2) continue;
    for (std::size_t t = 0; t + 1 < traj.size(); ++t) {
      if (!traj.visible(t) || !traj.visible(t + 1)) continue;
      auto& a = acc[node.object_id];
      a.first += (traj.positions[t + 1] - traj.positions[t]).norm() * g.fps;
      a.second += 1;
    }
  }
  std::map<int, double> out;
  for (const auto& [id, a] : acc) {
    out[id] = a.second > 0 ? a.first / a.second : 0.0;
  }
  return out;
}

int select_target_object(const OOG& g, double motion_floor) {
  const std::map<int, double> speeds = mean_keypoint_speeds(g);
  int best_id = -1;
  double best_speed = -1.0;
  for (const auto& [id, speed] : speeds) {
    if (speed > best_speed) {
      best_speed = speed;
      best_id = id;
    }
  }
  if (best_id < 0 || best_speed < motion_floor) {
    throw NoMotion("no object moves faster than the motion floor");
  }
  return best_id;
}

std::optional<int> select_reference_object(const OOG& g_f, const OOG& g_next,
                                           int target,
                                           std::vector<std::string>* warnings) {
  const ContactSet a = contact_set(g_f);
  const ContactSet b = contact_set(g_next);
  ContactSet sym;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(),
                                std::inserter(sym, sym.begin()));
  std::set<int> candidates;
  for (const ContactPair& p : sym) {
    if (p.is_hand() || !p.involves(target)) continue;
    candidates.insert(p.a == target ? p.b : p.a);
  }
  if (candidates.empty()) return std::nullopt;
  if (candidates.size() > 1 && warnings) {
    warnings->push_back(
        "ambiguous reference object for target " + std::to_string(target) +
        ": choosing smallest id " + std::to_string(*candidates.begin()));
  }
  return *candidates.begin();
}

PlanResult generate_plan(const Recording& rec, const PlanConfig& config) {
  validate(rec);
  PlanResult result;
  PlanDiagnostics& diag = result.diagnostics;

  const VelocityStats stats = keypoint_velocity_series(rec);
  diag.velocity_series = stats.overall;
  diag.velocity_series_smoothed =
      smooth_series(stats.overall, config.smoothing_window);

  const int last_frame = static_cast<int>(rec.frame_count()) - 1;
  std::vector<int> splits;
  const int min_seg = std::max(1, config.changepoint.min_segment);
  if (static_cast<int>(diag.velocity_series_smoothed.size()) >= 2 * min_seg) {
    splits =
        detect_keyframes(diag.velocity_series_smoothed, config.changepoint);
  } else {
    diag.warnings.push_back("series too short for changepoint detection");
  }
  diag.changepoints = splits;

  std::set<int> kf_set{0, last_frame};
  for (int s : splits) {
    if (s > 0 && s < last_frame) kf_set.insert(s);
  }
  std::vector<int> keyframes(kf_set.begin(), kf_set.end());

  // Contact sets per candidate keyframe, then the merge pass.
  std::vector<ContactSet> sets;
  sets.reserve(keyframes.size());
  for (int kf : keyframes) {
    std::vector<PointCloud> clouds(rec.object_count());
    for (const ObjectObservation& obs : rec.frames[kf].objects) {
      clouds[obs.object_id] = obs.cloud;
    }
    sets.push_back(
        compute_contacts(clouds, rec.frames[kf].hand, config.contact_thresh));
  }
  for (std::size_t i = 0; i + 1 < keyframes.size();) {
    if (sets[i] != sets[i + 1]) {
      ++i;
      continue;
    }
    if (keyframes.size() == 2) {
      diag.warnings.push_back(
          "degenerate plan: first and last keyframe share a contact set");
      break;
    }
    // Drop the later keyframe, unless it is the structurally required final
    // frame, in which case the redundant predecessor goes.
    const std::size_t drop = (i + 2 == keyframes.size()) ? i : i + 1;
    diag.merged_keyframes.push_back(keyframes[drop]);
    keyframes.erase(keyframes.begin() + drop);
    sets.erase(sets.begin() + drop);
    if (drop == i && i > 0) --i;
  }

  ManipulationPlan& plan = result.plan;
  plan.fps = rec.fps;
  plan.frame_count = static_cast<int>(rec.frame_count());
  plan.object_names = rec.object_names;
  plan.keyframes = keyframes;
  for (std::size_t f = 0; f < keyframes.size(); ++f) {
    const int next =
        f + 1 < keyframes.size() ? keyframes[f + 1] : keyframes[f];
    plan.oogs.push_back(
        build_oog(rec, keyframes[f], next, config.contact_thresh));
  }

  for (std::size_t f = 0; f + 1 < plan.oogs.size(); ++f) {
    SegmentRoles roles;
    try {
      roles.target_object =
          select_target_object(plan.oogs[f], config.motion_floor);
    } catch (const NoMotion&) {
      // Motionless segment (grasp/release): fall back to the objects whose
      // contact relations change across the segment.
      const std::vector<int> changed =
          changed_edge_objects(contact_set(plan.oogs[f]),
                               contact_set(plan.oogs[f + 1]));
      if (!changed.empty()) {
        roles.target_object = changed.front();
      } else {
        diag.warnings.push_back("segment " + std::to_string(f) +
                                ": no motion and no contact change");
      }
    }
    if (roles.target_object) {
      roles.reference_object = select_reference_object(
          plan.oogs[f], plan.oogs[f + 1], *roles.target_object,
          &diag.warnings);
    }
    plan.segments.push_back(roles);
  }

  validate(plan);
  return result;
}

void validate(const ManipulationPlan& plan) {
  if (plan.oogs.size() < 2) {
    throw SchemaError("plan needs at least 2 OOGs", "oogs");
  }
  if (plan.keyframes.size() != plan.oogs.size()) {
    throw SchemaError("keyframes and oogs must have equal length",
                      "keyframes");
  }
  if (plan.segments.size() != plan.oogs.size() - 1) {
    throw SchemaError("segments must have one entry per OOG pair",
                      "segments");
  }
  if (plan.keyframes.front() != 0) {
    throw SchemaError("first keyframe must be frame 0", "keyframes[0]");
  }
  if (plan.keyframes.back() != plan.frame_count - 1) {
    throw SchemaError("last keyframe must be the final frame", "keyframes");
  }
  const int n_obj = static_cast<int>(plan.object_names.size());
  for (std::size_t f = 0; f < plan.oogs.size(); ++f) {
    const OOG& g = plan.oogs[f];
    const std::string base = "oogs[" + std::to_string(f) + "]";
    if (f > 0 && plan.keyframes[f] <= plan.keyframes[f - 1]) {
      throw SchemaError("keyframes must be strictly increasing", "keyframes");
    }
    if (g.keyframe_index != plan.keyframes[f]) {
      throw SchemaError("OOG keyframe_index disagrees with plan keyframes",
                        base + ".keyframe_index");
    }
    if (static_cast<int>(g.object_nodes.size()) != n_obj) {
      throw SchemaError("OOG must have one node per object",
                        base + ".object_nodes");
    }
    const std::size_t want_edges =
        static_cast<std::size_t>(n_obj) * (n_obj - 1) / 2;
    if (g.object_object_edges.size() != want_edges ||
        g.object_hand_edges.size() != static_cast<std::size_t>(n_obj)) {
      throw SchemaError("OOG must be fully connected", base + ".edges");
    }
    const bool final_oog = (f + 1 == plan.oogs.size());
    const std::size_t seg_len =
        final_oog ? 0
                  : static_cast<std::size_t>(plan.keyframes[f + 1] -
                                             plan.keyframes[f]) +
                        1;
    for (std::size_t p = 0; p < g.point_nodes.size(); ++p) {
      const PointNode& node = g.point_nodes[p];
      if (node.object_id < 0 || node.object_id >= n_obj) {
        throw SchemaError("point node object_id out of range",
                          base + ".point_nodes[" + std::to_string(p) + "]");
      }
      if (node.trajectory.size() != seg_len) {
        throw SchemaError("point node trajectory must span its segment",
                          base + ".point_nodes[" + std::to_string(p) + "]");
      }
    }
    if (f + 1 < plan.oogs.size() && plan.oogs.size() > 2 &&
        contact_set(g) == contact_set(plan.oogs[f + 1])) {
      throw SchemaError("consecutive OOGs must differ in contact set", base);
    }
  }
}

}  // namespace oog
