#include "oog/se3opt.hpp"

#include <algorithm>
#include <cmath>

#include "oog/errors.hpp"
#include "oog/rng.hpp"

namespace oog {

namespace {

Vec3 rotate_raw(const std::array<double, 4>& q, const Vec3& v) {
  const double n = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] +
                             q[3] * q[3]);
  const double w = q[0] / n;
  const Vec3 a{q[1] / n, q[2] / n, q[3] / n};
  const Vec3 av = a.cross(v);
  return v + 2.0 * w * av + 2.0 * a.cross(av);
}

}  // namespace

double TransportObjective::value(const std::array<double, 4>& q,
                                 const Vec3& t) const {
  double j = 0.0;
  for (std::size_t i = 0; i < from.size(); ++i) {
    j += (rotate_raw(q, from[i]) + t - to[i]).squared_norm();
  }
  return j;
}

void TransportObjective::gradient(const std::array<double, 4>& q, const Vec3& t,
                                  std::array<double, 4>& grad_q,
                                  Vec3& grad_t) const {
  const double n = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] +
                             q[3] * q[3]);
  const std::array<double, 4> u{q[0] / n, q[1] / n, q[2] / n, q[3] / n};
  const double w = u[0];
  const Vec3 a{u[1], u[2], u[3]};

  // Gradient wrt the unit quaternion (w, a):
  //   d(Rv)/dw . r = 2 (a x v) . r
  //   dJ/da = sum 4 [ w (v x r) + (a.v) r + (a.r) v - 2 (v.r) a ]
  double gw = 0.0;
  Vec3 ga;
  grad_t = Vec3{};
  for (std::size_t i = 0; i < from.size(); ++i) {
    const Vec3& v = from[i];
    const Vec3 av = a.cross(v);
    const Vec3 rv = v + 2.0 * w * av + 2.0 * a.cross(av);
    const Vec3 r = rv + t - to[i];
    grad_t += 2.0 * r;
    gw += 4.0 * r.dot(av);
    ga += 4.0 * (w * v.cross(r) + a.dot(v) * r + a.dot(r) * v -
                 2.0 * v.dot(r) * a);
  }

  // Chain through normalization: dJ/dq = (I - u u^T) / |q| * dJ/du.
  const std::array<double, 4> gu{gw, ga.x, ga.y, ga.z};
  const double udotg =
      u[0] * gu[0] + u[1] * gu[1] + u[2] * gu[2] + u[3] * gu[3];
  for (int k = 0; k < 4; ++k) {
    grad_q[k] = (gu[k] - u[k] * udotg) / n;
  }
}

namespace {

struct StepData {
  std::vector<Vec3> from;
  std::vector<Vec3> to;
  Vec3 from_centroid;
  Vec3 to_centroid;
};

Vec3 closed_form_translation(const StepData& d, const std::array<double, 4>& q) {
  return d.to_centroid - rotate_raw(q, d.from_centroid);
}

void normalize_q(std::array<double, 4>& q) {
  const double n =
      std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  for (double& v : q) v /= n;
}

bool finite(const std::array<double, 4>& g, const Vec3& t) {
  return std::isfinite(g[0]) && std::isfinite(g[1]) && std::isfinite(g[2]) &&
         std::isfinite(g[3]) && t.finite();
}

/// Projected gradient descent with backtracking (shrink 0.5, Armijo 1e-4,
/// regrow 2x after acceptance). rotation_only holds the translation at the
/// closed form of the current rotation. Returns the final objective.
double descend(const TransportObjective& obj, const StepData& data,
               std::array<double, 4>& q, Vec3& t, int steps, bool rotation_only,
               double initial_step) {
  // Centered residuals eliminate the translation from the rotation stage.
  TransportObjective centered;
  if (rotation_only) {
    centered.from.reserve(data.from.size());
    centered.to.reserve(data.to.size());
    for (std::size_t i = 0; i < data.from.size(); ++i) {
      centered.from.push_back(data.from[i] - data.from_centroid);
      centered.to.push_back(data.to[i] - data.to_centroid);
    }
  }

  double alpha = initial_step;
  double j = obj.value(q, rotation_only ? closed_form_translation(data, q) : t);
  for (int it = 0; it < steps; ++it) {
    std::array<double, 4> gq;
    Vec3 gt;
    if (rotation_only) {
      Vec3 unused;
      centered.gradient(q, Vec3{}, gq, unused);
      gt = Vec3{};
    } else {
      obj.gradient(q, t, gq, gt);
    }
    if (!finite(gq, gt)) {
      throw NonFiniteGradient("gradient left the finite range");
    }
    const double gnorm2 = gq[0] * gq[0] + gq[1] * gq[1] + gq[2] * gq[2] +
                          gq[3] * gq[3] + gt.squared_norm();
    if (gnorm2 < 1e-24) break;

    bool accepted = false;
    for (int back = 0; back < 40; ++back) {
      std::array<double, 4> q_new{q[0] - alpha * gq[0], q[1] - alpha * gq[1],
                                  q[2] - alpha * gq[2], q[3] - alpha * gq[3]};
      normalize_q(q_new);  // keep the variable a unit quaternion
      Vec3 t_new = rotation_only ? closed_form_translation(data, q_new)
                                 : t - alpha * gt;
      const double j_new = obj.value(q_new, t_new);
      if (j_new <= j - 1e-4 * alpha * gnorm2) {
        q = q_new;
        t = t_new;
        j = j_new;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;  // no descent direction at float resolution
    alpha = std::min(alpha * 2.0, 1.0);
  }
  return j;
}

}  // namespace

OptimizeResult optimize_actions(const std::vector<KeypointTrajectory>& tracks,
                                const OptimizerConfig& config) {
  if (tracks.empty()) throw Error("optimize_actions needs at least one track");
  const std::size_t len = tracks.front().size();
  if (len < 2) throw Error("tracks need at least 2 samples");
  for (const KeypointTrajectory& track : tracks) {
    if (track.size() != len) throw Error("tracks must have equal length");
  }
  if (config.rot_stage_steps < 0 || config.joint_stage_steps < 0 ||
      config.rot_stage_steps + config.joint_stage_steps <= 0) {
    throw Error("optimizer needs a positive step budget");
  }

  std::vector<KeypointTrajectory> filled;
  filled.reserve(tracks.size());
  for (const KeypointTrajectory& track : tracks) filled.push_back(fill_gaps(track));

  const std::size_t n_steps = len - 1;
  OptimizeResult result;
  result.poses.reserve(n_steps);
  double total = 0.0;

  for (std::size_t i = 0; i < n_steps; ++i) {
    StepData data;
    for (const KeypointTrajectory& track : filled) {
      data.from.push_back(track.positions[i]);
      data.to.push_back(track.positions[i + 1]);
      data.from_centroid += track.positions[i];
      data.to_centroid += track.positions[i + 1];
    }
    data.from_centroid = data.from_centroid / static_cast<double>(filled.size());
    data.to_centroid = data.to_centroid / static_cast<double>(filled.size());

    TransportObjective obj{data.from, data.to};

    Rng rng(Rng::derive(config.seed, i));
    std::array<double, 4> q{rng.normal(), rng.normal(), rng.normal(),
                            rng.normal()};
    normalize_q(q);
    Vec3 t{0.01 * rng.normal(), 0.01 * rng.normal(), 0.01 * rng.normal()};

    if (config.rot_stage_steps > 0) {
      descend(obj, data, q, t, config.rot_stage_steps, /*rotation_only=*/true,
              config.step_size);
      t = closed_form_translation(data, q);
    }
    const double j =
        descend(obj, data, q, t, config.joint_stage_steps,
                /*rotation_only=*/false, config.step_size);
    total += j;
    result.poses.push_back(
        Pose{UnitQuaternion(q[0], q[1], q[2], q[3]), t});
  }

  result.final_residual = total;
  result.converged =
      total <= config.tolerance * static_cast<double>(n_steps) *
                   static_cast<double>(tracks.size());
  return result;
}

ActionSequence augment_with_grip(const std::vector<Pose>& actions,
                                 const HandObservation& hand_at_f,
                                 const HandObservation& hand_at_f1,
                                 const Pose& x_start) {
  if (actions.empty()) throw Error("augment_with_grip on empty action list");
  ActionSequence out;
  out.poses = actions;
  out.grip_commands.assign(actions.size(), hand_at_f.grip);
  out.grip_commands.back() = hand_at_f1.grip;

  const bool grasping = hand_at_f.grip == GripState::Open &&
                        hand_at_f1.grip == GripState::Closed;
  const Vec3 midpoint =
      grasping ? hand_at_f1.midpoint() : hand_at_f.midpoint();
  out.interaction_point = apply(x_start, midpoint);
  return out;
}

std::vector<Pose> absolute_poses(const std::vector<Pose>& transports,
                                 const Pose& start) {
  std::vector<Pose> out;
  out.reserve(transports.size() + 1);
  out.push_back(start);
  for (const Pose& x : transports) {
    out.push_back(compose(x, out.back()));
  }
  return out;
}

}  // namespace oog
