#include "oog/geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "oog/errors.hpp"
#include "oog/rng.hpp"

namespace oog {

// ============================================================================
// UnitQuaternion
// ============================================================================

UnitQuaternion::UnitQuaternion(double w, double x, double y, double z)
    : w_(w), x_(x), y_(y), z_(z) {
  canonicalize();
}

void UnitQuaternion::canonicalize() {
  const double n = std::sqrt(w_ * w_ + x_ * x_ + y_ * y_ + z_ * z_);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error("quaternion has zero or non-finite norm");
  }
  double s = 1.0 / n;
  if (w_ < 0.0) s = -s;  // double cover: fix w >= 0
  w_ *= s;
  x_ *= s;
  y_ *= s;
  z_ *= s;
}

UnitQuaternion UnitQuaternion::from_axis_angle(const Vec3& axis, double angle) {
  const Vec3 u = axis.normalized();
  const double h = 0.5 * angle;
  const double s = std::sin(h);
  return {std::cos(h), u.x * s, u.y * s, u.z * s};
}

UnitQuaternion UnitQuaternion::operator*(const UnitQuaternion& r) const {
  return {w_ * r.w_ - x_ * r.x_ - y_ * r.y_ - z_ * r.z_,
          w_ * r.x_ + x_ * r.w_ + y_ * r.z_ - z_ * r.y_,
          w_ * r.y_ - x_ * r.z_ + y_ * r.w_ + z_ * r.x_,
          w_ * r.z_ + x_ * r.y_ - y_ * r.x_ + z_ * r.w_};
}

Vec3 UnitQuaternion::rotate(const Vec3& v) const {
  // v + 2w (u x v) + 2 u x (u x v), u = (x, y, z)
  const Vec3 u{x_, y_, z_};
  const Vec3 uv = u.cross(v);
  const Vec3 uuv = u.cross(uv);
  return v + 2.0 * w_ * uv + 2.0 * uuv;
}

void UnitQuaternion::to_rotation_matrix(double m[9]) const {
  const double w = w_, x = x_, y = y_, z = z_;
  m[0] = 1 - 2 * (y * y + z * z);
  m[1] = 2 * (x * y - w * z);
  m[2] = 2 * (x * z + w * y);
  m[3] = 2 * (x * y + w * z);
  m[4] = 1 - 2 * (x * x + z * z);
  m[5] = 2 * (y * z - w * x);
  m[6] = 2 * (x * z - w * y);
  m[7] = 2 * (y * z + w * x);
  m[8] = 1 - 2 * (x * x + y * y);
}

UnitQuaternion UnitQuaternion::from_rotation_matrix(const double m[9]) {
  // Shepperd's method: pick the largest diagonal combination for stability.
  const double t = m[0] + m[4] + m[8];
  double w, x, y, z;
  if (t > 0.0) {
    double s = std::sqrt(t + 1.0) * 2.0;
    w = 0.25 * s;
    x = (m[7] - m[5]) / s;
    y = (m[2] - m[6]) / s;
    z = (m[3] - m[1]) / s;
  } else if (m[0] > m[4] && m[0] > m[8]) {
    double s = std::sqrt(1.0 + m[0] - m[4] - m[8]) * 2.0;
    w = (m[7] - m[5]) / s;
    x = 0.25 * s;
    y = (m[1] + m[3]) / s;
    z = (m[2] + m[6]) / s;
  } else if (m[4] > m[8]) {
    double s = std::sqrt(1.0 + m[4] - m[0] - m[8]) * 2.0;
    w = (m[2] - m[6]) / s;
    x = (m[1] + m[3]) / s;
    y = 0.25 * s;
    z = (m[5] + m[7]) / s;
  } else {
    double s = std::sqrt(1.0 + m[8] - m[0] - m[4]) * 2.0;
    w = (m[3] - m[1]) / s;
    x = (m[2] + m[6]) / s;
    y = (m[5] + m[7]) / s;
    z = 0.25 * s;
  }
  return {w, x, y, z};
}

double UnitQuaternion::angle_to(const UnitQuaternion& o) const {
  const double d =
      std::abs(w_ * o.w_ + x_ * o.x_ + y_ * o.y_ + z_ * o.z_);
  return 2.0 * std::acos(std::min(1.0, d));
}

// ============================================================================
// Pose
// ============================================================================

Vec3 apply(const Pose& p, const Vec3& v) {
  return p.rotation.rotate(v) + p.translation;
}

Pose compose(const Pose& p, const Pose& q) {
  Pose out;
  out.rotation = p.rotation * q.rotation;
  out.translation = p.rotation.rotate(q.translation) + p.translation;
  return out;
}

Pose inverse(const Pose& p) {
  Pose out;
  out.rotation = p.rotation.conjugate();
  out.translation = -out.rotation.rotate(p.translation);
  return out;
}

Vec3 PointCloud::centroid() const {
  Vec3 c;
  for (const Vec3& v : points) c += v;
  return points.empty() ? c : c / static_cast<double>(points.size());
}

PointCloud apply(const Pose& p, const PointCloud& cloud) {
  PointCloud out;
  out.points.reserve(cloud.points.size());
  for (const Vec3& v : cloud.points) out.points.push_back(apply(p, v));
  out.colors = cloud.colors;
  return out;
}

// ============================================================================
// Plane estimation
// ============================================================================

namespace {

void apply_sign_convention(PlaneModel& pl) {
  bool flip = false;
  if (pl.c < 0.0) {
    flip = true;
  } else if (pl.c == 0.0) {
    if (pl.b < 0.0) {
      flip = true;
    } else if (pl.b == 0.0 && pl.a < 0.0) {
      flip = true;
    }
  }
  if (flip) {
    pl.a = -pl.a;
    pl.b = -pl.b;
    pl.c = -pl.c;
    pl.d = -pl.d;
  }
}

/// Orthogonal least-squares plane through a point subset: centroid plus the
/// smallest-eigenvalue direction of the scatter matrix.
PlaneModel fit_plane_lsq(const PointCloud& cloud, const std::vector<int>& idx) {
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (int i : idx) {
    c += Eigen::Vector3d(cloud.points[i].x, cloud.points[i].y, cloud.points[i].z);
  }
  c /= static_cast<double>(idx.size());
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (int i : idx) {
    const Eigen::Vector3d p(cloud.points[i].x, cloud.points[i].y,
                            cloud.points[i].z);
    const Eigen::Vector3d q = p - c;
    scatter += q * q.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(scatter);
  const Eigen::Vector3d n = es.eigenvectors().col(0).normalized();
  PlaneModel pl;
  pl.a = n.x();
  pl.b = n.y();
  pl.c = n.z();
  pl.d = n.dot(c);
  apply_sign_convention(pl);
  return pl;
}

bool cloud_is_collinear(const PointCloud& cloud) {
  std::vector<int> all(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) all[i] = static_cast<int>(i);
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (const Vec3& p : cloud.points) c += Eigen::Vector3d(p.x, p.y, p.z);
  c /= static_cast<double>(cloud.size());
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  double scale = 0.0;
  for (const Vec3& v : cloud.points) {
    const Eigen::Vector3d q = Eigen::Vector3d(v.x, v.y, v.z) - c;
    scatter += q * q.transpose();
    scale = std::max(scale, q.squaredNorm());
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(scatter);
  // Collinear: only the largest eigenvalue is non-negligible.
  return es.eigenvalues()(1) <= 1e-18 + 1e-12 * scale;
}

}  // namespace

PlaneFitResult fit_plane_ransac(const PointCloud& cloud, double dist_thresh,
                                int iterations, std::uint64_t seed) {
  const int n = static_cast<int>(cloud.size());
  if (n < 3) throw TooFewPoints("plane fit needs at least 3 points");
  if (cloud_is_collinear(cloud)) {
    throw DegenerateCloud("all points are collinear");
  }

  Rng rng(Rng::derive(seed, 0));
  int best_count = -1;
  Vec3 best_n;
  double best_d = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const int i0 = rng.uniform_int(n);
    const int i1 = rng.uniform_int(n);
    const int i2 = rng.uniform_int(n);
    if (i0 == i1 || i0 == i2 || i1 == i2) continue;
    const Vec3& p0 = cloud.points[i0];
    const Vec3 e1 = cloud.points[i1] - p0;
    const Vec3 e2 = cloud.points[i2] - p0;
    Vec3 nrm = e1.cross(e2);
    const double len = nrm.norm();
    if (len < 1e-12) continue;  // collinear sample
    nrm = nrm / len;
    const double d = nrm.dot(p0);
    int count = 0;
    for (const Vec3& p : cloud.points) {
      if (std::abs(nrm.dot(p) - d) <= dist_thresh) ++count;
    }
    if (count > best_count) {
      best_count = count;
      best_n = nrm;
      best_d = d;
    }
  }
  if (best_count < 3) {
    throw DegenerateCloud("no valid plane hypothesis found");
  }

  std::vector<int> inliers;
  for (int i = 0; i < n; ++i) {
    if (std::abs(best_n.dot(cloud.points[i]) - best_d) <= dist_thresh) {
      inliers.push_back(i);
    }
  }

  PlaneFitResult result;
  result.model = fit_plane_lsq(cloud, inliers);
  result.inliers.clear();
  for (int i = 0; i < n; ++i) {
    if (std::abs(result.model.signed_distance(cloud.points[i])) <= dist_thresh) {
      result.inliers.push_back(i);
    }
  }
  return result;
}

Pose plane_alignment_transform(const PlaneModel& plane) {
  const Vec3 n = plane.normal().normalized();
  const Vec3 zaxis{0.0, 0.0, 1.0};
  UnitQuaternion rot;
  const double c = n.dot(zaxis);
  if (c > 1.0 - 1e-15) {
    rot = UnitQuaternion::identity();
  } else if (c < -1.0 + 1e-15) {
    rot = UnitQuaternion::from_axis_angle({1.0, 0.0, 0.0}, M_PI);
  } else {
    const Vec3 axis = n.cross(zaxis);
    rot = UnitQuaternion::from_axis_angle(axis, std::acos(std::clamp(c, -1.0, 1.0)));
  }
  Pose out;
  out.rotation = rot;
  out.translation = {0.0, 0.0, -plane.d};
  return out;
}

}  // namespace oog
