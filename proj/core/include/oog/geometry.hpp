#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

namespace oog {

// ============================================================================
// Basic rigid-geometry value types. All lengths are meters.
// ============================================================================

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3() = default;
  Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double squared_norm() const { return dot(*this); }
  double norm() const { return std::sqrt(squared_norm()); }
  Vec3 normalized() const { return *this / norm(); }
  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;
};

/// Rotation as a unit quaternion. Always normalized and canonicalized to
/// w >= 0 on construction, so equal rotations compare equal and norm drift
/// stays bounded over arbitrarily long composition chains.
class UnitQuaternion {
 public:
  UnitQuaternion() = default;  // identity
  UnitQuaternion(double w, double x, double y, double z);

  static UnitQuaternion identity() { return {}; }
  static UnitQuaternion from_axis_angle(const Vec3& axis, double angle);
  /// From a row-major 3x3 rotation matrix.
  static UnitQuaternion from_rotation_matrix(const double m[9]);

  double w() const { return w_; }
  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }

  UnitQuaternion conjugate() const { return make_raw(w_, -x_, -y_, -z_); }

  /// Hamilton product, renormalized.
  UnitQuaternion operator*(const UnitQuaternion& r) const;

  Vec3 rotate(const Vec3& v) const;

  /// Row-major 3x3 rotation matrix.
  void to_rotation_matrix(double m[9]) const;

  /// Angle of the relative rotation between two orientations, in [0, pi].
  double angle_to(const UnitQuaternion& o) const;

  /// Rotation angle of this quaternion, in [0, pi].
  double angle() const { return 2.0 * std::acos(std::min(1.0, std::abs(w_))); }

  double norm() const {
    return std::sqrt(w_ * w_ + x_ * x_ + y_ * y_ + z_ * z_);
  }

 private:
  static UnitQuaternion make_raw(double w, double x, double y, double z) {
    UnitQuaternion q;
    q.w_ = w;
    q.x_ = x;
    q.y_ = y;
    q.z_ = z;
    q.canonicalize();
    return q;
  }
  void canonicalize();

  double w_ = 1.0;
  double x_ = 0.0;
  double y_ = 0.0;
  double z_ = 0.0;
};

/// Rigid SE(3) transform: rotation followed by translation.
struct Pose {
  UnitQuaternion rotation;
  Vec3 translation;

  static Pose identity() { return {}; }
};

/// apply(p, v) = R v + t.
Vec3 apply(const Pose& p, const Vec3& v);

/// compose(p, q).apply(v) == p.apply(q.apply(v)).
Pose compose(const Pose& p, const Pose& q);

Pose inverse(const Pose& p);

// ============================================================================
// Point clouds and planes
// ============================================================================

struct PointCloud {
  std::vector<Vec3> points;
  std::optional<std::vector<Rgb>> colors;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  Vec3 centroid() const;
};

PointCloud apply(const Pose& p, const PointCloud& cloud);

/// Plane a*x + b*y + c*z = d with unit normal (a, b, c).
/// Sign convention: c >= 0, ties broken by b >= 0 then a >= 0.
struct PlaneModel {
  double a = 0.0;
  double b = 0.0;
  double c = 1.0;
  double d = 0.0;

  Vec3 normal() const { return {a, b, c}; }
  double signed_distance(const Vec3& v) const {
    return a * v.x + b * v.y + c * v.z - d;
  }
};

struct PlaneFitResult {
  PlaneModel model;
  std::vector<int> inliers;  // indices into the input cloud
};

/// RANSAC plane fit: 3-point hypotheses scored by inlier count, best
/// hypothesis refit by orthogonal least squares on its inliers, inliers
/// recomputed against the refit model. Deterministic for a fixed seed.
PlaneFitResult fit_plane_ransac(const PointCloud& cloud, double dist_thresh,
                                int iterations, std::uint64_t seed);

/// Rigid transform that maps the plane onto z = 0 with its normal sent to
/// (0, 0, 1) by the minimal-angle rotation. An exactly antiparallel normal
/// uses a 180-degree rotation about the x-axis.
Pose plane_alignment_transform(const PlaneModel& plane);

}  // namespace oog
