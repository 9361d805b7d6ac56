#pragma once

#include <oog/geometry.hpp>
#include <vector>

namespace oog::testing {

/// Direct evaluation of the warping equations, written independently of the
/// library: p_hat(t) = norm(t) .* (X_end p_end - X_start p_start)
///                   + X_start p_start,
/// with norm(t) the componentwise (tau(t) - p_start) / (p_end - p_start).
inline std::vector<Vec3> warp_formula_oracle(const std::vector<Vec3>& tau,
                                             const Pose& x_start,
                                             const Pose& x_end) {
  const Vec3 p_start = tau.front();
  const Vec3 p_end = tau.back();
  const Vec3 a0 = apply(x_start, p_start);
  const Vec3 a1 = apply(x_end, p_end);
  std::vector<Vec3> out;
  out.reserve(tau.size());
  for (const Vec3& p : tau) {
    const Vec3 norm{(p.x - p_start.x) / (p_end.x - p_start.x),
                    (p.y - p_start.y) / (p_end.y - p_start.y),
                    (p.z - p_start.z) / (p_end.z - p_start.z)};
    out.push_back({norm.x * (a1.x - a0.x) + a0.x,
                   norm.y * (a1.y - a0.y) + a0.y,
                   norm.z * (a1.z - a0.z) + a0.z});
  }
  return out;
}

}  // namespace oog::testing
