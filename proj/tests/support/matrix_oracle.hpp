#pragma once

// Brute-force 4x4 homogeneous-matrix reference for rigid transforms. Builds
// matrices from the raw quaternion components and never calls the geometry
// module's own composition code.

#include "gacl/geometry.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <vector>

namespace oracle {

using H = Eigen::Matrix4d;

inline H from_pose(const gacl::Pose& p) {
  const auto& q = p.rotation();
  const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
  H m = H::Identity();
  m(0, 0) = 1 - 2 * (y * y + z * z);
  m(0, 1) = 2 * (x * y - w * z);
  m(0, 2) = 2 * (x * z + w * y);
  m(1, 0) = 2 * (x * y + w * z);
  m(1, 1) = 1 - 2 * (x * x + z * z);
  m(1, 2) = 2 * (y * z - w * x);
  m(2, 0) = 2 * (x * z - w * y);
  m(2, 1) = 2 * (y * z + w * x);
  m(2, 2) = 1 - 2 * (x * x + y * y);
  m(0, 3) = p.translation().x();
  m(1, 3) = p.translation().y();
  m(2, 3) = p.translation().z();
  return m;
}

/// R = Rz(yaw) Ry(pitch) Rx(roll) from elementary rotations.
inline H from_euler(double tx, double ty, double tz, double roll, double pitch, double yaw) {
  Eigen::Matrix3d rx, ry, rz;
  rx << 1, 0, 0, 0, std::cos(roll), -std::sin(roll), 0, std::sin(roll), std::cos(roll);
  ry << std::cos(pitch), 0, std::sin(pitch), 0, 1, 0, -std::sin(pitch), 0, std::cos(pitch);
  rz << std::cos(yaw), -std::sin(yaw), 0, std::sin(yaw), std::cos(yaw), 0, 0, 0, 1;
  H m = H::Identity();
  m.topLeftCorner<3, 3>() = rz * ry * rx;
  m(0, 3) = tx;
  m(1, 3) = ty;
  m(2, 3) = tz;
  return m;
}

inline H compose(const H& a, const H& b) { return a * b; }
inline H inverse(const H& a) { return a.inverse(); }  // general LU inverse
inline H relative_between(const H& a, const H& b) { return a.inverse() * b; }

inline std::vector<H> accumulate(const std::vector<H>& rel, const H& initial = H::Identity()) {
  std::vector<H> out{initial};
  for (const auto& r : rel) out.push_back(out.back() * r);
  return out;
}

inline double max_abs_diff(const H& a, const H& b) { return (a - b).cwiseAbs().maxCoeff(); }

/// Uniformly random rotation (normalized Gaussian quaternion) and a
/// translation with components in [-scale, scale].
inline gacl::Pose random_pose(std::mt19937_64& rng, double scale = 10.0) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(-scale, scale);
  gacl::Quaternion q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return gacl::Pose(gacl::Vector3(u(rng), u(rng), u(rng)), q);
}

}  // namespace oracle
