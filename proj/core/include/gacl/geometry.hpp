#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace gacl {

using Vector3 = Eigen::Vector3d;
using Vector6 = Eigen::Matrix<double, 6, 1>;
using Matrix3 = Eigen::Matrix3d;
using Matrix4 = Eigen::Matrix4d;
using Matrix6 = Eigen::Matrix<double, 6, 6>;
using Quaternion = Eigen::Quaterniond;

/// Thrown when a rotation is too close to pitch = ±90° for an XYZ Euler decomposition.
class GimbalLockError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Rigid-body transform (rotation + translation). The quaternion is kept unit
/// length with a non-negative scalar part.
class Pose {
 public:
  Pose() = default;
  Pose(const Vector3& translation, const Quaternion& rotation);
  Pose(const Vector3& translation, const Matrix3& rotation);

  static Pose identity() { return {}; }
  static Pose from_matrix(const Matrix4& m);

  const Vector3& translation() const { return t_; }
  const Quaternion& rotation() const { return q_; }
  Matrix3 rotation_matrix() const { return q_.toRotationMatrix(); }
  Matrix4 matrix() const;

 private:
  Vector3 t_ = Vector3::Zero();
  Quaternion q_ = Quaternion::Identity();
};

/// Jacobians of compose() in 6-DoF (translation, XYZ Euler) coordinates.
struct PoseJacobians {
  Matrix6 d_out_d_left;
  Matrix6 d_out_d_right;
};

/// Translation plus XYZ Euler angles (roll, pitch, yaw), R = Rz(yaw) Ry(pitch) Rx(roll).
struct EulerPose {
  Vector3 translation = Vector3::Zero();
  Vector3 rotation = Vector3::Zero();
};

/// T_parent * T_child.
Pose compose(const Pose& parent, const Pose& child);
Pose inverse(const Pose& p);
/// inverse(a) ⊕ b: the pose of b expressed in the frame of a.
Pose relative_between(const Pose& a, const Pose& b);
std::pair<Pose, PoseJacobians> compose_with_jacobians(const Pose& parent, const Pose& child);

Matrix3 euler_to_rotation(const Vector3& rpy);
Pose euler_to_pose(const Vector3& translation, const Vector3& rpy);
Pose from_vector6(const Vector6& v);

/// Throws GimbalLockError when pitch is within 1e-6 rad of ±π/2.
EulerPose pose_to_euler(const Pose& p);
Vector6 to_vector6(const Pose& p);

/// Maps Euler-angle rates to the world-frame angular velocity: ω = E(rpy) · d(rpy).
Matrix3 euler_rate_matrix(const Vector3& rpy);
Matrix3 skew(const Vector3& v);

/// Geodesic rotation angle in radians, in [0, π].
double rotation_angle(const Pose& p);

bool is_close(const Pose& a, const Pose& b, double tol);

/// Time-indexed sequence of absolute (world-frame) poses.
class Trajectory {
 public:
  explicit Trajectory(std::vector<Pose> poses,
                      std::optional<std::vector<double>> timestamps = std::nullopt);

  std::size_t size() const { return poses_.size(); }
  const Pose& operator[](std::size_t i) const { return poses_[i]; }
  const std::vector<Pose>& poses() const { return poses_; }
  const std::optional<std::vector<double>>& timestamps() const { return timestamps_; }

  /// Consecutive parent-frame relatives; size() - 1 entries.
  std::vector<Pose> relatives() const;
  /// Cumulative path length at each pose, starting at 0.
  std::vector<double> path_lengths() const;

 private:
  std::vector<Pose> poses_;
  std::optional<std::vector<double>> timestamps_;
};

/// pose[k+1] = compose(pose[k], relatives[k]), pose[0] = initial.
Trajectory accumulate(std::span<const Pose> relatives, const Pose& initial = Pose::identity());

}  // namespace gacl
