#include "gacl/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace gacl {

namespace {

constexpr double kGimbalGuard = 1e-6;

Quaternion canonical(Quaternion q) {
  q.normalize();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  return q;
}

}  // namespace

Pose::Pose(const Vector3& translation, const Quaternion& rotation)
    : t_(translation), q_(canonical(rotation)) {}

Pose::Pose(const Vector3& translation, const Matrix3& rotation)
    : t_(translation), q_(canonical(Quaternion(rotation))) {}

Pose Pose::from_matrix(const Matrix4& m) {
  return Pose(Vector3(m.block<3, 1>(0, 3)), Matrix3(m.block<3, 3>(0, 0)));
}

Matrix4 Pose::matrix() const {
  Matrix4 m = Matrix4::Identity();
  m.block<3, 3>(0, 0) = rotation_matrix();
  m.block<3, 1>(0, 3) = t_;
  return m;
}

Pose compose(const Pose& parent, const Pose& child) {
  return Pose(parent.translation() + parent.rotation() * child.translation(),
              parent.rotation() * child.rotation());
}

Pose inverse(const Pose& p) {
  const Quaternion q_inv = p.rotation().conjugate();
  return Pose(-(q_inv * p.translation()), q_inv);
}

Pose relative_between(const Pose& a, const Pose& b) {
  return compose(inverse(a), b);
}

Matrix3 skew(const Vector3& v) {
  Matrix3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Matrix3 euler_rate_matrix(const Vector3& rpy) {
  // R = Rz(yaw) Ry(pitch) Rx(roll); perturbing each angle rotates about a
  // world-frame axis: roll about Rz Ry ex, pitch about Rz ey, yaw about ez.
  const Eigen::AngleAxisd rz(rpy.z(), Vector3::UnitZ());
  const Eigen::AngleAxisd ry(rpy.y(), Vector3::UnitY());
  Matrix3 e;
  e.col(0) = rz * (ry * Vector3::UnitX());
  e.col(1) = rz * Vector3::UnitY();
  e.col(2) = Vector3::UnitZ();
  return e;
}

std::pair<Pose, PoseJacobians> compose_with_jacobians(const Pose& parent, const Pose& child) {
  const Pose out = compose(parent, child);

  const EulerPose left = pose_to_euler(parent);
  const EulerPose right = pose_to_euler(child);
  const EulerPose result = pose_to_euler(out);

  const Matrix3 r_left = parent.rotation_matrix();
  const Matrix3 e_left = euler_rate_matrix(left.rotation);
  const Matrix3 e_right = euler_rate_matrix(right.rotation);
  const Matrix3 e_out_inv = euler_rate_matrix(result.rotation).inverse();

  PoseJacobians j;
  j.d_out_d_left.setZero();
  j.d_out_d_left.block<3, 3>(0, 0) = Matrix3::Identity();
  j.d_out_d_left.block<3, 3>(0, 3) = -skew(r_left * child.translation()) * e_left;
  j.d_out_d_left.block<3, 3>(3, 3) = e_out_inv * e_left;

  j.d_out_d_right.setZero();
  j.d_out_d_right.block<3, 3>(0, 0) = r_left;
  j.d_out_d_right.block<3, 3>(3, 3) = e_out_inv * r_left * e_right;
  return {out, j};
}

Matrix3 euler_to_rotation(const Vector3& rpy) {
  return euler_to_pose(Vector3::Zero(), rpy).rotation_matrix();
}

Pose euler_to_pose(const Vector3& translation, const Vector3& rpy) {
  const Quaternion q = Quaternion(Eigen::AngleAxisd(rpy.z(), Vector3::UnitZ())) *
                       Quaternion(Eigen::AngleAxisd(rpy.y(), Vector3::UnitY())) *
                       Quaternion(Eigen::AngleAxisd(rpy.x(), Vector3::UnitX()));
  return Pose(translation, q);
}

Pose from_vector6(const Vector6& v) {
  return euler_to_pose(v.head<3>(), v.tail<3>());
}

EulerPose pose_to_euler(const Pose& p) {
  const Matrix3 r = p.rotation_matrix();
  const double pitch = std::atan2(-r(2, 0), std::hypot(r(0, 0), r(1, 0)));
  if (std::numbers::pi / 2.0 - std::abs(pitch) < kGimbalGuard) {
    throw GimbalLockError("pitch " + std::to_string(pitch) + " rad is at gimbal lock");
  }
  EulerPose e;
  e.translation = p.translation();
  e.rotation = Vector3(std::atan2(r(2, 1), r(2, 2)), pitch, std::atan2(r(1, 0), r(0, 0)));
  return e;
}

Vector6 to_vector6(const Pose& p) {
  const EulerPose e = pose_to_euler(p);
  Vector6 v;
  v << e.translation, e.rotation;
  return v;
}

double rotation_angle(const Pose& p) {
  const Quaternion& q = p.rotation();
  return 2.0 * std::atan2(q.vec().norm(), std::abs(q.w()));
}

bool is_close(const Pose& a, const Pose& b, double tol) {
  return (a.translation() - b.translation()).norm() <= tol &&
         (a.rotation_matrix() - b.rotation_matrix()).cwiseAbs().maxCoeff() <= tol;
}

Trajectory::Trajectory(std::vector<Pose> poses, std::optional<std::vector<double>> timestamps)
    : poses_(std::move(poses)), timestamps_(std::move(timestamps)) {
  if (poses_.empty()) throw std::invalid_argument("trajectory must contain at least one pose");
  if (timestamps_) {
    if (timestamps_->size() != poses_.size()) {
      throw std::invalid_argument("trajectory has " + std::to_string(poses_.size()) +
                                  " poses but " + std::to_string(timestamps_->size()) +
                                  " timestamps");
    }
    for (std::size_t i = 1; i < timestamps_->size(); ++i) {
      if (!((*timestamps_)[i] > (*timestamps_)[i - 1])) {
        throw std::invalid_argument("timestamps must be strictly increasing (index " +
                                    std::to_string(i) + ")");
      }
    }
  }
}

std::vector<Pose> Trajectory::relatives() const {
  std::vector<Pose> out;
  out.reserve(poses_.size() - 1);
  for (std::size_t i = 1; i < poses_.size(); ++i) {
    out.push_back(relative_between(poses_[i - 1], poses_[i]));
  }
  return out;
}

std::vector<double> Trajectory::path_lengths() const {
  std::vector<double> d(poses_.size(), 0.0);
  for (std::size_t i = 1; i < poses_.size(); ++i) {
    d[i] = d[i - 1] + (poses_[i].translation() - poses_[i - 1].translation()).norm();
  }
  return d;
}

Trajectory accumulate(std::span<const Pose> relatives, const Pose& initial) {
  std::vector<Pose> poses;
  poses.reserve(relatives.size() + 1);
  poses.push_back(initial);
  for (const Pose& rel : relatives) poses.push_back(compose(poses.back(), rel));
  return Trajectory(std::move(poses));
}

}  // namespace gacl
