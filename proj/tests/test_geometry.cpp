#include "gacl/geometry.hpp"

#include "support/finite_diff.hpp"
#include "support/matrix_oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace gacl;

namespace {

constexpr double kTol = 1e-9;
const double kHalfPi = std::numbers::pi / 2;

Pose yaw(double angle, const Vector3& t = Vector3::Zero()) {
  return euler_to_pose(t, Vector3(0, 0, angle));
}

Vector6 random_vector6(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> t(-3.0, 3.0);
  std::uniform_real_distribution<double> a(-1.2, 1.2);
  Vector6 v;
  v << t(rng), t(rng), t(rng), a(rng), a(rng), a(rng);
  return v;
}

void expect_pose_near(const Pose& a, const Pose& b, double tol = kTol) {
  EXPECT_LT(oracle::max_abs_diff(oracle::from_pose(a), oracle::from_pose(b)), tol);
}

}  // namespace

TEST(Pose, IdentityAndCanonicalQuaternion) {
  const Pose e = Pose::identity();
  EXPECT_EQ(e.translation(), Vector3::Zero());
  EXPECT_DOUBLE_EQ(e.rotation().w(), 1.0);

  const Pose p(Vector3::Zero(), Quaternion(-0.5, 0.5, 0.5, 0.5));
  EXPECT_GE(p.rotation().w(), 0.0);
  EXPECT_NEAR(p.rotation().norm(), 1.0, 1e-12);

  const Pose unnormalized(Vector3::Zero(), Quaternion(2.0, 0.0, 0.0, 0.0));
  EXPECT_NEAR(unnormalized.rotation().norm(), 1.0, 1e-12);
}

TEST(Compose, Examples) {
  std::mt19937_64 rng(1);
  const Pose p = oracle::random_pose(rng);
  expect_pose_near(compose(Pose::identity(), p), p);

  const Pose sum = compose(Pose(Vector3(1, 0, 0), Matrix3::Identity()),
                           Pose(Vector3(2, 0, 0), Matrix3::Identity()));
  EXPECT_TRUE(sum.translation().isApprox(Vector3(3, 0, 0)));
  EXPECT_NEAR(rotation_angle(sum), 0.0, kTol);

  const Pose turned = compose(yaw(kHalfPi), Pose(Vector3(1, 0, 0), Matrix3::Identity()));
  const oracle::H expected = oracle::from_euler(0, 0, 0, 0, 0, kHalfPi) * oracle::from_euler(1, 0, 0, 0, 0, 0);
  EXPECT_LT(oracle::max_abs_diff(oracle::from_pose(turned), expected), kTol);
  EXPECT_NEAR(turned.translation().y(), 1.0, kTol);
  EXPECT_NEAR(turned.translation().x(), 0.0, kTol);
}

TEST(Inverse, Examples) {
  expect_pose_near(inverse(Pose::identity()), Pose::identity());
  EXPECT_TRUE(inverse(Pose(Vector3(1, 2, 3), Matrix3::Identity())).translation().isApprox(Vector3(-1, -2, -3)));
  const Pose inv = inverse(yaw(kHalfPi, Vector3(1, 0, 0)));
  expect_pose_near(inv, yaw(-kHalfPi, Vector3(0, 1, 0)));
}

TEST(RelativeBetween, Examples) {
  std::mt19937_64 rng(2);
  const Pose p = oracle::random_pose(rng);
  expect_pose_near(relative_between(p, p), Pose::identity());
  expect_pose_near(relative_between(Pose::identity(), p), p);
  const Pose r = relative_between(Pose(Vector3(1, 0, 0), Matrix3::Identity()), yaw(kHalfPi, Vector3(1, 1, 0)));
  expect_pose_near(r, yaw(kHalfPi, Vector3(0, 1, 0)));
}

TEST(Geometry, MatchesHomogeneousOracle) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    const Pose a = oracle::random_pose(rng);
    const Pose b = oracle::random_pose(rng);
    const auto A = oracle::from_pose(a);
    const auto B = oracle::from_pose(b);
    EXPECT_LT(oracle::max_abs_diff(oracle::from_pose(compose(a, b)), oracle::compose(A, B)), kTol);
    EXPECT_LT(oracle::max_abs_diff(oracle::from_pose(inverse(a)), oracle::inverse(A)), kTol);
    EXPECT_LT(oracle::max_abs_diff(oracle::from_pose(relative_between(a, b)), oracle::relative_between(A, B)), kTol);
    EXPECT_LT(oracle::max_abs_diff(a.matrix(), A), kTol);
  }
}

TEST(Geometry, GroupLaws) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 100; ++i) {
    const Pose a = oracle::random_pose(rng);
    const Pose b = oracle::random_pose(rng);
    const Pose c = oracle::random_pose(rng);
    expect_pose_near(compose(compose(a, b), c), compose(a, compose(b, c)));
    expect_pose_near(compose(a, Pose::identity()), a);
    expect_pose_near(compose(a, inverse(a)), Pose::identity());
    expect_pose_near(compose(a, relative_between(a, b)), b);
    for (const Pose& p : {compose(a, b), inverse(a), relative_between(a, b)}) {
      EXPECT_NEAR(p.rotation().norm(), 1.0, 1e-9);
      EXPECT_GE(p.rotation().w(), 0.0);
    }
  }
}

TEST(Euler, Examples) {
  expect_pose_near(euler_to_pose(Vector3::Zero(), Vector3::Zero()), Pose::identity());
  const Pose y = euler_to_pose(Vector3::Zero(), Vector3(0, 0, kHalfPi));
  EXPECT_NEAR(y.rotation().w(), std::sqrt(0.5), 1e-12);
  EXPECT_NEAR(y.rotation().z(), std::sqrt(0.5), 1e-12);

  const Pose r = euler_to_pose(Vector3(1, 2, 3), Vector3(0.1, 0.2, 0.3));
  EXPECT_LT(oracle::max_abs_diff(oracle::from_pose(r), oracle::from_euler(1, 2, 3, 0.1, 0.2, 0.3)), 1e-12);

  const auto e = pose_to_euler(Pose::identity());
  EXPECT_EQ(e.rotation, Vector3::Zero());
  EXPECT_TRUE(pose_to_euler(y).rotation.isApprox(Vector3(0, 0, kHalfPi)));
}

TEST(Euler, RoundTrip) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    const Vector6 v = random_vector6(rng);
    EXPECT_LT((to_vector6(from_vector6(v)) - v).cwiseAbs().maxCoeff(), kTol);
    const Pose p = oracle::random_pose(rng);
    if (std::abs(pose_to_euler(p).rotation.y()) > kHalfPi - 1e-3) continue;
    expect_pose_near(from_vector6(to_vector6(p)), p);
  }
}

TEST(Euler, GimbalLock) {
  EXPECT_THROW(pose_to_euler(euler_to_pose(Vector3::Zero(), Vector3(0.3, kHalfPi, 0.1))), GimbalLockError);
  EXPECT_THROW(pose_to_euler(euler_to_pose(Vector3::Zero(), Vector3(0, -kHalfPi + 1e-8, 0))), GimbalLockError);
  EXPECT_NO_THROW(pose_to_euler(euler_to_pose(Vector3::Zero(), Vector3(0, kHalfPi - 1e-4, 0))));
}

TEST(Jacobians, IdentityCases) {
  std::mt19937_64 rng(6);
  const Pose p = from_vector6(random_vector6(rng));
  const auto [out, jac] = compose_with_jacobians(Pose::identity(), p);
  EXPECT_LT((jac.d_out_d_right - Matrix6::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  const auto [out2, jac2] = compose_with_jacobians(Pose::identity(), Pose::identity());
  EXPECT_LT((jac2.d_out_d_left - Matrix6::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((jac2.d_out_d_right - Matrix6::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  expect_pose_near(out, p);
}

TEST(Jacobians, MatchFiniteDifferences) {
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Vector6 a = random_vector6(rng);
    const Vector6 b = random_vector6(rng);
    const auto [out, jac] = compose_with_jacobians(from_vector6(a), from_vector6(b));
    expect_pose_near(out, compose(from_vector6(a), from_vector6(b)));
    for (int row = 0; row < 6; ++row) {
      const auto f_left = [&](const Eigen::VectorXd& x) {
        return to_vector6(compose(from_vector6(x), from_vector6(b)))(row);
      };
      const auto f_right = [&](const Eigen::VectorXd& x) {
        return to_vector6(compose(from_vector6(a), from_vector6(x)))(row);
      };
      const Eigen::VectorXd gl = fd::gradient(f_left, a);
      const Eigen::VectorXd gr = fd::gradient(f_right, b);
      for (int col = 0; col < 6; ++col) {
        worst = std::max(worst, fd::relative_error(jac.d_out_d_left(row, col), gl(col)));
        worst = std::max(worst, fd::relative_error(jac.d_out_d_right(row, col), gr(col)));
      }
    }
  }
  EXPECT_LT(worst, 1e-5);
}

TEST(Accumulate, Examples) {
  const auto single = accumulate({});
  ASSERT_EQ(single.size(), 1u);
  expect_pose_near(single[0], Pose::identity());

  const std::vector<Pose> line(5, Pose(Vector3(1, 0, 0), Matrix3::Identity()));
  const auto traj = accumulate(line);
  ASSERT_EQ(traj.size(), 6u);
  for (std::size_t k = 0; k < traj.size(); ++k) EXPECT_NEAR(traj[k].translation().x(), double(k), kTol);

  const std::vector<Pose> square(4, yaw(kHalfPi, Vector3(1, 0, 0)));
  const auto loop = accumulate(square);
  expect_pose_near(loop[4], Pose::identity());
  EXPECT_NEAR(loop[2].translation().x(), 1.0, kTol);
  EXPECT_NEAR(loop[2].translation().y(), 1.0, kTol);
}

TEST(Accumulate, RecoversRelatives) {
  std::mt19937_64 rng(8);
  std::vector<Pose> rel;
  std::vector<oracle::H> rel_h;
  for (int i = 0; i < 50; ++i) {
    rel.push_back(oracle::random_pose(rng, 2.0));
    rel_h.push_back(oracle::from_pose(rel.back()));
  }
  const Pose start = oracle::random_pose(rng);
  const auto traj = accumulate(rel, start);
  const auto ref = oracle::accumulate(rel_h, oracle::from_pose(start));
  ASSERT_EQ(traj.size(), rel.size() + 1);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    EXPECT_LT(oracle::max_abs_diff(oracle::from_pose(traj[k]), ref[k]), 1e-8);
  }
  const auto back = traj.relatives();
  for (std::size_t k = 0; k < rel.size(); ++k) expect_pose_near(back[k], rel[k]);
}

TEST(Trajectory, Invariants) {
  EXPECT_THROW(Trajectory(std::vector<Pose>{}), std::invalid_argument);
  const std::vector<Pose> two(2, Pose::identity());
  EXPECT_THROW(Trajectory(two, std::vector<double>{0.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(Trajectory(two, std::vector<double>{0.0}), std::invalid_argument);
  EXPECT_NO_THROW(Trajectory(two, std::vector<double>{0.0, 0.1}));

  const auto line = accumulate(std::vector<Pose>(3, Pose(Vector3(0, 2, 0), Matrix3::Identity())));
  const auto d = line.path_lengths();
  ASSERT_EQ(d.size(), 4u);
  EXPECT_NEAR(d[3], 6.0, kTol);
}

TEST(Geometry, RotationAngleAndSkew) {
  EXPECT_NEAR(rotation_angle(yaw(0.7)), 0.7, 1e-12);
  EXPECT_NEAR(rotation_angle(yaw(-0.7)), 0.7, 1e-12);
  const Vector3 a(1, 2, 3), b(-2, 0.5, 4);
  EXPECT_TRUE((skew(a) * b).isApprox(a.cross(b)));
}
