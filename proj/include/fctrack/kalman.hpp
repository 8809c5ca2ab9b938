#pragma once

#include <algorithm>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "fctrack/geometry.hpp"

namespace fctrack {

/// Constant-velocity box state: (center-x, center-y, aspect w/h, height) and their
/// per-frame velocities.
struct MotionState {
  Eigen::Matrix<double, 8, 1> mean;
  Eigen::Matrix<double, 8, 8> covariance;
};

namespace kalman {

// Noise scales relative to box height, as in SORT-family trackers.
inline constexpr double kStdWeightPosition = 1.0 / 20.0;
inline constexpr double kStdWeightVelocity = 1.0 / 160.0;

inline constexpr double kMinHeight = 1.0;
inline constexpr double kMinAspect = 1e-3;

using Mat8 = Eigen::Matrix<double, 8, 8>;
using Mat4 = Eigen::Matrix<double, 4, 4>;
using Mat48 = Eigen::Matrix<double, 4, 8>;
using Vec4 = Eigen::Matrix<double, 4, 1>;

inline Mat8 transition() {
  Mat8 f = Mat8::Identity();
  for (int i = 0; i < 4; ++i) f(i, i + 4) = 1.0;
  return f;
}

inline Mat48 observation() {
  Mat48 h = Mat48::Zero();
  for (int i = 0; i < 4; ++i) h(i, i) = 1.0;
  return h;
}

inline Vec4 measurement(const BoundingBox& b) {
  return Vec4(b.center_x(), b.center_y(), b.width() / b.height(), b.height());
}

}  // namespace kalman

inline MotionState kf_initiate(const BoundingBox& box) {
  using namespace kalman;
  MotionState s;
  s.mean.setZero();
  s.mean.head<4>() = measurement(box);
  const double h = box.height();
  Eigen::Matrix<double, 8, 1> std;
  std << 2 * kStdWeightPosition * h, 2 * kStdWeightPosition * h, 1e-2,
      2 * kStdWeightPosition * h, 10 * kStdWeightVelocity * h, 10 * kStdWeightVelocity * h,
      1e-5, 10 * kStdWeightVelocity * h;
  s.covariance = std.array().square().matrix().asDiagonal();
  return s;
}

inline MotionState predict(const MotionState& state) {
  using namespace kalman;
  const double h = std::max(state.mean(3), kMinHeight);
  Eigen::Matrix<double, 8, 1> std;
  std << kStdWeightPosition * h, kStdWeightPosition * h, 1e-2, kStdWeightPosition * h,
      kStdWeightVelocity * h, kStdWeightVelocity * h, 1e-5, kStdWeightVelocity * h;
  const Mat8 q = std.array().square().matrix().asDiagonal();
  const Mat8 f = transition();
  MotionState out;
  out.mean = f * state.mean;
  out.covariance = f * state.covariance * f.transpose() + q;
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  return out;
}

inline MotionState kf_update(const MotionState& state, const BoundingBox& observed) {
  using namespace kalman;
  const double h = std::max(state.mean(3), kMinHeight);
  Vec4 r_std(kStdWeightPosition * h, kStdWeightPosition * h, 1e-1, kStdWeightPosition * h);
  const Mat4 r = r_std.array().square().matrix().asDiagonal();
  const Mat48 hm = observation();

  const Mat4 s = hm * state.covariance * hm.transpose() + r;
  // K = P H^T S^-1, solved through the Cholesky factor of S.
  const Eigen::Matrix<double, 8, 4> gain =
      s.llt().solve(hm * state.covariance.transpose()).transpose();
  const Vec4 innovation = measurement(observed) - hm * state.mean;

  MotionState out;
  out.mean = state.mean + gain * innovation;
  // Joseph form keeps the covariance symmetric positive semi-definite.
  const Mat8 ikh = Mat8::Identity() - gain * hm;
  out.covariance = ikh * state.covariance * ikh.transpose() + gain * r * gain.transpose();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  return out;
}

/// Box at the state mean, with height and aspect clamped to stay valid.
inline BoundingBox state_box(const MotionState& state) {
  const double h = std::max(state.mean(3), kalman::kMinHeight);
  const double a = std::max(state.mean(2), kalman::kMinAspect);
  return BoundingBox::from_center(state.mean(0), state.mean(1), a * h, h);
}

}  // namespace fctrack
