#pragma once

#include <Eigen/Core>

#include <cmath>
#include <stdexcept>
#include <utility>

#include "geodepth/camera.hpp"
#include "geodepth/util.hpp"

namespace geodepth {

template <typename T>
inline constexpr T kPi = T(3.14159265358979323846L);

/// Wraps an angle into [-pi, pi). The interval is half-open so the map is
/// a bijection on one full turn.
template <typename T>
T normalize_angle(T a) {
  T r = std::remainder(a, T(2) * kPi<T>);
  if (r == kPi<T>) r = -kPi<T>;
  return r;
}

/// Oriented 3D box in the camera frame (x right, y down, z forward).
/// bottom_center sits on the box's bottom face; r_y is the yaw about the
/// vertical axis, normalized into [-pi, pi) at construction.
template <typename T>
struct Box3DT {
  T W{};  ///< width, meters
  T H{};  ///< height, meters
  T L{};  ///< length, meters
  Eigen::Matrix<T, 3, 1> bottom_center = Eigen::Matrix<T, 3, 1>::Zero();
  T r_y{};

  Box3DT() = default;
  Box3DT(T width, T height, T length, Eigen::Matrix<T, 3, 1> center, T yaw)
      : W(width), H(height), L(length), bottom_center(std::move(center)), r_y(normalize_angle(yaw)) {
    if (!(W > T(0)) || !(H > T(0)) || !(L > T(0))) {
      throw std::domain_error(msg("Box3D: dimensions must be positive, got W=", W, " H=", H, " L=", L));
    }
  }
};

using Box3D = Box3DT<double>;

enum class BoxKind { annotated, projected };

/// Axis-aligned 2D box in pixels, stored as center and size.
template <typename T>
struct Box2DT {
  T u{};  ///< center column
  T v{};  ///< center row
  T w{};  ///< width
  T h{};  ///< height
  BoxKind kind = BoxKind::annotated;

  T left() const { return u - w / T(2); }
  T right() const { return u + w / T(2); }
  T top() const { return v - h / T(2); }
  T bottom() const { return v + h / T(2); }

  static Box2DT from_corners(T left, T top, T right, T bottom, BoxKind kind = BoxKind::annotated) {
    if (right < left || bottom < top) {
      throw std::domain_error(
          msg("Box2D: corners out of order: left=", left, " top=", top, " right=", right, " bottom=", bottom));
    }
    Box2DT b;
    b.u = (left + right) / T(2);
    b.v = (top + bottom) / T(2);
    b.w = right - left;
    b.h = bottom - top;
    b.kind = kind;
    return b;
  }
};

using Box2D = Box2DT<double>;

/// The eight box corners, as camera-frame points and as offsets from the
/// bottom center. Column k encodes the object-frame sign triple
/// (sx, sy, sz) of corner k in the bits (k&4, k&2, k&1); bit set means the
/// larger coordinate, so columns run in lexicographic (-,-,-) .. (+,+,+)
/// order. The vertical offset takes the two values {-H, 0}: bit clear is
/// the top face, bit set the bottom face.
template <typename T>
struct CornerSetT {
  Eigen::Matrix<T, 3, 8> corners;
  Eigen::Matrix<T, 3, 8> offsets;
};

using CornerSet = CornerSetT<double>;

/// Offsets of the eight corners from the bottom center, columns ordered
/// as documented on CornerSetT. The footprint offsets rotate with yaw as
/// dx = x_o cos(r_y) + z_o sin(r_y), dz = x_o sin(r_y) - z_o cos(r_y)
/// for object-frame (x_o, z_o) = (+-L/2, +-W/2).
template <typename T>
Eigen::Matrix<T, 3, 8> corner_offsets(T W, T H, T L, T r_y) {
  if (!(W > T(0)) || !(H > T(0)) || !(L > T(0))) {
    throw std::domain_error(msg("corner_offsets: dimensions must be positive, got W=", W, " H=", H, " L=", L));
  }
  const T c = std::cos(r_y);
  const T s = std::sin(r_y);
  Eigen::Matrix<T, 3, 8> out;
  for (int k = 0; k < 8; ++k) {
    const T x_o = (k & 4) ? L / T(2) : -L / T(2);
    const T y_o = (k & 2) ? T(0) : -H;
    const T z_o = (k & 1) ? W / T(2) : -W / T(2);
    out(0, k) = x_o * c + z_o * s;
    out(1, k) = y_o;
    out(2, k) = x_o * s - z_o * c;
  }
  return out;
}

/// Corners of a box in the camera frame: bottom_center plus each offset.
template <typename T>
CornerSetT<T> corners_camera(const Box3DT<T>& box) {
  CornerSetT<T> cs;
  cs.offsets = corner_offsets(box.W, box.H, box.L, box.r_y);
  cs.corners = cs.offsets.colwise() + box.bottom_center;
  return cs;
}

/// Largest |dz| over the eight corner offsets, in closed form.
template <typename T>
T delta_z_max(T W, T L, T r_y) {
  if (!(W > T(0)) || !(L > T(0))) {
    throw std::domain_error(msg("delta_z_max: dimensions must be positive, got W=", W, " L=", L));
  }
  return std::abs(L * std::sin(r_y)) / T(2) + std::abs(W * std::cos(r_y)) / T(2);
}

/// Tight axis-aligned pixel rectangle over the eight projected corners.
/// Any corner at or behind the image plane is an error; partially visible
/// boxes are out of scope here.
template <typename T>
Box2DT<T> project_box(const Box3DT<T>& box, const CameraIntrinsicsT<T>& cam) {
  const CornerSetT<T> cs = corners_camera(box);
  T u_min = std::numeric_limits<T>::infinity();
  T u_max = -std::numeric_limits<T>::infinity();
  T v_min = std::numeric_limits<T>::infinity();
  T v_max = -std::numeric_limits<T>::infinity();
  for (int k = 0; k < 8; ++k) {
    const PixelPointT<T> q = project_point<T>(cam, cs.corners.col(k));
    u_min = std::min(u_min, q.u);
    u_max = std::max(u_max, q.u);
    v_min = std::min(v_min, q.v);
    v_max = std::max(v_max, q.v);
  }
  return Box2DT<T>::from_corners(u_min, v_min, u_max, v_max, BoxKind::projected);
}

/// Observation angle from yaw: alpha = r_y - atan2(x, z), wrapped.
template <typename T>
T alpha_from_ry(T r_y, T x, T z) {
  if (!(z > T(0))) throw std::domain_error(msg("alpha_from_ry: z must be positive, got ", z));
  return normalize_angle(r_y - std::atan2(x, z));
}

/// Yaw from observation angle; inverse of alpha_from_ry.
template <typename T>
T ry_from_alpha(T alpha, T x, T z) {
  if (!(z > T(0))) throw std::domain_error(msg("ry_from_alpha: z must be positive, got ", z));
  return normalize_angle(alpha + std::atan2(x, z));
}

/// The four angles attached to one box observation: yaw r_y, viewing
/// angle theta = atan2(x, z), observation angle alpha = r_y - theta, and
/// the vertical angle beta of the ray through the projected bottom
/// center.
template <typename T>
struct AngleSetT {
  T r_y{};
  T theta{};
  T alpha{};
  T beta{};
};

using AngleSet = AngleSetT<double>;

template <typename T>
AngleSetT<T> angles_for_box(const Box3DT<T>& box, const CameraIntrinsicsT<T>& cam) {
  AngleSetT<T> a;
  a.r_y = box.r_y;
  a.theta = std::atan2(box.bottom_center.x(), box.bottom_center.z());
  a.alpha = normalize_angle(box.r_y - a.theta);
  const PixelPointT<T> q = project_point<T>(cam, box.bottom_center);
  a.beta = beta_from_pixel<T>(cam, q.v);
  return a;
}

}  // namespace geodepth
