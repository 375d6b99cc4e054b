#pragma once

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "geodepth/util.hpp"

namespace geodepth {

/// Points closer than this to the image plane are rejected rather than
/// divided by.
inline constexpr double kMinDepth = 1e-6;

/// Pinhole camera in the rectified frame: x right, y down, z forward.
/// The projective offset t_proj holds the fourth column of the 3x4
/// projection matrix; it shifts pixel coordinates for cameras mounted off
/// the reference camera.
template <typename T>
struct CameraIntrinsicsT {
  T f_u{};
  T f_v{};
  T c_u{};
  T c_v{};
  Eigen::Matrix<T, 3, 1> t_proj = Eigen::Matrix<T, 3, 1>::Zero();

  /// Pulls the pinhole parameters out of a full 3x4 projection matrix.
  static CameraIntrinsicsT from_projection_matrix(const Eigen::Matrix<T, 3, 4>& P) {
    CameraIntrinsicsT cam;
    cam.f_u = P(0, 0);
    cam.f_v = P(1, 1);
    cam.c_u = P(0, 2);
    cam.c_v = P(1, 2);
    cam.t_proj << P(0, 3), P(1, 3), P(2, 3);
    return cam;
  }

  Eigen::Matrix<T, 3, 4> projection_matrix() const {
    Eigen::Matrix<T, 3, 4> P = Eigen::Matrix<T, 3, 4>::Zero();
    P(0, 0) = f_u;
    P(1, 1) = f_v;
    P(0, 2) = c_u;
    P(1, 2) = c_v;
    P(2, 2) = T(1);
    P(0, 3) = t_proj(0);
    P(1, 3) = t_proj(1);
    P(2, 3) = t_proj(2);
    return P;
  }
};

using CameraIntrinsics = CameraIntrinsicsT<double>;

/// Pixel position plus the camera-frame depth it was projected from.
template <typename T>
struct PixelPointT {
  T u{};
  T v{};
  T z{};
};

using PixelPoint = PixelPointT<double>;

/// Projects a camera-frame point to the image. The returned z is the
/// camera-frame depth, kept alongside the pixel so the projection can be
/// inverted exactly.
template <typename T>
PixelPointT<T> project_point(const CameraIntrinsicsT<T>& cam, const Eigen::Matrix<T, 3, 1>& p) {
  if (!(p.z() >= T(kMinDepth))) {
    throw std::domain_error(msg("project_point: depth ", p.z(), " is below the minimum ", kMinDepth));
  }
  PixelPointT<T> out;
  out.u = (cam.f_u * p.x() + cam.c_u * p.z() + cam.t_proj(0)) / p.z();
  out.v = (cam.f_v * p.y() + cam.c_v * p.z() + cam.t_proj(1)) / p.z();
  out.z = p.z();
  return out;
}

/// Inverse of project_point for a pixel with known depth.
template <typename T>
Eigen::Matrix<T, 3, 1> backproject_pixel(const CameraIntrinsicsT<T>& cam, T u, T v, T z) {
  if (!(z >= T(kMinDepth))) {
    throw std::domain_error(msg("backproject_pixel: depth ", z, " is below the minimum ", kMinDepth));
  }
  Eigen::Matrix<T, 3, 1> p;
  p.x() = ((u - cam.c_u) * z - cam.t_proj(0)) / cam.f_u;
  p.y() = ((v - cam.c_v) * z - cam.t_proj(1)) / cam.f_v;
  p.z() = z;
  return p;
}

template <typename T>
Eigen::Matrix<T, 3, 1> backproject_pixel(const CameraIntrinsicsT<T>& cam, const PixelPointT<T>& q) {
  return backproject_pixel(cam, q.u, q.v, q.z);
}

/// Row-major grid of per-pixel depths. A cell is valid when its depth is
/// finite and at least kMinDepth; anything else (NaN marker, zero,
/// negative) is treated as missing.
template <typename T>
struct DepthMapT {
  int rows = 0;
  int cols = 0;
  std::vector<T> depths;

  DepthMapT() = default;
  DepthMapT(int r, int c, T fill = std::numeric_limits<T>::quiet_NaN())
      : rows(r), cols(c), depths(static_cast<std::size_t>(r) * c, fill) {}

  T& at(int r, int c) { return depths[static_cast<std::size_t>(r) * cols + c]; }
  T at(int r, int c) const { return depths[static_cast<std::size_t>(r) * cols + c]; }
  bool valid(int r, int c) const {
    const T d = at(r, c);
    return std::isfinite(d) && d >= T(kMinDepth);
  }
};

using DepthMap = DepthMapT<double>;

/// Row-major grid of camera-frame points; invalid cells hold all-NaN
/// vectors.
template <typename T>
struct PointMapT {
  int rows = 0;
  int cols = 0;
  std::vector<Eigen::Matrix<T, 3, 1>> points;

  PointMapT() = default;
  PointMapT(int r, int c)
      : rows(r),
        cols(c),
        points(static_cast<std::size_t>(r) * c,
               Eigen::Matrix<T, 3, 1>::Constant(std::numeric_limits<T>::quiet_NaN())) {}

  Eigen::Matrix<T, 3, 1>& at(int r, int c) { return points[static_cast<std::size_t>(r) * cols + c]; }
  const Eigen::Matrix<T, 3, 1>& at(int r, int c) const {
    return points[static_cast<std::size_t>(r) * cols + c];
  }
  bool valid(int r, int c) const { return !std::isnan(at(r, c).x()); }
};

using PointMap = PointMapT<double>;

/// Lifts a depth map to a 3-channel map of camera-frame points: cell
/// (r, c) with depth d becomes backproject_pixel(c, r, d). Invalid depth
/// cells come out as NaN points.
template <typename T>
PointMapT<T> backproject_depth_map(const CameraIntrinsicsT<T>& cam, const DepthMapT<T>& depth) {
  if (depth.rows <= 0 || depth.cols <= 0) {
    throw std::invalid_argument(msg("backproject_depth_map: empty grid ", depth.rows, "x", depth.cols));
  }
  PointMapT<T> out(depth.rows, depth.cols);
  for (int r = 0; r < depth.rows; ++r) {
    for (int c = 0; c < depth.cols; ++c) {
      if (depth.valid(r, c)) {
        out.at(r, c) = backproject_pixel(cam, T(c), T(r), depth.at(r, c));
      }
    }
  }
  return out;
}

/// Elevation angle of the viewing ray through image row v_o, measured
/// from the optical axis, positive below the principal point (y is down).
template <typename T>
T beta_from_pixel(const CameraIntrinsicsT<T>& cam, T v_o) {
  return std::atan((v_o - cam.c_v) / cam.f_v);
}

}  // namespace geodepth
