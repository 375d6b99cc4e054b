#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "geodepth/box_geometry.hpp"
#include "geodepth/camera.hpp"
#include "geodepth/util.hpp"

namespace geodepth {

/// Projected heights below this many pixels reject depth recovery; the
/// formulas divide by h, and sub-pixel heights amplify noise unboundedly.
inline constexpr double kMinPixelHeight = 0.5;

/// Everything the geometric depth formulas consume for one object:
/// projected 2D box height h, the vertical ray angle beta, the 3D height
/// H, the depth half-extent dz of the rotated footprint, and the vertical
/// focal length f_v.
template <typename T>
struct GeometryObservationT {
  T h{};     ///< projected 2D box height, pixels
  T beta{};  ///< vertical angle of the viewing ray, radians
  T H{};     ///< 3D box height, meters
  T dz{};    ///< max depth offset of any corner from the center, meters
  T f_v{};   ///< vertical focal length, pixels
};

using GeometryObservation = GeometryObservationT<double>;

/// Scale factor for the coarsest depth formula z = k * H / h.
template <typename T>
struct DepthV2ScaleT {
  T k{};
};

using DepthV2Scale = DepthV2ScaleT<double>;

namespace detail {

template <typename T>
void check_pixel_height(const char* where, T h) {
  if (!(h >= T(kMinPixelHeight))) {
    throw std::domain_error(msg(where, ": box height ", h, " px is below the minimum ", kMinPixelHeight, " px"));
  }
}

}  // namespace detail

/// Projected 2D height of a box of 3D height H whose nearest and farthest
/// corners sit at depths z -+ dz, with the top face seen along the ray at
/// angle beta:
///
///   h = f_v (z tan(beta) + H) / (z - dz)  -  f_v (z tan(beta)) / (z + dz)
///
/// This is the forward model the depth formulas invert.
template <typename T>
T height_forward(T z, T beta, T H, T dz, T f_v) {
  if (!(z > dz)) {
    throw std::domain_error(msg("height_forward: need z > dz, got z=", z, " dz=", dz));
  }
  const T y = z * std::tan(beta);
  return f_v * (y + H) / (z - dz) - f_v * y / (z + dz);
}

/// Full geometric depth recovery: the positive root of the quadratic
/// obtained by inverting height_forward,
///
///   z = b/2 + sqrt(b^2 + 4c)/2,
///   b = (f_v/h) (2 tan(beta) dz + H),  c = (f_v H / h) dz + dz^2.
///
/// c >= 0 for valid observations, so the discriminant never drops below
/// b^2 and exactly one root is positive. See
/// docs/depth_recovery_derivation.md for the algebra.
template <typename T>
T depth_full(const GeometryObservationT<T>& obs) {
  detail::check_pixel_height("depth_full", obs.h);
  if (!(obs.H > T(0)) || !(obs.dz >= T(0)) || !(obs.f_v > T(0))) {
    throw std::domain_error(
        msg("depth_full: invalid observation H=", obs.H, " dz=", obs.dz, " f_v=", obs.f_v));
  }
  const T b = (obs.f_v / obs.h) * (T(2) * std::tan(obs.beta) * obs.dz + obs.H);
  if (obs.dz == T(0)) return b;  // c vanishes; the root is exactly b
  const T c = (obs.f_v * obs.H / obs.h) * obs.dz + obs.dz * obs.dz;
  const T disc = b * b + T(4) * c;
  if (!(disc >= T(0))) {
    throw std::domain_error(msg("depth_full: negative discriminant ", disc, " for h=", obs.h, " beta=", obs.beta,
                                " H=", obs.H, " dz=", obs.dz, " f_v=", obs.f_v));
  }
  return (b + std::sqrt(disc)) / T(2);
}

/// Simplified recovery keeping the footprint term but dropping the
/// quadratic correction: z = (f_v/h) (2 tan(beta) dz + H). Identical to
/// the b term of depth_full.
template <typename T>
T depth_v1(T h, T beta, T H, T dz, T f_v) {
  detail::check_pixel_height("depth_v1", h);
  return (f_v / h) * (T(2) * std::tan(beta) * dz + H);
}

/// Coarsest recovery, the form in common use: z = k * H / h.
template <typename T>
T depth_v2(T h, T H, const DepthV2ScaleT<T>& scale) {
  detail::check_pixel_height("depth_v2", h);
  if (!(scale.k > T(0))) {
    throw std::domain_error(msg("depth_v2: scale must be positive, got ", scale.k));
  }
  return (scale.k / h) * H;
}

/// One row of a formula comparison: the true depth, the three recovered
/// depths, and their signed and relative errors. Rows for boxes whose
/// observation is unusable carry ok = false and an explanatory message.
struct FormulaComparisonRow {
  std::size_t index = 0;
  double z_true = 0;
  double h = 0;
  double z_full = 0;
  double z_v1 = 0;
  double z_v2 = 0;
  double err_full = 0;
  double err_v1 = 0;
  double err_v2 = 0;
  double rel_full = 0;
  double rel_v1 = 0;
  double rel_v2 = 0;
  bool ok = false;
  std::string error;
};

/// Runs all three depth formulas on each box against the exact projected
/// box height and reports per-box errors. Per-box domain errors become
/// flagged rows; the batch never aborts. Rows come back in input order
/// regardless of the job count.
template <typename T>
std::vector<FormulaComparisonRow> compare_formulas(const std::vector<Box3DT<T>>& boxes,
                                                   const CameraIntrinsicsT<T>& cam, int jobs = 0) {
  std::vector<FormulaComparisonRow> rows(boxes.size());
  parallel_for(boxes.size(), jobs, [&](std::size_t i) {
    FormulaComparisonRow& row = rows[i];
    row.index = i;
    const Box3DT<T>& box = boxes[i];
    row.z_true = static_cast<double>(box.bottom_center.z());
    try {
      const Box2DT<T> box2d = project_box(box, cam);
      row.h = static_cast<double>(box2d.h);
      const AngleSetT<T> angles = angles_for_box(box, cam);
      GeometryObservationT<T> obs;
      obs.h = box2d.h;
      obs.beta = angles.beta;
      obs.H = box.H;
      obs.dz = delta_z_max(box.W, box.L, box.r_y);
      obs.f_v = cam.f_v;
      row.z_full = static_cast<double>(depth_full(obs));
      row.z_v1 = static_cast<double>(depth_v1(obs.h, obs.beta, obs.H, obs.dz, obs.f_v));
      row.z_v2 = static_cast<double>(depth_v2(obs.h, obs.H, DepthV2ScaleT<T>{cam.f_v}));
      row.err_full = row.z_full - row.z_true;
      row.err_v1 = row.z_v1 - row.z_true;
      row.err_v2 = row.z_v2 - row.z_true;
      row.rel_full = row.err_full / row.z_true;
      row.rel_v1 = row.err_v1 / row.z_true;
      row.rel_v2 = row.err_v2 / row.z_true;
      row.ok = true;
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
  });
  return rows;
}

}  // namespace geodepth
