#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "geodepth/box_geometry.hpp"
#include "geodepth/camera.hpp"
#include "geodepth/kitti_io.hpp"

namespace geodepth {

/// Default camera used by synthetic studies; values follow the public
/// driving dataset's color-camera calibration.
CameraIntrinsics kitti_like_camera();

inline constexpr int kDefaultImageWidth = 1242;
inline constexpr int kDefaultImageHeight = 375;

/// Car-like footprint dimensions used by the default sweeps.
inline constexpr double kCarWidth = 1.6;
inline constexpr double kCarLength = 3.9;

/// Recipe for sampling synthetic frames: uniform placement and yaw,
/// normal dimensions, everything snapped to the two-decimal label grid
/// before any derived quantity is computed, so written files are exactly
/// self-consistent.
struct SyntheticSceneSpec {
  std::uint64_t seed = 1;
  int boxes_per_frame = 5;
  std::pair<double, double> z_range{8.0, 60.0};
  std::pair<double, double> x_range{-15.0, 15.0};
  std::pair<double, double> yaw_range{-kPi<double>, kPi<double>};
  double y_mean = 1.65;  ///< bottom-center height below the camera
  double y_stddev = 0.05;
  double w_mean = 1.6;
  double w_stddev = 0.1;
  double h_mean = 1.5;
  double h_stddev = 0.1;
  double l_mean = 3.9;
  double l_stddev = 0.2;
  CameraIntrinsics camera = kitti_like_camera();
  int image_width = kDefaultImageWidth;
  int image_height = kDefaultImageHeight;
  std::string category = "Car";
};

/// Samples n_frames of fully visible boxes by rejection: every corner in
/// front of the camera and every projected corner inside the image.
/// Labels carry the exact projected 2D box and the observation angle
/// derived from the snapped 7-tuple. Deterministic per seed for any job
/// count. Throws ConfigError when the rejection rate exceeds 99.9%.
std::vector<Frame> generate_scenes(const SyntheticSceneSpec& spec, int n_frames, int jobs = 0);

/// Misalignment between annotated and projected 2D boxes, bucketed by
/// annotated depth. Samples whose projected box leaves the image, or
/// which the annotation marks truncated, are tallied separately and
/// excluded from the means.
struct MisalignmentBucket {
  double range_lo = 0;
  double range_hi = 0;  ///< depth bucket (lo, hi]; infinity for the open tail
  int count = 0;        ///< samples contributing to the means
  int truncated = 0;
  double mean_iou = 0;
  double mean_du = 0;  ///< mean |center-column delta|
  double mean_dv = 0;  ///< mean |center-row delta|
  double mean_dw = 0;  ///< mean |width delta|
  double mean_dh = 0;  ///< mean |height delta|
};

struct MisalignmentReport {
  std::vector<MisalignmentBucket> buckets;
  int total = 0;    ///< records considered
  int skipped = 0;  ///< ignorable or unprojectable records
};

MisalignmentReport misalignment_report(const std::vector<Frame>& frames,
                                       int image_width = kDefaultImageWidth,
                                       int image_height = kDefaultImageHeight);

/// Depth statistics per (2D height, 3D height) cell.
struct DepthSpreadCell {
  double h_center = 0;  ///< pixels
  double H_center = 0;  ///< meters
  int count = 0;
  double max_z = 0;
  double min_z = 0;
  double diff = 0;
};

struct DepthSpreadRow {
  double h_center = 0;
  std::vector<DepthSpreadCell> cells;  ///< one per 3D-height bucket
  int nonempty_cells = 0;
  double avg_max = 0;  ///< means over the row's non-empty cells
  double avg_min = 0;
  double avg_diff = 0;
};

struct DepthSpreadTable {
  std::vector<DepthSpreadRow> rows;
  double h_tol = 0.5;
  double H_tol = 0.005;
  bool annotated_h = false;
};

/// Groups objects into (h +- h_tol) x (H +- H_tol) cells and reports the
/// max, min and spread of their annotated depths, plus per-row averages
/// over non-empty cells. h defaults to the projected box height;
/// annotated_h switches to the annotation's own 2D box.
DepthSpreadTable depth_spread_table(const std::vector<Frame>& frames, const std::vector<double>& h_centers,
                                    const std::vector<double>& H_centers, double h_tol = 0.5,
                                    double H_tol = 0.005, bool annotated_h = false);

/// One evaluated grid point of a sensitivity sweep.
struct SweepCell {
  double beta = 0;
  double r_y = 0;
  double dz = 0;
  double z = 0;
  bool ok = false;
  std::string error;
};

struct SweepResult {
  std::vector<SweepCell> cells;  ///< beta-major over the grid cross product
  int ok_count = 0;
  double min_z = 0;
  double max_z = 0;
  double spread = 0;
};

/// Evaluates the full depth formula over the cross product of viewing
/// angles and yaws for a fixed 2D height, 3D height and footprint. The
/// yaw enters through the footprint's depth extent. Formula domain
/// errors become flagged cells rather than aborting the sweep.
SweepResult sensitivity_sweep(double H, double h, const CameraIntrinsics& cam,
                              const std::vector<double>& beta_grid, const std::vector<double>& ry_grid,
                              double W = kCarWidth, double L = kCarLength);

/// Evenly spaced inclusive grid from lo to hi.
std::vector<double> uniform_grid(double lo, double hi, int points);

/// The sweep grids behind the headline spread figure: 16 viewing angles
/// in [-0.05, 0.10] rad crossed with 64 yaws over the full turn.
std::vector<double> default_beta_grid();
std::vector<double> default_ry_grid();

}  // namespace geodepth
