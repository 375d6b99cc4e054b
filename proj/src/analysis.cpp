#include "geodepth/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geodepth/depth_formula.hpp"
#include "geodepth/errors.hpp"
#include "geodepth/eval_detection.hpp"
#include "geodepth/util.hpp"

namespace geodepth {
namespace {

constexpr int kMaxAttemptsPerBox = 10000;  // 1/10000 success rate = the 99.9% rejection cap

double round2(double v) { return std::round(v * 100.0) / 100.0; }

void validate_spec(const SyntheticSceneSpec& spec) {
  if (spec.boxes_per_frame < 0) {
    throw ConfigError(msg("generate_scenes: negative boxes_per_frame ", spec.boxes_per_frame));
  }
  if (!(spec.z_range.first < spec.z_range.second) || !(spec.z_range.first > 0)) {
    throw ConfigError(msg("generate_scenes: bad z_range (", spec.z_range.first, ", ", spec.z_range.second, ")"));
  }
  if (!(spec.x_range.first < spec.x_range.second)) {
    throw ConfigError(msg("generate_scenes: bad x_range (", spec.x_range.first, ", ", spec.x_range.second, ")"));
  }
  if (!(spec.yaw_range.first <= spec.yaw_range.second)) {
    throw ConfigError(msg("generate_scenes: bad yaw_range (", spec.yaw_range.first, ", ", spec.yaw_range.second, ")"));
  }
  if (!(spec.camera.f_u > 0) || !(spec.camera.f_v > 0)) {
    throw ConfigError("generate_scenes: camera focal lengths must be positive");
  }
  if (spec.image_width < 2 || spec.image_height < 2) {
    throw ConfigError(msg("generate_scenes: image ", spec.image_width, "x", spec.image_height, " too small"));
  }
}

/// Samples one fully visible box on the two-decimal grid, or throws
/// ConfigError once the attempt budget is spent.
LabelRecord sample_box(DeterministicRng& rng, const SyntheticSceneSpec& spec) {
  for (int attempt = 0; attempt < kMaxAttemptsPerBox; ++attempt) {
    const double W = round2(rng.normal(spec.w_mean, spec.w_stddev));
    const double H = round2(rng.normal(spec.h_mean, spec.h_stddev));
    const double L = round2(rng.normal(spec.l_mean, spec.l_stddev));
    const double x = round2(rng.uniform(spec.x_range.first, spec.x_range.second));
    const double y = round2(rng.normal(spec.y_mean, spec.y_stddev));
    const double z = round2(rng.uniform(spec.z_range.first, spec.z_range.second));
    const double r_y = round2(rng.uniform(spec.yaw_range.first, spec.yaw_range.second));
    if (W < 0.01 || H < 0.01 || L < 0.01 || z < 1.0) continue;

    Box3D box;
    Box2D projected;
    try {
      box = Box3D(W, H, L, Eigen::Vector3d(x, y, z), r_y);
      projected = project_box(box, spec.camera);
    } catch (const std::domain_error&) {
      continue;  // a corner behind the camera
    }
    if (projected.left() < 0 || projected.top() < 0 || projected.right() > spec.image_width - 1 ||
        projected.bottom() > spec.image_height - 1) {
      continue;
    }

    LabelRecord rec;
    rec.category = spec.category;
    rec.truncation = 0;
    rec.occlusion = 0;
    rec.alpha = alpha_from_ry(box.r_y, x, z);
    rec.left = projected.left();
    rec.top = projected.top();
    rec.right = projected.right();
    rec.bottom = projected.bottom();
    rec.dim_h = H;
    rec.dim_w = W;
    rec.dim_l = L;
    rec.x = x;
    rec.y = y;
    rec.z = z;
    rec.rotation_y = box.r_y;
    return rec;
  }
  throw ConfigError(msg("generate_scenes: rejection rate above 99.9% (", kMaxAttemptsPerBox,
                        " consecutive rejected samples); the scene spec cannot place visible boxes"));
}

}  // namespace

CameraIntrinsics kitti_like_camera() {
  CameraIntrinsics cam;
  cam.f_u = 721.5377;
  cam.f_v = 721.5377;
  cam.c_u = 609.5593;
  cam.c_v = 172.854;
  return cam;
}

std::vector<Frame> generate_scenes(const SyntheticSceneSpec& spec, int n_frames, int jobs) {
  validate_spec(spec);
  if (n_frames < 0) throw ConfigError(msg("generate_scenes: negative n_frames ", n_frames));
  std::vector<Frame> frames(static_cast<std::size_t>(n_frames));

  FrameCalib calib;
  calib.matrices["P2"] = Eigen::Matrix<double, 3, 4>(spec.camera.projection_matrix());
  calib.reference_key = "P2";
  calib.camera = spec.camera;

  parallel_for(frames.size(), jobs, [&](std::size_t f) {
    Frame& frame = frames[f];
    frame.id = static_cast<int>(f);
    frame.calib = calib;
    DeterministicRng rng(mix_seed(spec.seed, f));
    frame.labels.reserve(static_cast<std::size_t>(spec.boxes_per_frame));
    for (int b = 0; b < spec.boxes_per_frame; ++b) {
      frame.labels.push_back(sample_box(rng, spec));
    }
  });
  return frames;
}

MisalignmentReport misalignment_report(const std::vector<Frame>& frames, int image_width, int image_height) {
  MisalignmentReport report;
  const double inf = std::numeric_limits<double>::infinity();
  for (const auto& [lo, hi] : std::vector<std::pair<double, double>>{{0, 10}, {10, 20}, {20, 40}, {40, inf}}) {
    MisalignmentBucket b;
    b.range_lo = lo;
    b.range_hi = hi;
    report.buckets.push_back(b);
  }

  for (const Frame& frame : frames) {
    for (const LabelRecord& rec : frame.labels) {
      ++report.total;
      if (rec.ignorable() || !(rec.z > 0)) {
        ++report.skipped;
        continue;
      }
      Box2D projected;
      try {
        projected = project_box(to_box3d(rec), frame.calib.camera);
      } catch (const std::domain_error&) {
        ++report.skipped;
        continue;
      }
      MisalignmentBucket* bucket = &report.buckets.back();
      for (MisalignmentBucket& b : report.buckets) {
        if (rec.z > b.range_lo && rec.z <= b.range_hi) {
          bucket = &b;
          break;
        }
      }
      const bool truncated = rec.truncation > 0 || projected.left() < 0 || projected.top() < 0 ||
                             projected.right() > image_width - 1 || projected.bottom() > image_height - 1;
      if (truncated) {
        ++bucket->truncated;
        continue;
      }
      const Box2D annotated = rec.bbox();
      ++bucket->count;
      bucket->mean_iou += iou_2d(annotated, projected);
      bucket->mean_du += std::abs(annotated.u - projected.u);
      bucket->mean_dv += std::abs(annotated.v - projected.v);
      bucket->mean_dw += std::abs(annotated.w - projected.w);
      bucket->mean_dh += std::abs(annotated.h - projected.h);
    }
  }
  for (MisalignmentBucket& b : report.buckets) {
    if (b.count > 0) {
      b.mean_iou /= b.count;
      b.mean_du /= b.count;
      b.mean_dv /= b.count;
      b.mean_dw /= b.count;
      b.mean_dh /= b.count;
    }
  }
  return report;
}

DepthSpreadTable depth_spread_table(const std::vector<Frame>& frames, const std::vector<double>& h_centers,
                                    const std::vector<double>& H_centers, double h_tol, double H_tol,
                                    bool annotated_h) {
  DepthSpreadTable table;
  table.h_tol = h_tol;
  table.H_tol = H_tol;
  table.annotated_h = annotated_h;
  for (const double hc : h_centers) {
    DepthSpreadRow row;
    row.h_center = hc;
    for (const double Hc : H_centers) {
      DepthSpreadCell cell;
      cell.h_center = hc;
      cell.H_center = Hc;
      cell.min_z = std::numeric_limits<double>::infinity();
      cell.max_z = -std::numeric_limits<double>::infinity();
      row.cells.push_back(cell);
    }
    table.rows.push_back(row);
  }

  for (const Frame& frame : frames) {
    for (const LabelRecord& rec : frame.labels) {
      if (rec.ignorable() || !(rec.z > 0)) continue;
      double h = rec.bbox_height();
      if (!annotated_h) {
        try {
          h = project_box(to_box3d(rec), frame.calib.camera).h;
        } catch (const std::domain_error&) {
          continue;
        }
      }
      for (DepthSpreadRow& row : table.rows) {
        if (std::abs(h - row.h_center) > h_tol) continue;
        for (DepthSpreadCell& cell : row.cells) {
          if (std::abs(rec.dim_h - cell.H_center) > H_tol) continue;
          ++cell.count;
          cell.min_z = std::min(cell.min_z, rec.z);
          cell.max_z = std::max(cell.max_z, rec.z);
        }
      }
    }
  }

  for (DepthSpreadRow& row : table.rows) {
    for (DepthSpreadCell& cell : row.cells) {
      if (cell.count == 0) {
        cell.min_z = cell.max_z = cell.diff = 0;
        continue;
      }
      cell.diff = cell.max_z - cell.min_z;
      ++row.nonempty_cells;
      row.avg_max += cell.max_z;
      row.avg_min += cell.min_z;
      row.avg_diff += cell.diff;
    }
    if (row.nonempty_cells > 0) {
      row.avg_max /= row.nonempty_cells;
      row.avg_min /= row.nonempty_cells;
      row.avg_diff /= row.nonempty_cells;
    }
  }
  return table;
}

SweepResult sensitivity_sweep(double H, double h, const CameraIntrinsics& cam,
                              const std::vector<double>& beta_grid, const std::vector<double>& ry_grid,
                              double W, double L) {
  if (beta_grid.empty() || ry_grid.empty()) {
    throw std::invalid_argument("sensitivity_sweep: grids must be non-empty");
  }
  SweepResult result;
  result.cells.reserve(beta_grid.size() * ry_grid.size());
  result.min_z = std::numeric_limits<double>::infinity();
  result.max_z = -std::numeric_limits<double>::infinity();
  for (const double beta : beta_grid) {
    for (const double r_y : ry_grid) {
      SweepCell cell;
      cell.beta = beta;
      cell.r_y = r_y;
      cell.dz = delta_z_max(W, L, r_y);
      try {
        cell.z = depth_full(GeometryObservation{h, beta, H, cell.dz, cam.f_v});
        cell.ok = true;
        ++result.ok_count;
        result.min_z = std::min(result.min_z, cell.z);
        result.max_z = std::max(result.max_z, cell.z);
      } catch (const std::domain_error& e) {
        cell.error = e.what();
      }
      result.cells.push_back(std::move(cell));
    }
  }
  if (result.ok_count == 0) {
    result.min_z = result.max_z = result.spread = 0;
  } else {
    result.spread = result.max_z - result.min_z;
  }
  return result;
}

std::vector<double> uniform_grid(double lo, double hi, int points) {
  if (points < 1) throw std::invalid_argument(msg("uniform_grid: need at least one point, got ", points));
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(points));
  if (points == 1) {
    grid.push_back(lo);
    return grid;
  }
  for (int i = 0; i < points; ++i) {
    // Pin both endpoints so callers can rely on the bounds appearing verbatim.
    if (i == points - 1) {
      grid.push_back(hi);
    } else {
      grid.push_back(lo + (hi - lo) * i / (points - 1));
    }
  }
  return grid;
}

std::vector<double> default_beta_grid() { return uniform_grid(-0.05, 0.10, 16); }

std::vector<double> default_ry_grid() { return uniform_grid(-kPi<double>, kPi<double>, 64); }

}  // namespace geodepth
