#pragma once

#include <string>
#include <utility>
#include <vector>

#include "geodepth/box_geometry.hpp"
#include "geodepth/kitti_io.hpp"

namespace geodepth {

enum class Difficulty { easy, moderate, hard, ignored };

enum class EvalTask { detection2d, bev, detection3d };

const char* to_string(Difficulty d);
const char* to_string(EvalTask t);

/// Knobs of one AP evaluation run: the overlap threshold, the recall
/// grid density (11 or 40 positions), the difficulty tier, the overlap
/// kind, and the category under evaluation.
struct EvalConfig {
  double iou_threshold = 0.7;
  int recall_positions = 40;
  Difficulty difficulty = Difficulty::moderate;
  EvalTask task = EvalTask::detection3d;
  std::string category = "Car";
};

/// Outcome of one AP run: the average precision in percent, the
/// precision/recall sample after each detection in global score order,
/// and the final match counts at the all-detections cutoff.
struct APResult {
  double ap = 0;
  std::vector<std::pair<double, double>> pr_samples;  ///< (recall, precision)
  int matched = 0;          ///< true positives
  int unmatched_gts = 0;    ///< counted ground truths never matched
  int false_positives = 0;
  int counted_gts = 0;      ///< recall denominator
};

/// Axis-aligned intersection-over-union of two pixel rectangles.
/// Zero-area rectangles score 0 against everything.
double iou_2d(const Box2D& a, const Box2D& b);

/// Fraction of a's area covered by b; 0 when a is degenerate. This is
/// the overlap rule used to absorb detections into ignore regions.
double overlap_fraction(const Box2D& a, const Box2D& b);

/// Intersection-over-union of the rotated footprint rectangles in the
/// x-z plane (convex polygon clipping). Exactly the closed rectangle
/// form when both footprints are axis-aligned; boxes whose yaws differ
/// by a half turn have identical footprints.
double iou_bev(const Box3D& a, const Box3D& b);

/// Volumetric IoU: footprint intersection times vertical overlap, over
/// the volume union.
double iou_3d(const Box3D& a, const Box3D& b);

/// Difficulty tier of a ground-truth record: the strictest tier whose
/// 2D-height, occlusion, and truncation limits it satisfies
/// (easy: >= 40 px, occlusion 0, truncation <= 0.15;
///  moderate: >= 25 px, <= 1, <= 0.30;
///  hard: >= 25 px, <= 2, <= 0.50), or ignored when none fit.
/// Ignorable records are always ignored.
Difficulty assign_difficulty(const LabelRecord& rec);

/// Evaluates average precision over per-frame detection and ground-truth
/// lists (matching never crosses frames). Detections are processed in
/// descending score order, ties broken by input position; each detection
/// greedily claims the highest-overlap unclaimed counted ground truth at
/// or above the threshold. Detections that instead overlap an
/// out-of-tier ground truth of the evaluated category, or whose 2D box
/// lies inside an ignore region by overlap_fraction, are neutral.
/// AP is 100 times the mean of interpolated precision over the recall
/// grid. Every detection must carry a score.
APResult evaluate_ap_frames(const std::vector<std::vector<LabelRecord>>& dets_per_frame,
                            const std::vector<std::vector<LabelRecord>>& gts_per_frame, const EvalConfig& cfg);

/// Single-instance convenience wrapper around evaluate_ap_frames.
APResult evaluate_ap(const std::vector<LabelRecord>& dets, const std::vector<LabelRecord>& gts,
                     const EvalConfig& cfg);

/// The recall grid for AP: 11 points {0, 0.1, .., 1} or 40 points
/// {1/40, .., 1}.
std::vector<double> recall_grid(int positions);

}  // namespace geodepth
