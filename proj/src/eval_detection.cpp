#include "geodepth/eval_detection.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "geodepth/util.hpp"

namespace geodepth {
namespace {

struct Vec2 {
  double x = 0;
  double z = 0;
};

double signed_area(const std::vector<Vec2>& poly) {
  double twice = 0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    twice += p.x * q.z - q.x * p.z;
  }
  return twice / 2;
}

/// Footprint corners in the x-z plane, counterclockwise. Yaw is folded
/// into [-pi/2, pi/2) first; a rectangle is invariant under a half-turn,
/// and the fold makes footprints of yaws 0 and pi (and the axis-aligned
/// fast path below) bit-identical.
std::vector<Vec2> footprint(const Box3D& box) {
  double a = normalize_angle(box.r_y);
  if (a >= kPi<double> / 2) {
    a -= kPi<double>;
  } else if (a < -kPi<double> / 2) {
    a += kPi<double>;
  }
  const double c = std::cos(a);
  const double s = std::sin(a);
  const double hx = box.L / 2;
  const double hz = box.W / 2;
  // Perimeter order in the object frame; the rotation below reverses
  // orientation (it mirrors), so the result is re-oriented afterwards.
  const std::array<Vec2, 4> base = {{{hx, hz}, {hx, -hz}, {-hx, -hz}, {-hx, hz}}};
  std::vector<Vec2> poly(4);
  for (int i = 0; i < 4; ++i) {
    poly[i].x = box.bottom_center.x() + base[i].x * c + base[i].z * s;
    poly[i].z = box.bottom_center.z() + base[i].x * s - base[i].z * c;
  }
  if (signed_area(poly) < 0) std::reverse(poly.begin(), poly.end());
  return poly;
}

/// Clips a convex polygon against the half-plane left of edge a->b.
std::vector<Vec2> clip_edge(const std::vector<Vec2>& poly, const Vec2& a, const Vec2& b) {
  std::vector<Vec2> out;
  out.reserve(poly.size() + 1);
  const auto side = [&](const Vec2& p) {
    return (b.x - a.x) * (p.z - a.z) - (b.z - a.z) * (p.x - a.x);
  };
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    const double sp = side(p);
    const double sq = side(q);
    if (sp >= 0) out.push_back(p);
    if ((sp > 0 && sq < 0) || (sp < 0 && sq > 0)) {
      const double t = sp / (sp - sq);
      out.push_back({p.x + t * (q.x - p.x), p.z + t * (q.z - p.z)});
    }
  }
  return out;
}

double intersection_area(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  std::vector<Vec2> poly = a;
  for (std::size_t i = 0; i < b.size() && !poly.empty(); ++i) {
    poly = clip_edge(poly, b[i], b[(i + 1) % b.size()]);
  }
  if (poly.size() < 3) return 0;
  return std::max(0.0, signed_area(poly));
}

/// Axis-aligned detection: yields the exact x/z half extents when the
/// folded yaw is exactly 0 (length along x) or exactly -pi/2 (footprint
/// swapped by a quarter turn), and false otherwise. Catching the quarter
/// turn by angle value matters because cos(pi/2) is not exactly zero in
/// floating point.
bool footprint_axis_aligned(const Box3D& box, double& half_x, double& half_z) {
  double a = normalize_angle(box.r_y);
  if (a >= kPi<double> / 2) {
    a -= kPi<double>;
  } else if (a < -kPi<double> / 2) {
    a += kPi<double>;
  }
  if (std::sin(a) == 0.0) {
    half_x = box.L / 2;
    half_z = box.W / 2;
    return true;
  }
  if (a == -kPi<double> / 2) {
    half_x = box.W / 2;
    half_z = box.L / 2;
    return true;
  }
  return false;
}

double axis_aligned_rect_intersection(double ax, double az, double ahx, double ahz, double bx, double bz,
                                      double bhx, double bhz) {
  const double ix = std::min(ax + ahx, bx + bhx) - std::max(ax - ahx, bx - bhx);
  const double iz = std::min(az + ahz, bz + bhz) - std::max(az - ahz, bz - bhz);
  if (ix <= 0 || iz <= 0) return 0;
  return ix * iz;
}

double bev_intersection_area(const Box3D& a, const Box3D& b) {
  double ahx, ahz, bhx, bhz;
  if (footprint_axis_aligned(a, ahx, ahz) && footprint_axis_aligned(b, bhx, bhz)) {
    return axis_aligned_rect_intersection(a.bottom_center.x(), a.bottom_center.z(), ahx, ahz,
                                          b.bottom_center.x(), b.bottom_center.z(), bhx, bhz);
  }
  return intersection_area(footprint(a), footprint(b));
}

struct FrameGroups {
  std::vector<const LabelRecord*> counted;
  std::vector<const LabelRecord*> out_of_tier;  ///< evaluated category, wrong tier
  std::vector<const LabelRecord*> regions;      ///< ignorable records, 2D absorption
};

FrameGroups group_ground_truths(const std::vector<LabelRecord>& gts, const EvalConfig& cfg) {
  FrameGroups g;
  for (const LabelRecord& gt : gts) {
    if (gt.ignorable()) {
      g.regions.push_back(&gt);
    } else if (gt.category == cfg.category) {
      const Difficulty d = assign_difficulty(gt);
      const bool counted =
          d != Difficulty::ignored && static_cast<int>(d) <= static_cast<int>(cfg.difficulty);
      (counted ? g.counted : g.out_of_tier).push_back(&gt);
    }
  }
  return g;
}

double task_overlap(const LabelRecord& det, const LabelRecord& gt, EvalTask task) {
  if (task == EvalTask::detection2d) return iou_2d(det.bbox(), gt.bbox());
  if (det.ignorable() || gt.ignorable()) return 0;
  const Box3D a = to_box3d(det);
  const Box3D b = to_box3d(gt);
  return task == EvalTask::bev ? iou_bev(a, b) : iou_3d(a, b);
}

void validate_config(const EvalConfig& cfg) {
  if (!(cfg.iou_threshold > 0) || !(cfg.iou_threshold <= 1)) {
    throw std::invalid_argument(msg("evaluate_ap: iou_threshold ", cfg.iou_threshold, " outside (0, 1]"));
  }
  if (cfg.recall_positions != 11 && cfg.recall_positions != 40) {
    throw std::invalid_argument(msg("evaluate_ap: recall_positions must be 11 or 40, got ", cfg.recall_positions));
  }
  if (cfg.difficulty == Difficulty::ignored) {
    throw std::invalid_argument("evaluate_ap: cannot evaluate the 'ignored' tier");
  }
}

}  // namespace

const char* to_string(Difficulty d) {
  switch (d) {
    case Difficulty::easy: return "easy";
    case Difficulty::moderate: return "moderate";
    case Difficulty::hard: return "hard";
    default: return "ignored";
  }
}

const char* to_string(EvalTask t) {
  switch (t) {
    case EvalTask::detection2d: return "2d";
    case EvalTask::bev: return "bev";
    default: return "3d";
  }
}

double iou_2d(const Box2D& a, const Box2D& b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.left(), b.left());
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top());
  if (iw <= 0 || ih <= 0) return 0;
  const double inter = iw * ih;
  const double uni = a.w * a.h + b.w * b.h - inter;
  if (uni <= 0) return 0;
  return inter / uni;
}

double overlap_fraction(const Box2D& a, const Box2D& b) {
  const double area = a.w * a.h;
  if (area <= 0) return 0;
  const double iw = std::min(a.right(), b.right()) - std::max(a.left(), b.left());
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top());
  if (iw <= 0 || ih <= 0) return 0;
  return iw * ih / area;
}

double iou_bev(const Box3D& a, const Box3D& b) {
  const double area_a = a.W * a.L;
  const double area_b = b.W * b.L;
  if (area_a <= 0 || area_b <= 0) return 0;
  const double inter = bev_intersection_area(a, b);
  const double uni = area_a + area_b - inter;
  if (uni <= 0) return 0;
  return inter / uni;
}

double iou_3d(const Box3D& a, const Box3D& b) {
  const double vol_a = a.W * a.L * a.H;
  const double vol_b = b.W * b.L * b.H;
  if (vol_a <= 0 || vol_b <= 0) return 0;
  const double overlap_y =
      std::min(a.bottom_center.y(), b.bottom_center.y()) -
      std::max(a.bottom_center.y() - a.H, b.bottom_center.y() - b.H);
  if (overlap_y <= 0) return 0;
  const double inter = bev_intersection_area(a, b) * overlap_y;
  const double uni = vol_a + vol_b - inter;
  if (uni <= 0) return 0;
  return inter / uni;
}

Difficulty assign_difficulty(const LabelRecord& rec) {
  if (rec.ignorable()) return Difficulty::ignored;
  static constexpr double kMinHeight[3] = {40, 25, 25};
  static constexpr int kMaxOcclusion[3] = {0, 1, 2};
  static constexpr double kMaxTruncation[3] = {0.15, 0.30, 0.50};
  const double h = rec.bbox_height();
  for (int t = 0; t < 3; ++t) {
    if (h >= kMinHeight[t] && rec.occlusion <= kMaxOcclusion[t] && rec.truncation <= kMaxTruncation[t]) {
      return static_cast<Difficulty>(t);
    }
  }
  return Difficulty::ignored;
}

std::vector<double> recall_grid(int positions) {
  if (positions != 11 && positions != 40) {
    throw std::invalid_argument(msg("recall_grid: must be 11 or 40, got ", positions));
  }
  std::vector<double> grid;
  if (positions == 11) {
    for (int i = 0; i <= 10; ++i) grid.push_back(i / 10.0);
  } else {
    for (int i = 1; i <= 40; ++i) grid.push_back(i / 40.0);
  }
  return grid;
}

APResult evaluate_ap_frames(const std::vector<std::vector<LabelRecord>>& dets_per_frame,
                            const std::vector<std::vector<LabelRecord>>& gts_per_frame, const EvalConfig& cfg) {
  validate_config(cfg);
  if (dets_per_frame.size() != gts_per_frame.size()) {
    throw std::invalid_argument(msg("evaluate_ap: ", dets_per_frame.size(), " detection frames vs ",
                                    gts_per_frame.size(), " ground-truth frames"));
  }

  struct DetRef {
    std::size_t frame;
    std::size_t index;
    const LabelRecord* rec;
  };
  std::vector<DetRef> dets;
  for (std::size_t f = 0; f < dets_per_frame.size(); ++f) {
    for (std::size_t i = 0; i < dets_per_frame[f].size(); ++i) {
      const LabelRecord& rec = dets_per_frame[f][i];
      if (rec.category != cfg.category) continue;
      if (!rec.score || !std::isfinite(*rec.score)) {
        throw std::invalid_argument(
            msg("evaluate_ap: detection ", i, " in frame ", f, " has no usable score"));
      }
      dets.push_back({f, i, &rec});
    }
  }
  std::stable_sort(dets.begin(), dets.end(),
                   [](const DetRef& a, const DetRef& b) { return *a.rec->score > *b.rec->score; });

  std::vector<FrameGroups> groups;
  groups.reserve(gts_per_frame.size());
  APResult result;
  for (const auto& gts : gts_per_frame) {
    groups.push_back(group_ground_truths(gts, cfg));
    result.counted_gts += static_cast<int>(groups.back().counted.size());
  }

  std::vector<std::vector<bool>> counted_claimed(groups.size());
  std::vector<std::vector<bool>> out_claimed(groups.size());
  for (std::size_t f = 0; f < groups.size(); ++f) {
    counted_claimed[f].assign(groups[f].counted.size(), false);
    out_claimed[f].assign(groups[f].out_of_tier.size(), false);
  }

  if (result.counted_gts == 0) {
    // Recall is undefined without counted ground truths; the run scores 0.
    return result;
  }

  int tp = 0;
  int fp = 0;
  result.pr_samples.reserve(dets.size());
  for (const DetRef& det : dets) {
    FrameGroups& g = groups[det.frame];
    // Best-overlap unclaimed counted ground truth at or above threshold.
    int best = -1;
    double best_overlap = 0;
    for (std::size_t j = 0; j < g.counted.size(); ++j) {
      if (counted_claimed[det.frame][j]) continue;
      const double ov = task_overlap(*det.rec, *g.counted[j], cfg.task);
      if (ov >= cfg.iou_threshold && ov > best_overlap) {
        best = static_cast<int>(j);
        best_overlap = ov;
      }
    }
    if (best >= 0) {
      counted_claimed[det.frame][static_cast<std::size_t>(best)] = true;
      ++tp;
    } else {
      // Neutral if it claims an out-of-tier ground truth or sits inside
      // an ignore region; otherwise a false positive.
      best_overlap = 0;
      for (std::size_t j = 0; j < g.out_of_tier.size(); ++j) {
        if (out_claimed[det.frame][j]) continue;
        const double ov = task_overlap(*det.rec, *g.out_of_tier[j], cfg.task);
        if (ov >= cfg.iou_threshold && ov > best_overlap) {
          best = static_cast<int>(j);
          best_overlap = ov;
        }
      }
      if (best >= 0) {
        out_claimed[det.frame][static_cast<std::size_t>(best)] = true;
      } else {
        bool absorbed = false;
        for (const LabelRecord* region : g.regions) {
          if (overlap_fraction(det.rec->bbox(), region->bbox()) >= cfg.iou_threshold) {
            absorbed = true;
            break;
          }
        }
        if (!absorbed) ++fp;
      }
    }
    const double recall = static_cast<double>(tp) / result.counted_gts;
    const double precision = (tp + fp) > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    result.pr_samples.emplace_back(recall, precision);
  }

  result.matched = tp;
  result.false_positives = fp;
  result.unmatched_gts = result.counted_gts - tp;

  double sum = 0;
  for (const double r : recall_grid(cfg.recall_positions)) {
    double best_prec = 0;
    for (const auto& [recall, precision] : result.pr_samples) {
      if (recall >= r) best_prec = std::max(best_prec, precision);
    }
    sum += best_prec;
  }
  result.ap = 100.0 * sum / static_cast<double>(cfg.recall_positions);
  return result;
}

APResult evaluate_ap(const std::vector<LabelRecord>& dets, const std::vector<LabelRecord>& gts,
                     const EvalConfig& cfg) {
  return evaluate_ap_frames({dets}, {gts}, cfg);
}

}  // namespace geodepth
