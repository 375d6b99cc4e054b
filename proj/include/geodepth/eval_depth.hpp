#pragma once

#include <limits>
#include <utility>
#include <vector>

namespace geodepth {

/// The four standard depth-error metrics over one sample set, with the
/// customary scaling: silog and the relative errors are x100, irmse is
/// x1000 (per kilometer of inverse depth). range is the (lo, hi]
/// ground-truth depth interval the samples were drawn from.
struct DepthErrorStats {
  double silog = 0;
  double abs_rel = 0;
  double sq_rel = 0;
  double irmse = 0;
  int count = 0;
  double range_lo = 0;
  double range_hi = std::numeric_limits<double>::infinity();
};

/// Computes the metrics over paired positive depths:
///   with d = log(pred) - log(gt):
///     silog  = 100 sqrt(mean(d^2) - mean(d)^2)
///     absRel = 100 mean(|pred - gt| / gt)
///     sqRel  = 100 mean((pred - gt)^2 / gt)
///     iRMSE  = 1000 sqrt(mean((1/pred - 1/gt)^2))
/// Lengths must match and be at least 1; every depth must be positive.
DepthErrorStats depth_errors(const std::vector<double>& pred, const std::vector<double>& gt);

/// One evaluation sample: predicted and true depth, plus the depth used
/// for range bucketing (normally equal to gt).
struct DepthSample {
  double pred = 0;
  double gt = 0;
  double gt_depth = 0;
};

/// Metrics per range over the samples whose gt_depth falls in (lo, hi].
/// Ranges may overlap (the cumulative 0-10/0-20/0-30/0-40 m convention);
/// empty ranges report count 0 with zero metrics.
std::vector<DepthErrorStats> bucketed_depth_errors(const std::vector<DepthSample>& samples,
                                                   const std::vector<std::pair<double, double>>& ranges);

}  // namespace geodepth
