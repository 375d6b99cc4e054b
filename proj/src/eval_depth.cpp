#include "geodepth/eval_depth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "geodepth/util.hpp"

namespace geodepth {

DepthErrorStats depth_errors(const std::vector<double>& pred, const std::vector<double>& gt) {
  if (pred.size() != gt.size()) {
    throw std::invalid_argument(msg("depth_errors: size mismatch ", pred.size(), " vs ", gt.size()));
  }
  if (pred.empty()) {
    throw std::invalid_argument("depth_errors: need at least one sample");
  }
  const double n = static_cast<double>(pred.size());
  double sum_d = 0;
  double sum_d2 = 0;
  double sum_abs_rel = 0;
  double sum_sq_rel = 0;
  double sum_inv_sq = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double p = pred[i];
    const double g = gt[i];
    if (!(p > 0) || !(g > 0)) {
      throw std::invalid_argument(msg("depth_errors: non-positive depth at index ", i, ": pred=", p, " gt=", g));
    }
    const double d = std::log(p) - std::log(g);
    sum_d += d;
    sum_d2 += d * d;
    sum_abs_rel += std::abs(p - g) / g;
    sum_sq_rel += (p - g) * (p - g) / g;
    const double di = 1.0 / p - 1.0 / g;
    sum_inv_sq += di * di;
  }
  DepthErrorStats s;
  s.count = static_cast<int>(pred.size());
  const double mean_d = sum_d / n;
  s.silog = 100.0 * std::sqrt(std::max(0.0, sum_d2 / n - mean_d * mean_d));
  s.abs_rel = 100.0 * (sum_abs_rel / n);
  s.sq_rel = 100.0 * (sum_sq_rel / n);
  s.irmse = 1000.0 * std::sqrt(sum_inv_sq / n);
  return s;
}

std::vector<DepthErrorStats> bucketed_depth_errors(const std::vector<DepthSample>& samples,
                                                   const std::vector<std::pair<double, double>>& ranges) {
  std::vector<DepthErrorStats> out;
  out.reserve(ranges.size());
  for (const auto& [lo, hi] : ranges) {
    if (!(hi > lo)) {
      throw std::invalid_argument(msg("bucketed_depth_errors: empty range (", lo, ", ", hi, "]"));
    }
    std::vector<double> pred;
    std::vector<double> gt;
    for (const DepthSample& s : samples) {
      if (s.gt_depth > lo && s.gt_depth <= hi) {
        pred.push_back(s.pred);
        gt.push_back(s.gt);
      }
    }
    DepthErrorStats stats;
    if (!pred.empty()) stats = depth_errors(pred, gt);
    stats.range_lo = lo;
    stats.range_hi = hi;
    out.push_back(stats);
  }
  return out;
}

}  // namespace geodepth
