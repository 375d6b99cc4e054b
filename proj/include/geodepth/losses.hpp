#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "geodepth/util.hpp"

namespace geodepth {

/// Exponents of the focal classification loss. alpha_f sharpens the
/// down-weighting of easy examples; beta_f softens the penalty near
/// positive locations. Names carry the _f suffix to keep them apart from
/// the geometric angles alpha and beta.
template <typename T>
struct FocalConfigT {
  T alpha_f = T(2);
  T beta_f = T(4);
};

using FocalConfig = FocalConfigT<double>;

template <typename T>
struct FocalResultT {
  T loss{};
  T d_loss_d_p{};
};

using FocalResult = FocalResultT<double>;

/// Focal classification loss for one location with soft target y:
///
///   y = 1:  L = -(1-p)^alpha_f log(p)
///   y < 1:  L = -(1-y)^beta_f p^alpha_f log(1-p)
///
/// Returns the loss and its analytic partial with respect to p.
template <typename T>
FocalResultT<T> focal_variant(T p, T y, const FocalConfigT<T>& cfg = {}) {
  if (!(y >= T(0)) || !(y <= T(1))) {
    throw std::domain_error(msg("focal_variant: target ", y, " outside [0, 1]"));
  }
  FocalResultT<T> out;
  if (y == T(1)) {
    if (!(p > T(0)) || !(p <= T(1))) {
      throw std::domain_error(msg("focal_variant: p=", p, " outside (0, 1] for a positive target"));
    }
    const T q = T(1) - p;
    out.loss = -std::pow(q, cfg.alpha_f) * std::log(p);
    out.d_loss_d_p = cfg.alpha_f * std::pow(q, cfg.alpha_f - T(1)) * std::log(p) - std::pow(q, cfg.alpha_f) / p;
  } else {
    if (!(p >= T(0)) || !(p < T(1))) {
      throw std::domain_error(msg("focal_variant: p=", p, " outside [0, 1) for a non-positive target"));
    }
    const T w = std::pow(T(1) - y, cfg.beta_f);
    out.loss = -w * std::pow(p, cfg.alpha_f) * std::log(T(1) - p);
    out.d_loss_d_p =
        -w * (cfg.alpha_f * std::pow(p, cfg.alpha_f - T(1)) * std::log(T(1) - p) - std::pow(p, cfg.alpha_f) / (T(1) - p));
  }
  return out;
}

/// Depth prediction paired with its predicted noise scale.
template <typename T>
struct UncertainDepthPredictionT {
  T d_pred{};
  T sigma{};
};

using UncertainDepthPrediction = UncertainDepthPredictionT<double>;

template <typename T>
struct UncertaintyL1ResultT {
  T loss{};
  T d_loss_d_pred{};
  T d_loss_d_sigma{};
};

using UncertaintyL1Result = UncertaintyL1ResultT<double>;

/// Uncertainty-weighted L1 depth loss:
///
///   L = (sqrt(2)/sigma) |d_gt - d_pred| + log(sigma)
///
/// For a fixed residual e the loss is stationary in sigma exactly at
/// sigma = sqrt(2)|e|. The residual partial uses sign(0) = 0 at the
/// non-smooth point.
template <typename T>
UncertaintyL1ResultT<T> uncertainty_l1(const UncertainDepthPredictionT<T>& pred, T d_gt) {
  if (!(pred.sigma > T(0))) {
    throw std::domain_error(msg("uncertainty_l1: sigma must be positive, got ", pred.sigma));
  }
  const T sqrt2 = std::sqrt(T(2));
  const T e = d_gt - pred.d_pred;
  const T abs_e = std::abs(e);
  const T sign_e = (e > T(0)) ? T(1) : (e < T(0)) ? T(-1) : T(0);
  UncertaintyL1ResultT<T> out;
  out.loss = sqrt2 * abs_e / pred.sigma + std::log(pred.sigma);
  out.d_loss_d_pred = -sqrt2 * sign_e / pred.sigma;
  out.d_loss_d_sigma = -sqrt2 * abs_e / (pred.sigma * pred.sigma) + T(1) / pred.sigma;
  return out;
}

/// Loss weights for the 2D and 3D regression terms.
template <typename T>
struct LossWeightsT {
  T lambda1 = T(1);
  T lambda2 = T(1);
};

using LossWeights = LossWeightsT<double>;

/// Total objective: classification plus weighted 2D and 3D terms.
template <typename T>
T total_loss(T l_c, T l_2d, T l_3d, const LossWeightsT<T>& w = {}) {
  return l_c + w.lambda1 * l_2d + w.lambda2 * l_3d;
}

/// Plain absolute-error term used by the 2D/3D box regressions.
template <typename T>
T l1_term(T pred, T target) {
  return std::abs(pred - target);
}

/// Mean absolute error over paired vectors, the reduction applied to the
/// packed box-regression targets.
template <typename T>
T mean_absolute_error(const std::vector<T>& pred, const std::vector<T>& target) {
  if (pred.size() != target.size()) {
    throw std::invalid_argument(
        msg("mean_absolute_error: size mismatch ", pred.size(), " vs ", target.size()));
  }
  if (pred.empty()) return T(0);
  T sum = T(0);
  for (std::size_t i = 0; i < pred.size(); ++i) sum += std::abs(pred[i] - target[i]);
  return sum / static_cast<T>(pred.size());
}

}  // namespace geodepth
