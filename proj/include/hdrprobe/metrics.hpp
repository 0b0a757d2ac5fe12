#pragma once

#include "hdrprobe/relight.hpp"

#include <utility>
#include <vector>

namespace hdrprobe {

/// Differentiable saturation: identity up to the knee, then the quadratic
/// Hermite segment k + t - t^2 / (4 (1 - k)) (t = x - k) that leaves the knee
/// with slope 1 and reaches 1 with slope 0 at x = 2 - k; constant 1 beyond.
/// Returns (value, derivative).
template <typename Scalar>
std::pair<Scalar, Scalar> soft_clip(Scalar x, Scalar knee = Scalar(0.9)) {
  if (x <= knee) return {x, Scalar(1)};
  const Scalar span = Scalar(1) - knee;
  const Scalar t = x - knee;
  if (t >= Scalar(2) * span) return {Scalar(1), Scalar(0)};
  return {knee + t - t * t / (Scalar(4) * span), Scalar(1) - t / (Scalar(2) * span)};
}

/// Loss weights. Per-BRDF weights are ordered as kProbeBrdfs
/// (mirror, diffuse, silver).
struct LossWeights {
  Eigen::Array3d lambda_k{0.2, 0.6, 0.2};
  /// Per-scale weights; empty means 1 for every scale.
  std::vector<double> lambda_s;
  double gamma = 2.2;
  double knee = 0.9;

  double scale_weight(std::size_t s) const { return lambda_s.empty() ? 1.0 : lambda_s.at(s); }
  void validate() const;
};

/// Images for each probe BRDF, ordered as kProbeBrdfs.
using BrdfImages = std::vector<SphereImage>;

/// Mean over valid pixels and channels of |soft(rendered)^(1/gamma) - soft(reference)|.
double rec_loss_single(const SphereImage& rendered, const SphereImage& reference, const LossWeights& weights);

/// sum_k lambda_k rec_loss_single(rendered_k, reference_k).
double rec_loss(const BrdfImages& rendered, const BrdfImages& reference, const LossWeights& weights);

/// sum_s lambda_s rec_loss at scale s; pyramids are indexed [scale][brdf].
double msrec_loss(const std::vector<BrdfImages>& rendered, const std::vector<BrdfImages>& reference,
                  const LossWeights& weights);

/// Renders every probe BRDF at every pyramid level from one full-resolution
/// environment.
std::vector<BrdfImages> render_probe_pyramid(const FieldPyramid& fields, const LightEnv& env);

/// Gamma-encoded references (clip at 1, then x^(1/gamma)) for every level.
std::vector<BrdfImages> reference_pyramid(const FieldPyramid& fields, const LightEnv& env, double gamma);

struct LossGradient {
  double loss = 0;
  /// d loss / d q per fine cell and channel; zero outside the mask.
  RadianceMat dq;
};

/// msrec_loss of the environment exp(q) and its analytic gradient with
/// respect to q. The L1 subgradient at an exact tie is 0.
LossGradient loss_gradient(const LogLightEnv& q, const FieldPyramid& fields,
                           const std::vector<BrdfImages>& reference, const LossWeights& weights);

/// (sum gt - sum pred) / sum gt per channel, over valid cells.
Eigen::Array3d relative_radiance_diff(const LightEnv& gt, const LightEnv& pred);

}  // namespace hdrprobe
