#include "hdrprobe/metrics.hpp"

#include "hdrprobe/promote.hpp"

#include <cmath>

namespace hdrprobe {

void LossWeights::validate() const {
  if ((lambda_k < 0.0).any()) throw DomainError("LossWeights: BRDF weights must be non-negative");
  for (const double w : lambda_s) {
    if (w < 0.0) throw DomainError("LossWeights: scale weights must be non-negative");
  }
  if (!(gamma > 0.0)) throw DomainError("LossWeights: gamma must be positive");
  if (!(knee > 0.0 && knee < 1.0)) throw DomainError("LossWeights: knee must lie in (0, 1)");
}

namespace {

void check_pair(const SphereImage& rendered, const SphereImage& reference) {
  if (rendered.resolution() != reference.resolution()) {
    throw DomainError("rec_loss: rendered and reference resolutions differ");
  }
  if (rendered.encoding() != Encoding::LinearHDR || reference.encoding() != Encoding::GammaLDR) {
    throw DomainError("rec_loss: expects a linear render and a gamma-encoded reference");
  }
}

double normalizer(const BallGrid& grid) { return 1.0 / (double(grid.masked_count()) * kChannels); }

}  // namespace

double rec_loss_single(const SphereImage& rendered, const SphereImage& reference, const LossWeights& weights) {
  check_pair(rendered, reference);
  const BallGrid& grid = rendered.grid();
  const double inv_gamma = 1.0 / weights.gamma;
  double sum = 0.0;
  for (const auto pixel : grid.masked_cells()) {
    for (int c = 0; c < kChannels; ++c) {
      const double predicted = std::pow(soft_clip(rendered.pixels()(pixel, c), weights.knee).first, inv_gamma);
      const double target = soft_clip(reference.pixels()(pixel, c), weights.knee).first;
      sum += std::abs(predicted - target);
    }
  }
  return sum * normalizer(grid);
}

double rec_loss(const BrdfImages& rendered, const BrdfImages& reference, const LossWeights& weights) {
  if (rendered.size() != kProbeBrdfs.size() || reference.size() != kProbeBrdfs.size()) {
    throw DomainError("rec_loss: expected one image per probe BRDF");
  }
  double total = 0.0;
  for (std::size_t k = 0; k < rendered.size(); ++k) {
    total += weights.lambda_k(Eigen::Index(k)) * rec_loss_single(rendered[k], reference[k], weights);
  }
  return total;
}

double msrec_loss(const std::vector<BrdfImages>& rendered, const std::vector<BrdfImages>& reference,
                  const LossWeights& weights) {
  if (rendered.size() != reference.size()) {
    throw DomainError("msrec_loss: rendered and reference pyramids have different scale counts");
  }
  if (!weights.lambda_s.empty() && weights.lambda_s.size() != rendered.size()) {
    throw DomainError("msrec_loss: scale weight count does not match the pyramid");
  }
  double total = 0.0;
  for (std::size_t s = 0; s < rendered.size(); ++s) {
    total += weights.scale_weight(s) * rec_loss(rendered[s], reference[s], weights);
  }
  return total;
}

std::vector<BrdfImages> render_probe_pyramid(const FieldPyramid& fields, const LightEnv& env) {
  std::vector<BrdfImages> out;
  const auto envs = env_pyramid(env, fields.scales());
  for (std::size_t s = 0; s < fields.levels.size(); ++s) {
    BrdfImages level;
    for (const Brdf brdf : kProbeBrdfs) level.push_back(render(fields.levels[s].get(brdf), envs[s]));
    out.push_back(std::move(level));
  }
  return out;
}

std::vector<BrdfImages> reference_pyramid(const FieldPyramid& fields, const LightEnv& env, double gamma) {
  auto out = render_probe_pyramid(fields, env);
  for (auto& level : out) {
    for (auto& img : level) img = encode_gamma(img, gamma);
  }
  return out;
}

LossGradient loss_gradient(const LogLightEnv& q, const FieldPyramid& fields,
                           const std::vector<BrdfImages>& reference, const LossWeights& weights) {
  if (reference.size() != fields.levels.size()) {
    throw DomainError("loss_gradient: reference pyramid does not match field pyramid");
  }
  const LightEnv env = q.to_linear();
  const BallGrid& fine = env.grid();
  const int res = fine.resolution();
  const auto scales = fields.scales();
  const auto envs = env_pyramid(env, scales);
  const double inv_gamma = 1.0 / weights.gamma;

  LossGradient out;
  RadianceMat d_env = RadianceMat::Zero(fine.cell_count(), kChannels);
  for (std::size_t s = 0; s < scales.size(); ++s) {
    const int coarse_res = scales[s];
    const int factor = res / coarse_res;
    RadianceMat d_coarse = RadianceMat::Zero(envs[s].grid().cell_count(), kChannels);

    for (std::size_t k = 0; k < kProbeBrdfs.size(); ++k) {
      const ReflectanceField& field = fields.levels[s].get(kProbeBrdfs[k]);
      const SphereImage rendered = render(field, envs[s]);
      const SphereImage& ref = reference[s].at(k);
      check_pair(rendered, ref);
      const BallGrid& sphere = rendered.grid();
      const double coef = weights.scale_weight(s) * weights.lambda_k(Eigen::Index(k)) * normalizer(sphere);

      RadianceMat d_img = RadianceMat::Zero(sphere.cell_count(), kChannels);
      double loss = 0.0;
      for (const auto pixel : sphere.masked_cells()) {
        for (int c = 0; c < kChannels; ++c) {
          const auto [soft, soft_slope] = soft_clip(rendered.pixels()(pixel, c), weights.knee);
          const double predicted = std::pow(soft, inv_gamma);
          const double diff = predicted - soft_clip(ref.pixels()(pixel, c), weights.knee).first;
          loss += std::abs(diff);
          if (diff == 0.0 || soft <= 0.0) continue;
          const double sign = diff > 0.0 ? 1.0 : -1.0;
          d_img(pixel, c) = coef * sign * inv_gamma * predicted / soft * soft_slope;
        }
      }
      out.loss += coef * loss;
      for (int c = 0; c < kChannels; ++c) {
        d_coarse.col(c).noalias() += field.weights(c).transpose() * d_img.col(c);
      }
    }

    // Back through the masked box filter.
    const BallGrid& coarse = envs[s].grid();
    for (const auto coarse_cell : coarse.masked_cells()) {
      const auto row0 = (coarse_cell / coarse_res) * factor;
      const auto col0 = (coarse_cell % coarse_res) * factor;
      std::vector<Eigen::Index> members;
      for (int dr = 0; dr < factor; ++dr) {
        for (int dc = 0; dc < factor; ++dc) {
          const auto cell = (row0 + dr) * res + (col0 + dc);
          if (fine.masked(cell)) members.push_back(cell);
        }
      }
      for (const auto cell : members) d_env.row(cell) += d_coarse.row(coarse_cell) / double(members.size());
    }
  }
  out.dq = d_env.cwiseProduct(env.radiance());
  return out;
}

Eigen::Array3d relative_radiance_diff(const LightEnv& gt, const LightEnv& pred) {
  if (gt.resolution() != pred.resolution()) {
    throw DomainError("relative_radiance_diff: resolutions differ");
  }
  const Eigen::Array3d total_gt = gt.total_radiance();
  if ((total_gt <= 0.0).any()) {
    throw DegenerateInputError("relative_radiance_diff: ground truth has zero radiance in a channel");
  }
  return (total_gt - pred.total_radiance()) / total_gt;
}

}  // namespace hdrprobe
