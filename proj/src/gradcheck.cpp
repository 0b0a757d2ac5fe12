#include "hdrprobe/gradcheck.hpp"

#include "hdrprobe/synth.hpp"

#include <cmath>
#include <random>

namespace hdrprobe {

namespace {

struct LevelState {
  int resolution = 0;
  int factor = 1;
  LightEnv env;
  std::vector<SphereImage> rendered;
  std::vector<Eigen::Index> member_count;  // valid fine cells per coarse cell
};

}  // namespace

GradCheckReport finite_difference_check(const LogLightEnv& q, const FieldPyramid& fields,
                                        const std::vector<BrdfImages>& reference, const LossWeights& weights,
                                        const GradCheckOptions& options) {
  const LightEnv env = q.to_linear();
  const BallGrid& fine = env.grid();
  const int res = fine.resolution();
  const auto scales = fields.scales();
  const double inv_gamma = 1.0 / weights.gamma;

  GradCheckReport report;
  const LossGradient analytic = loss_gradient(q, fields, reference, weights);
  report.loss = analytic.loss;
  report.analytic_gradient = analytic.dq;
  report.fd_gradient = RadianceMat::Zero(fine.cell_count(), kChannels);

  std::vector<LevelState> levels;
  for (std::size_t s = 0; s < scales.size(); ++s) {
    LevelState level{scales[s], res / scales[s], downsample_env(env, res / scales[s]), {}, {}};
    for (const Brdf brdf : kProbeBrdfs) level.rendered.push_back(render(fields.levels[s].get(brdf), level.env));
    level.member_count.assign(std::size_t(level.env.grid().cell_count()), 0);
    for (const auto cell : fine.masked_cells()) {
      const auto coarse = (cell / res / level.factor) * level.resolution + (cell % res) / level.factor;
      ++level.member_count[std::size_t(coarse)];
    }
    levels.push_back(std::move(level));
  }

  auto residual = [&](double rendered, double ref) {
    return std::pow(soft_clip(rendered, weights.knee).first, inv_gamma) - soft_clip(ref, weights.knee).first;
  };

  for (const auto cell : fine.masked_cells()) {
    for (int c = 0; c < kChannels; ++c) {
      const double qv = q.q()(cell, c);
      const double delta_plus = std::exp(qv + options.h) - std::exp(qv);
      const double delta_minus = std::exp(qv - options.h) - std::exp(qv);
      double change = 0.0;  // loss(q + h) - loss(q - h)
      bool smooth = true;

      for (std::size_t s = 0; s < levels.size(); ++s) {
        const LevelState& level = levels[s];
        const auto coarse = (cell / res / level.factor) * level.resolution + (cell % res) / level.factor;
        if (!level.env.grid().masked(coarse)) continue;
        const double share = 1.0 / double(level.member_count[std::size_t(coarse)]);
        for (std::size_t k = 0; k < kProbeBrdfs.size(); ++k) {
          const ReflectanceField& field = fields.levels[s].get(kProbeBrdfs[k]);
          const auto& column = field.weights(c).col(coarse);
          const SphereImage& base = level.rendered[k];
          const SphereImage& ref = reference[s].at(k);
          const double coef = weights.scale_weight(s) * weights.lambda_k(Eigen::Index(k)) /
                              (double(base.grid().masked_count()) * kChannels);
          for (const auto pixel : base.grid().masked_cells()) {
            const double w = column(pixel);
            if (w == 0.0) continue;
            const double x = base.pixels()(pixel, c);
            const double r = ref.pixels()(pixel, c);
            const double plus = residual(x + w * share * delta_plus, r);
            const double minus = residual(x + w * share * delta_minus, r);
            if ((plus > 0.0) != (minus > 0.0) || plus == 0.0 || minus == 0.0) smooth = false;
            change += coef * (std::abs(plus) - std::abs(minus));
          }
        }
      }

      if (!smooth) {
        ++report.cells_skipped_nonsmooth;
        continue;
      }
      const double fd = change / (2.0 * options.h);
      report.fd_gradient(cell, c) = fd;
      const double g = analytic.dq(cell, c);
      if (std::abs(g) > options.grad_floor) {
        ++report.cells_checked;
        report.max_rel_error = std::max(report.max_rel_error, std::abs(fd - g) / std::abs(g));
      }
    }
  }
  return report;
}

GradCheckProblem make_gradcheck_problem(std::uint64_t seed, const FieldPyramid& fields, double gamma) {
  const int res = fields.scales().back();
  SceneSpec spec = SceneSpec::clipped(seed);
  spec.resolution = res;
  const LightEnv gt = random_env(spec);

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> jitter(-0.5, 0.5);
  RadianceMat q = RadianceMat::Zero(gt.grid().cell_count(), kChannels);
  for (const auto cell : gt.grid().masked_cells()) {
    for (int c = 0; c < kChannels; ++c) q(cell, c) = std::log(std::max(gt.radiance()(cell, c), 0.05)) + jitter(rng);
  }
  return {LogLightEnv(gt.grid_ptr(), std::move(q)), reference_pyramid(fields, gt, gamma)};
}

}  // namespace hdrprobe
