#include "hdrprobe/promote.hpp"

#include <cmath>

namespace hdrprobe {

void SolverConfig::validate() const {
  if (!(gamma > 0.0)) throw DomainError("SolverConfig: gamma must be positive");
  if (!(mirror_reflectivity > 0.0 && mirror_reflectivity <= 1.0)) {
    throw DomainError("SolverConfig: mirror reflectivity must lie in (0, 1]");
  }
  if (!(lambda_reg >= 0.0)) throw DomainError("SolverConfig: lambda_reg must be non-negative");
  if (!(clip_threshold > 0.0 && clip_threshold <= 1.0)) {
    throw DomainError("SolverConfig: clip threshold must lie in (0, 1]");
  }
}

SolverConfig SolverConfig::for_float_inputs() {
  SolverConfig config;
  config.clip_threshold = kClipThresholdFloat;
  return config;
}

ProbeTriplet ProbeTriplet::from_ldr(SphereImage diffuse, SphereImage silver, SphereImage mirror, double threshold) {
  ClipMask d = detect_clipped(diffuse, threshold);
  ClipMask s = detect_clipped(silver, threshold);
  ClipMask m = detect_clipped(mirror, threshold);
  ProbeTriplet out{std::move(diffuse), std::move(silver), std::move(mirror), std::move(d), std::move(s), std::move(m)};
  out.validate(threshold);
  return out;
}

void ProbeTriplet::validate(double threshold) const {
  const auto check = [threshold](const SphereImage& img, const ClipMask& clip, const char* name) {
    if (img.encoding() != Encoding::GammaLDR) {
      throw DomainError(std::string("ProbeTriplet: ") + name + " image must be GammaLDR");
    }
    if (clip.rows() != img.pixels().rows()) {
      throw DomainError(std::string("ProbeTriplet: ") + name + " clip mask has the wrong size");
    }
    if (((img.pixels().array() >= threshold) && !clip).any()) {
      throw DomainError(std::string("ProbeTriplet: ") + name + " has unflagged pixels above the clip threshold");
    }
  };
  check(diffuse, diffuse_clip, "diffuse");
  check(silver, silver_clip, "silver");
  check(mirror, mirror_clip, "mirror");
  if (diffuse.resolution() != silver.resolution() || diffuse.resolution() != mirror.resolution()) {
    throw DomainError("ProbeTriplet: probe images must share one resolution");
  }
}

SphereImage linearize(const SphereImage& img, double gamma) {
  if (img.encoding() != Encoding::GammaLDR) {
    throw DomainError("linearize: input must be GammaLDR");
  }
  return {img.grid_ptr(), img.pixels().array().pow(gamma).matrix(), Encoding::LinearHDR};
}

SphereImage encode_gamma(const SphereImage& linear, double gamma) {
  if (linear.encoding() != Encoding::LinearHDR) {
    throw DomainError("encode_gamma: input must be LinearHDR");
  }
  return {linear.grid_ptr(), linear.pixels().array().min(1.0).pow(1.0 / gamma).matrix(), Encoding::GammaLDR};
}

ClipMask detect_clipped(const SphereImage& img, double threshold) {
  if (img.encoding() != Encoding::GammaLDR) {
    throw DomainError("detect_clipped: input must be GammaLDR");
  }
  return img.pixels().array() >= threshold;
}

LightEnv base_lighting(const SphereImage& mirror_linear, const ClipMask& mirror_clip, const SolverConfig& config) {
  if (mirror_linear.encoding() != Encoding::LinearHDR) {
    throw DomainError("base_lighting: mirror image must be linear");
  }
  const double inv = 1.0 / config.mirror_reflectivity;
  RadianceMat l = mirror_clip.select(RadianceMat::Constant(mirror_linear.pixels().rows(), kChannels, inv),
                                     mirror_linear.pixels() * inv);
  return {mirror_linear.grid_ptr(), std::move(l)};
}

ColorBalance avg_color_balance(const SphereImage& diffuse_linear, const ClipMask& diffuse_clip) {
  Eigen::Array3d sum = Eigen::Array3d::Zero();
  Eigen::Array3i count = Eigen::Array3i::Zero();
  const BallGrid& grid = diffuse_linear.grid();
  for (const auto pixel : grid.masked_cells()) {
    for (int c = 0; c < kChannels; ++c) {
      if (!diffuse_clip(pixel, c)) {
        sum(c) += diffuse_linear.pixels()(pixel, c);
        ++count(c);
      }
    }
  }
  if ((count == 0).any()) {
    throw DegenerateInputError("avg_color_balance: a channel has no unclipped diffuse pixels");
  }
  const Eigen::Array3d mean = sum / count.cast<double>();
  if ((mean <= 0.0).any()) {
    throw DegenerateInputError("avg_color_balance: diffuse ball is black in at least one channel");
  }
  return {mean(0), mean(1), mean(2)};
}

UnknownIndex::UnknownIndex(const BallGrid& grid, const ClipMask& mirror_clip)
    : lookup_(Eigen::Matrix<Eigen::Index, DYN, 3>::Constant(grid.cell_count(), 3, -1)) {
  for (const auto cell : grid.masked_cells()) {
    for (int c = 0; c < kChannels; ++c) {
      if (mirror_clip(cell, c)) {
        lookup_(cell, c) = Eigen::Index(columns_.size());
        columns_.emplace_back(cell, c);
      }
    }
  }
}

LinearSystem assemble_system(const ProbeTriplet& probes, const ReflectanceField& diffuse,
                             const ReflectanceField& silver, const LightEnv& base, const ColorBalance& balance,
                             const SolverConfig& config) {
  const BallGrid& basis = base.grid();
  for (const auto* field : {&diffuse, &silver}) {
    if (field->basis_resolution() != basis.resolution()) {
      throw DomainError("assemble_system: field basis resolution does not match the lighting grid");
    }
  }
  if (diffuse.sphere_resolution() != probes.diffuse.resolution() ||
      silver.sphere_resolution() != probes.silver.resolution()) {
    throw DomainError("assemble_system: field sphere resolution does not match the probe images");
  }
  if (probes.mirror.resolution() != basis.resolution()) {
    throw DomainError("assemble_system: mirror probe resolution does not match the lighting grid");
  }

  LinearSystem system;
  system.unknowns = UnknownIndex(basis, probes.mirror_clip);
  const auto n = system.unknowns.size();
  if (n == 0) return system;

  struct Source {
    const ReflectanceField* field;
    SphereImage linear;
    const ClipMask* clip;
  };
  const Source sources[] = {
      {&diffuse, linearize(probes.diffuse, config.gamma), &probes.diffuse_clip},
      {&silver, linearize(probes.silver, config.gamma), &probes.silver_clip},
  };

  std::vector<Eigen::Index> clipped_cells;
  for (const auto cell : basis.masked_cells()) {
    if (probes.mirror_clip.row(cell).any()) clipped_cells.push_back(cell);
  }

  Eigen::Index data_rows = 0;
  for (const auto& src : sources) {
    for (const auto pixel : src.field->sphere_grid().masked_cells()) {
      data_rows += (!src.clip->row(pixel)).count();
    }
  }
  const auto reg_rows = Eigen::Index(2 * clipped_cells.size());

  system.A = Mat<double>::Zero(data_rows + reg_rows, n);
  system.b = Vec<double>::Zero(data_rows + reg_rows);
  system.data_rows = data_rows;
  system.regularization_rows = reg_rows;

  Eigen::Index row = 0;
  for (const auto& src : sources) {
    RadianceMat known(src.field->sphere_grid().cell_count(), kChannels);
    for (int c = 0; c < kChannels; ++c) {
      known.col(c).noalias() = src.field->weights(c) * base.radiance().col(c);
    }
    for (const auto pixel : src.field->sphere_grid().masked_cells()) {
      for (int c = 0; c < kChannels; ++c) {
        if ((*src.clip)(pixel, c)) continue;
        const auto& w = src.field->weights(c);
        for (Eigen::Index j = 0; j < n; ++j) {
          const auto [cell, channel] = system.unknowns.columns()[std::size_t(j)];
          if (channel == c) system.A(row, j) = w(pixel, cell);
        }
        system.b(row) = src.linear.pixels()(pixel, c) - known(pixel, c);
        ++row;
      }
    }
  }

  // Ratio constraints (L_R + U_R) / (L_X + U_X) = R_avg / X_avg, cross-multiplied:
  // X_avg (L_R + U_R) - R_avg (L_X + U_X) = 0, with unclipped channels' U fixed at 0.
  const Eigen::Array3d bal = balance.array();
  const double scale = config.lambda_reg / bal.maxCoeff();
  for (const auto cell : clipped_cells) {
    for (const int other : {1, 2}) {
      const double coef_r = scale * bal(other);
      const double coef_x = -scale * bal(0);
      double rhs = -(coef_r * base.radiance()(cell, 0) + coef_x * base.radiance()(cell, other));
      if (const auto j = system.unknowns.column(cell, 0); j >= 0) system.A(row, j) = coef_r;
      if (const auto j = system.unknowns.column(cell, other); j >= 0) system.A(row, j) = coef_x;
      system.b(row) = rhs;
      ++row;
    }
  }
  system.underdetermined = system.A.rows() < n;
  return system;
}

ResidualSolve nnls_solve(const LinearSystem& system, const BallGrid& grid, const SolverConfig& config) {
  NnlsOptions options;
  options.tolerance = config.nnls_tolerance;
  options.max_iterations = config.max_iterations;
  const auto solution = nnls(system.A, system.b, options);

  ResidualSolve out;
  out.residual.u = RadianceMat::Zero(grid.cell_count(), kChannels);
  out.residual.index = system.unknowns;
  for (Eigen::Index j = 0; j < system.unknowns.size(); ++j) {
    const auto [cell, channel] = system.unknowns.columns()[std::size_t(j)];
    out.residual.u(cell, channel) = solution.x(j);
  }
  out.iterations = solution.iterations;
  out.kkt_residual = solution.kkt_residual;
  return out;
}

PromoteResult promote(const ProbeTriplet& probes, const ReflectanceField& diffuse, const ReflectanceField& silver,
                      const SolverConfig& config) {
  config.validate();
  probes.validate(config.clip_threshold);

  const SphereImage mirror_linear = linearize(probes.mirror, config.gamma);
  LightEnv base = base_lighting(mirror_linear, probes.mirror_clip, config);

  PromoteResult result{base, base, std::nullopt};
  const UnknownIndex unknowns(base.grid(), probes.mirror_clip);
  if (unknowns.size() == 0) return result;

  const ColorBalance balance = avg_color_balance(linearize(probes.diffuse, config.gamma), probes.diffuse_clip);
  const LinearSystem system = assemble_system(probes, diffuse, silver, base, balance, config);
  const ResidualSolve solve = nnls_solve(system, base.grid(), config);

  result.env = LightEnv(base.grid_ptr(), base.radiance() + solve.residual.u);
  result.balance = balance;
  result.unknowns = system.unknowns.size();
  result.rows = system.A.rows();
  result.iterations = solve.iterations;
  result.kkt_residual = solve.kkt_residual;
  result.underdetermined = system.underdetermined;
  return result;
}

}  // namespace hdrprobe
