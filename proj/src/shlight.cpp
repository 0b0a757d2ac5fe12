#include "hdrprobe/shlight.hpp"

namespace hdrprobe {

Eigen::Matrix<double, kShCount, kShCount> sh_gram(const BallGrid& grid) {
  Eigen::Matrix<double, kShCount, kShCount> gram = Eigen::Matrix<double, kShCount, kShCount>::Zero();
  for (const auto cell : grid.masked_cells()) {
    const auto y = sh_basis(grid.direction(cell));
    gram.noalias() += y * y.transpose();
  }
  return gram * grid.cell_solid_angle();
}

ShCoeffs project_sh(const LightEnv& env) {
  return sh_gram(env.grid()).ldlt().solve(project_sh_quadrature(env));
}

ShCoeffs project_sh_quadrature(const LightEnv& env) {
  const BallGrid& grid = env.grid();
  ShCoeffs coeffs = ShCoeffs::Zero();
  for (const auto cell : grid.masked_cells()) {
    coeffs.noalias() += sh_basis(grid.direction(cell)) * env.radiance().row(cell);
  }
  return coeffs * grid.cell_solid_angle();
}

RadianceMat reconstruct_sh_raw(const ShCoeffs& coeffs, const BallGrid& grid) {
  RadianceMat out = RadianceMat::Zero(grid.cell_count(), kChannels);
  for (const auto cell : grid.masked_cells()) {
    out.row(cell) = sh_basis(grid.direction(cell)).transpose() * coeffs;
  }
  return out;
}

LightEnv reconstruct_sh(const ShCoeffs& coeffs, int resolution) {
  auto grid = shared_grid(resolution);
  return {grid, reconstruct_sh_raw(coeffs, *grid).cwiseMax(0.0)};
}

ShCoeffs truncate_sh(const ShCoeffs& coeffs, int max_band) {
  ShCoeffs out = ShCoeffs::Zero();
  const int keep = (max_band + 1) * (max_band + 1);
  out.topRows(std::min(keep, kShCount)) = coeffs.topRows(std::min(keep, kShCount));
  return out;
}

}  // namespace hdrprobe
