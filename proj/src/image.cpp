#include "hdrprobe/image.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>

namespace hdrprobe {

GridPtr shared_grid(int resolution) {
  static std::mutex mutex;
  static std::map<int, GridPtr> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[resolution];
  if (!slot) {
    slot = std::make_shared<const BallGrid>(resolution);
  }
  return slot;
}

namespace {

void check_shape(const BallGrid& grid, const RadianceMat& m, const char* what) {
  if (m.rows() != grid.cell_count()) {
    throw DomainError(std::string(what) + ": row count does not match grid cell count");
  }
}

}  // namespace

void zero_outside_mask(const BallGrid& grid, RadianceMat& m) {
  for (Eigen::Index cell = 0; cell < grid.cell_count(); ++cell) {
    if (!grid.masked(cell)) m.row(cell).setZero();
  }
}

LightEnv::LightEnv(GridPtr grid, RadianceMat radiance) : grid_(std::move(grid)), radiance_(std::move(radiance)) {
  check_shape(*grid_, radiance_, "LightEnv");
  if (!radiance_.allFinite() || (radiance_.array() < 0.0).any()) {
    throw DomainError("LightEnv: radiance must be finite and non-negative");
  }
  zero_outside_mask(*grid_, radiance_);
}

LightEnv LightEnv::zeros(int resolution) {
  auto grid = shared_grid(resolution);
  return {grid, RadianceMat::Zero(grid->cell_count(), kChannels)};
}

LightEnv LightEnv::constant(int resolution, const Eigen::Array3d& value) {
  auto grid = shared_grid(resolution);
  RadianceMat m = value.matrix().transpose().replicate(grid->cell_count(), 1);
  return {grid, std::move(m)};
}

Eigen::Array3d LightEnv::total_radiance() const {
  return radiance_.colwise().sum().transpose().array();
}

Eigen::Array3d LightEnv::total_power() const { return total_radiance() * grid_->cell_solid_angle(); }

LogLightEnv::LogLightEnv(GridPtr grid, RadianceMat q) : grid_(std::move(grid)), q_(std::move(q)) {
  check_shape(*grid_, q_, "LogLightEnv");
  for (Eigen::Index cell = 0; cell < grid_->cell_count(); ++cell) {
    if (!grid_->masked(cell)) {
      q_.row(cell).setConstant(-std::numeric_limits<double>::infinity());
    } else if (!q_.row(cell).allFinite()) {
      // -inf is a legal log of zero radiance; NaN and +inf are not.
      for (int c = 0; c < kChannels; ++c) {
        const double v = q_(cell, c);
        if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
          throw DomainError("LogLightEnv: q must not be NaN or +inf");
        }
      }
    }
  }
}

LogLightEnv LogLightEnv::from_linear(const LightEnv& env) {
  return {env.grid_ptr(), env.radiance().array().log().matrix()};
}

LightEnv LogLightEnv::to_linear() const { return {grid_, q_.array().exp().matrix()}; }

SphereImage::SphereImage(GridPtr grid, RadianceMat pixels, Encoding encoding)
    : grid_(std::move(grid)), pixels_(std::move(pixels)), encoding_(encoding) {
  check_shape(*grid_, pixels_, "SphereImage");
  if (!pixels_.allFinite() || (pixels_.array() < 0.0).any()) {
    throw DomainError("SphereImage: pixels must be finite and non-negative");
  }
  if (encoding_ == Encoding::GammaLDR && (pixels_.array() > 1.0).any()) {
    throw DomainError("SphereImage: GammaLDR pixels must lie in [0, 1]");
  }
}

}  // namespace hdrprobe
