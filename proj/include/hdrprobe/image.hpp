#pragma once

#include "hdrprobe/ballmap.hpp"

#include <memory>

namespace hdrprobe {

using GridPtr = std::shared_ptr<const BallGrid>;

/// Process-wide grid for a resolution; grids are immutable so one instance
/// per resolution is shared by every image and environment.
GridPtr shared_grid(int resolution);

/// HDR illumination over the mirror-ball basis: one row per grid cell, one
/// column per channel. Values are linear, non-negative, and zero outside the
/// grid mask.
class LightEnv {
 public:
  LightEnv(GridPtr grid, RadianceMat radiance);

  static LightEnv zeros(int resolution);
  static LightEnv constant(int resolution, const Eigen::Array3d& value);

  const BallGrid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  int resolution() const noexcept { return grid_->resolution(); }
  const RadianceMat& radiance() const noexcept { return radiance_; }

  /// Sum over valid cells of radiance x solid angle, per channel.
  Eigen::Array3d total_power() const;
  /// Sum of radiance over valid cells, per channel.
  Eigen::Array3d total_radiance() const;

 private:
  GridPtr grid_;
  RadianceMat radiance_;
};

/// Log-space illumination Q with L = exp(Q). Cells outside the mask hold
/// -infinity so that exp maps them to exactly zero.
class LogLightEnv {
 public:
  LogLightEnv(GridPtr grid, RadianceMat q);

  static LogLightEnv from_linear(const LightEnv& env);

  const BallGrid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  int resolution() const noexcept { return grid_->resolution(); }
  const RadianceMat& q() const noexcept { return q_; }

  LightEnv to_linear() const;

 private:
  GridPtr grid_;
  RadianceMat q_;
};

enum class Encoding { LinearHDR, GammaLDR };

/// Image of a sphere on the ball raster. GammaLDR pixels lie in [0, 1];
/// LinearHDR pixels are non-negative and unbounded.
class SphereImage {
 public:
  SphereImage(GridPtr grid, RadianceMat pixels, Encoding encoding);

  const BallGrid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  int resolution() const noexcept { return grid_->resolution(); }
  const RadianceMat& pixels() const noexcept { return pixels_; }
  Encoding encoding() const noexcept { return encoding_; }

 private:
  GridPtr grid_;
  RadianceMat pixels_;
  Encoding encoding_;
};

/// Zeroes every row of m that lies outside the grid mask.
void zero_outside_mask(const BallGrid& grid, RadianceMat& m);

}  // namespace hdrprobe
