#pragma once

#include "hdrprobe/core.hpp"

#include <cmath>
#include <vector>

namespace hdrprobe {

/// Mirror-ball parameterization of the sphere of directions.
///
/// A point (u, v) of the unit disk is a point on an orthographically viewed
/// mirror sphere; it maps to the direction reflected toward a camera on +z.
/// The map coincides with the Lambert azimuthal equal-area projection, so a
/// disk area dA covers a solid angle of 4 dA.
///
/// Raster convention: pixel (row j, column i) of an N x N ball image has its
/// center at u = (i + 0.5) / N * 2 - 1, v = (j + 0.5) / N * 2 - 1, so v grows
/// downward in image row order.

template <typename Scalar>
Vec3<Scalar> pixel_to_direction(const Vec2<Scalar>& coord) {
  using std::sqrt;
  const Scalar r2 = coord.squaredNorm();
  if (!(r2 <= Scalar(1))) {
    throw DomainError("pixel_to_direction: coordinate outside the unit disk");
  }
  const Scalar w = sqrt(Scalar(1) - r2);
  return {Scalar(2) * coord.x() * w, Scalar(2) * coord.y() * w, Scalar(2) * w * w - Scalar(1)};
}

/// Inverse of pixel_to_direction. The direction straight behind the ball,
/// (0, 0, -1), is the whole rim; it maps to (1, 0).
template <typename Scalar>
Vec2<Scalar> direction_to_pixel(const Vec3<Scalar>& d) {
  using std::sqrt;
  const Scalar w2 = (d.z() + Scalar(1)) / Scalar(2);
  if (!(w2 > Scalar(0))) {
    return {Scalar(1), Scalar(0)};
  }
  const Scalar w = sqrt(w2);
  return {d.x() / (Scalar(2) * w), d.y() / (Scalar(2) * w)};
}

/// Surface normal of the viewed sphere at disk coordinate (u, v).
template <typename Scalar>
Vec3<Scalar> sphere_normal(const Vec2<Scalar>& coord) {
  using std::sqrt;
  using std::max;
  return {coord.x(), coord.y(), sqrt(max(Scalar(0), Scalar(1) - coord.squaredNorm()))};
}

/// Square raster over the unit disk. Cells are indexed row-major,
/// cell = row * resolution + col. A cell is valid (masked in) when its
/// center lies strictly inside the disk; every valid cell subtends the
/// same solid angle 4 (2 / resolution)^2.
class BallGrid {
 public:
  explicit BallGrid(int resolution);

  int resolution() const noexcept { return resolution_; }
  Eigen::Index cell_count() const noexcept { return Eigen::Index(resolution_) * resolution_; }
  Eigen::Index masked_count() const noexcept { return Eigen::Index(masked_cells_.size()); }

  bool masked(Eigen::Index cell) const { return mask_[std::size_t(cell)]; }
  const std::vector<bool>& mask() const noexcept { return mask_; }
  /// Indices of valid cells in ascending order.
  const std::vector<Eigen::Index>& masked_cells() const noexcept { return masked_cells_; }

  /// Solid angle of any valid cell (steradians).
  double cell_solid_angle() const noexcept { return cell_solid_angle_; }
  /// Per-cell solid angle; 0 outside the mask.
  double solid_angle(Eigen::Index cell) const { return masked(cell) ? cell_solid_angle_ : 0.0; }
  double total_solid_angle() const noexcept { return cell_solid_angle_ * double(masked_cells_.size()); }

  Vec2<double> cell_center(Eigen::Index cell) const;
  /// Reflected direction of the cell center; only meaningful for valid cells.
  const Vec3<double>& direction(Eigen::Index cell) const { return directions_[std::size_t(cell)]; }
  Vec3<double> normal(Eigen::Index cell) const { return sphere_normal(cell_center(cell)); }

  /// Cell containing the disk coordinate, clamped to the raster.
  Eigen::Index cell_at(const Vec2<double>& coord) const;
  /// Valid cell whose direction is nearest (max dot product) to d.
  Eigen::Index nearest_cell(const Vec3<double>& d) const;

  bool operator==(const BallGrid& other) const noexcept { return resolution_ == other.resolution_; }

 private:
  int resolution_;
  double cell_solid_angle_;
  std::vector<bool> mask_;
  std::vector<Eigen::Index> masked_cells_;
  std::vector<Vec3<double>> directions_;
};

inline BallGrid build_grid(int resolution) { return BallGrid(resolution); }

}  // namespace hdrprobe
