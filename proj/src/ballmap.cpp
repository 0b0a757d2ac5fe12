#include "hdrprobe/ballmap.hpp"

#include <algorithm>

namespace hdrprobe {

BallGrid::BallGrid(int resolution) : resolution_(resolution) {
  if (resolution < 2) {
    throw DomainError("BallGrid: resolution must be at least 2");
  }
  const double pixel = 2.0 / resolution;
  cell_solid_angle_ = 4.0 * pixel * pixel;

  const auto n = std::size_t(cell_count());
  mask_.assign(n, false);
  directions_.assign(n, Vec3<double>::Zero());
  for (Eigen::Index cell = 0; cell < cell_count(); ++cell) {
    const Vec2<double> c = cell_center(cell);
    if (c.squaredNorm() < 1.0) {
      mask_[std::size_t(cell)] = true;
      masked_cells_.push_back(cell);
      directions_[std::size_t(cell)] = pixel_to_direction(c);
    }
  }
}

Vec2<double> BallGrid::cell_center(Eigen::Index cell) const {
  const auto row = cell / resolution_;
  const auto col = cell % resolution_;
  return {(double(col) + 0.5) / resolution_ * 2.0 - 1.0, (double(row) + 0.5) / resolution_ * 2.0 - 1.0};
}

Eigen::Index BallGrid::cell_at(const Vec2<double>& coord) const {
  auto to_index = [this](double t) {
    const auto i = Eigen::Index(std::floor((t + 1.0) / 2.0 * resolution_));
    return std::clamp<Eigen::Index>(i, 0, resolution_ - 1);
  };
  return to_index(coord.y()) * resolution_ + to_index(coord.x());
}

Eigen::Index BallGrid::nearest_cell(const Vec3<double>& d) const {
  Eigen::Index best = masked_cells_.front();
  double best_dot = -2.0;
  for (const auto cell : masked_cells_) {
    const double dot = directions_[std::size_t(cell)].dot(d);
    if (dot > best_dot) {
      best_dot = dot;
      best = cell;
    }
  }
  return best;
}

}  // namespace hdrprobe
