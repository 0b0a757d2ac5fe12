#include "hdrprobe/reflectance.hpp"

#include <cmath>
#include <numbers>

namespace hdrprobe {

std::string_view to_string(Brdf brdf) {
  switch (brdf) {
    case Brdf::Mirror: return "mirror";
    case Brdf::Diffuse: return "diffuse";
    case Brdf::MatteSilver: return "silver";
    case Brdf::External: return "external";
  }
  return "unknown";
}

Brdf brdf_from_string(std::string_view name) {
  if (name == "mirror") return Brdf::Mirror;
  if (name == "diffuse") return Brdf::Diffuse;
  if (name == "silver" || name == "matte-silver") return Brdf::MatteSilver;
  if (name == "external") return Brdf::External;
  throw DomainError("unknown BRDF name: " + std::string(name));
}

void BrdfParams::validate() const {
  auto fraction = [](double f) { return f > 0.0 && f <= 1.0; };
  if (!fraction(mirror_reflectivity) || !fraction(silver_specular_weight) || !fraction(silver_diffuse_weight) ||
      !fraction(diffuse_albedo.minCoeff()) || !fraction(diffuse_albedo.maxCoeff())) {
    throw DomainError("BrdfParams: fractions must lie in (0, 1]");
  }
  if (!(silver_phong_exponent >= 1.0)) {
    throw DomainError("BrdfParams: Phong exponent must be >= 1");
  }
}

ReflectanceField::ReflectanceField(Brdf brdf, GridPtr sphere_grid, GridPtr basis_grid,
                                   std::vector<Mat<double>> weights)
    : brdf_(brdf), sphere_grid_(std::move(sphere_grid)), basis_grid_(std::move(basis_grid)), weights_(std::move(weights)) {
  if (weights_.size() != 1 && weights_.size() != std::size_t(kChannels)) {
    throw DomainError("ReflectanceField: expected 1 shared or 3 per-channel weight matrices");
  }
  for (const auto& w : weights_) {
    if (w.rows() != sphere_grid_->cell_count() || w.cols() != basis_grid_->cell_count()) {
      throw DomainError("ReflectanceField: weight matrix shape does not match grids");
    }
    if (!w.allFinite() || (w.array() < 0.0).any()) {
      throw DomainError("ReflectanceField: weights must be finite and non-negative");
    }
  }
}

namespace {

/// max(0, n . w) * dOmega / pi for every (sphere pixel, basis cell) pair.
Mat<double> lambert_weights(const BallGrid& grid) {
  const auto n = grid.cell_count();
  Mat<double> w = Mat<double>::Zero(n, n);
  const double scale = grid.cell_solid_angle() / std::numbers::pi;
  for (const auto pixel : grid.masked_cells()) {
    const Vec3<double> normal = grid.normal(pixel);
    for (const auto cell : grid.masked_cells()) {
      w(pixel, cell) = std::max(0.0, normal.dot(grid.direction(cell))) * scale;
    }
  }
  return w;
}

}  // namespace

ReflectanceField mirror_field(const GridPtr& grid, const BrdfParams& params) {
  params.validate();
  const auto n = grid->cell_count();
  Mat<double> w = Mat<double>::Zero(n, n);
  for (const auto cell : grid->masked_cells()) {
    w(cell, cell) = params.mirror_reflectivity;
  }
  return {Brdf::Mirror, grid, grid, {std::move(w)}};
}

ReflectanceField diffuse_field(const GridPtr& grid, const BrdfParams& params) {
  params.validate();
  const Mat<double> lambert = lambert_weights(*grid);
  const auto& albedo = params.diffuse_albedo;
  std::vector<Mat<double>> weights;
  if (albedo(0) == albedo(1) && albedo(1) == albedo(2)) {
    weights.push_back(albedo(0) * lambert);
  } else {
    for (int c = 0; c < kChannels; ++c) weights.push_back(albedo(c) * lambert);
  }
  return {Brdf::Diffuse, grid, grid, std::move(weights)};
}

ReflectanceField silver_field(const GridPtr& grid, const BrdfParams& params) {
  params.validate();
  const double e = params.silver_phong_exponent;
  const double lobe_norm = (e + 1.0) / (2.0 * std::numbers::pi) * grid->cell_solid_angle();

  Mat<double> w = params.silver_diffuse_weight * lambert_weights(*grid);
  Vec<double> lobe(grid->cell_count());
  for (const auto pixel : grid->masked_cells()) {
    // Viewed from +z, the mirror direction of a pixel is the direction of
    // its own basis cell.
    const Vec3<double>& reflected = grid->direction(pixel);
    lobe.setZero();
    for (const auto cell : grid->masked_cells()) {
      const double cosine = std::max(0.0, reflected.dot(grid->direction(cell)));
      lobe(cell) = lobe_norm * std::pow(cosine, e);
    }
    const double sum = lobe.sum();
    w.row(pixel) += (params.silver_specular_weight / sum) * lobe.transpose();
  }
  return {Brdf::MatteSilver, grid, grid, {std::move(w)}};
}

ReflectanceField make_field(Brdf brdf, const GridPtr& grid, const BrdfParams& params) {
  switch (brdf) {
    case Brdf::Mirror: return mirror_field(grid, params);
    case Brdf::Diffuse: return diffuse_field(grid, params);
    case Brdf::MatteSilver: return silver_field(grid, params);
    case Brdf::External: break;
  }
  throw DomainError("make_field: external fields cannot be built analytically");
}

ReflectanceField resample_external(const std::vector<BasisImage>& basis_images, const GridPtr& basis_grid) {
  if (basis_images.empty()) {
    throw DomainError("resample_external: empty basis list");
  }
  const GridPtr& sphere_grid = basis_images.front().image.grid_ptr();
  std::vector<Mat<double>> weights(kChannels, Mat<double>::Zero(sphere_grid->cell_count(), basis_grid->cell_count()));
  for (const auto& basis : basis_images) {
    if (basis.image.resolution() != sphere_grid->resolution()) {
      throw DomainError("resample_external: basis images must share one resolution");
    }
    if (std::abs(basis.direction.norm() - 1.0) > 1e-9) {
      throw DomainError("resample_external: source direction is not a unit vector");
    }
    const auto cell = basis_grid->nearest_cell(basis.direction);
    for (int c = 0; c < kChannels; ++c) {
      weights[std::size_t(c)].col(cell) += basis.image.pixels().col(c);
    }
  }
  return {Brdf::External, sphere_grid, basis_grid, std::move(weights)};
}

ProbeFields ProbeFields::build(int resolution, const BrdfParams& params) {
  const auto grid = shared_grid(resolution);
  return {mirror_field(grid, params), diffuse_field(grid, params), silver_field(grid, params)};
}

const ReflectanceField& ProbeFields::get(Brdf brdf) const {
  switch (brdf) {
    case Brdf::Mirror: return mirror;
    case Brdf::Diffuse: return diffuse;
    case Brdf::MatteSilver: return silver;
    case Brdf::External: break;
  }
  throw DomainError("ProbeFields: no external field");
}

}  // namespace hdrprobe
