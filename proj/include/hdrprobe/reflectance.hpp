#pragma once

#include "hdrprobe/image.hpp"

#include <array>
#include <string_view>
#include <vector>

namespace hdrprobe {

enum class Brdf : std::uint32_t { Mirror = 0, Diffuse = 1, MatteSilver = 2, External = 3 };

std::string_view to_string(Brdf brdf);
Brdf brdf_from_string(std::string_view name);

struct BrdfParams {
  double mirror_reflectivity = 0.827;
  Eigen::Array3d diffuse_albedo = Eigen::Array3d::Constant(0.5);
  double silver_specular_weight = 0.6;
  double silver_diffuse_weight = 0.2;
  double silver_phong_exponent = 32.0;

  /// Throws DomainError unless every fraction is in (0, 1] and the
  /// exponent is at least 1.
  void validate() const;
};

/// Linear map from lighting over the basis grid to sphere-image pixels.
///
/// Channel c of a render is weights(c) * env.col(c). Fields whose three
/// channels share one matrix store it once (channel_shared() is true).
class ReflectanceField {
 public:
  ReflectanceField(Brdf brdf, GridPtr sphere_grid, GridPtr basis_grid, std::vector<Mat<double>> weights);

  Brdf brdf() const noexcept { return brdf_; }
  const BallGrid& sphere_grid() const noexcept { return *sphere_grid_; }
  const BallGrid& basis_grid() const noexcept { return *basis_grid_; }
  const GridPtr& sphere_grid_ptr() const noexcept { return sphere_grid_; }
  const GridPtr& basis_grid_ptr() const noexcept { return basis_grid_; }
  int sphere_resolution() const noexcept { return sphere_grid_->resolution(); }
  int basis_resolution() const noexcept { return basis_grid_->resolution(); }

  bool channel_shared() const noexcept { return weights_.size() == 1; }
  const Mat<double>& weights(int channel) const { return weights_[channel_shared() ? 0 : std::size_t(channel)]; }
  const std::vector<Mat<double>>& storage() const noexcept { return weights_; }

 private:
  Brdf brdf_;
  GridPtr sphere_grid_;
  GridPtr basis_grid_;
  std::vector<Mat<double>> weights_;
};

/// Each sphere pixel sees only its own basis direction, attenuated by the
/// mirror reflectivity. Sphere and basis share the grid.
ReflectanceField mirror_field(const GridPtr& grid, const BrdfParams& params = {});

/// Lambertian sphere: albedo * max(0, n . w) * dOmega / pi.
ReflectanceField diffuse_field(const GridPtr& grid, const BrdfParams& params = {});

/// Matte silver: a normalized Phong lobe around the mirror direction plus a
/// Lambertian term. The lobe is renormalized per pixel so its discrete
/// integral over the basis is exactly one.
ReflectanceField silver_field(const GridPtr& grid, const BrdfParams& params = {});

ReflectanceField make_field(Brdf brdf, const GridPtr& grid, const BrdfParams& params = {});

/// One photographed basis image, lit from a single direction.
struct BasisImage {
  Vec3<double> direction;
  SphereImage image;
};

/// Accumulates each basis image into the basis cell nearest its lighting
/// direction. The sum of all weights equals the sum of all input pixels.
ReflectanceField resample_external(const std::vector<BasisImage>& basis_images, const GridPtr& basis_grid);

/// The three probe BRDFs at one resolution.
struct ProbeFields {
  ReflectanceField mirror;
  ReflectanceField diffuse;
  ReflectanceField silver;

  static ProbeFields build(int resolution, const BrdfParams& params = {});
  const ReflectanceField& get(Brdf brdf) const;
};

inline constexpr std::array<Brdf, 3> kProbeBrdfs{Brdf::Mirror, Brdf::Diffuse, Brdf::MatteSilver};

}  // namespace hdrprobe
