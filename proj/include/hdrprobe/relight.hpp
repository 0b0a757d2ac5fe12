#pragma once

#include "hdrprobe/reflectance.hpp"

#include <vector>

namespace hdrprobe {

/// Image-based relighting: pixel(x, c) = sum over cells of R_c(x, cell) * L_c(cell).
SphereImage render(const ReflectanceField& field, const LightEnv& env);

/// Same as render(field, exp(q)).
SphereImage render_log(const ReflectanceField& field, const LogLightEnv& logenv);

/// Masked box filter: each coarse cell is the mean of the valid fine cells in
/// its factor x factor block. factor must divide the resolution and leave a
/// coarse resolution of at least 2.
LightEnv downsample_env(const LightEnv& env, int factor);

/// Coarse-to-fine scales 4, 8, 16, 32 used by the multi-scale loss.
inline const std::vector<int>& default_scales() {
  static const std::vector<int> scales{4, 8, 16, 32};
  return scales;
}

/// Per-BRDF fields for every scale in ascending resolution order.
struct FieldPyramid {
  std::vector<ProbeFields> levels;

  static FieldPyramid build(const std::vector<int>& scales, const BrdfParams& params = {});
  std::vector<int> scales() const;
};

/// One render per field, each lit by env downsampled to the field's basis
/// resolution.
std::vector<SphereImage> render_pyramid(const std::vector<const ReflectanceField*>& fields, const LightEnv& env);

/// Environment pyramid matching the given scales (each must divide the env
/// resolution).
std::vector<LightEnv> env_pyramid(const LightEnv& env, const std::vector<int>& scales);

}  // namespace hdrprobe
