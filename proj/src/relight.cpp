#include "hdrprobe/relight.hpp"

namespace hdrprobe {

namespace {

RadianceMat apply_field(const ReflectanceField& field, const RadianceMat& radiance) {
  if (field.channel_shared()) {
    return field.weights(0) * radiance;
  }
  RadianceMat out(field.sphere_grid().cell_count(), kChannels);
  for (int c = 0; c < kChannels; ++c) {
    out.col(c).noalias() = field.weights(c) * radiance.col(c);
  }
  return out;
}

}  // namespace

SphereImage render(const ReflectanceField& field, const LightEnv& env) {
  if (field.basis_resolution() != env.resolution()) {
    throw DomainError("render: field basis resolution does not match environment resolution");
  }
  return {field.sphere_grid_ptr(), apply_field(field, env.radiance()), Encoding::LinearHDR};
}

SphereImage render_log(const ReflectanceField& field, const LogLightEnv& logenv) {
  if (field.basis_resolution() != logenv.resolution()) {
    throw DomainError("render_log: field basis resolution does not match environment resolution");
  }
  return render(field, logenv.to_linear());
}

LightEnv downsample_env(const LightEnv& env, int factor) {
  const int res = env.resolution();
  if (factor < 1 || res % factor != 0 || res / factor < 2) {
    throw DomainError("downsample_env: factor must divide the resolution and leave at least 2 cells per side");
  }
  if (factor == 1) return env;

  const int coarse_res = res / factor;
  auto coarse_grid = shared_grid(coarse_res);
  const BallGrid& fine = env.grid();
  RadianceMat out = RadianceMat::Zero(coarse_grid->cell_count(), kChannels);
  for (const auto coarse_cell : coarse_grid->masked_cells()) {
    const auto row0 = (coarse_cell / coarse_res) * factor;
    const auto col0 = (coarse_cell % coarse_res) * factor;
    Eigen::RowVector3d sum = Eigen::RowVector3d::Zero();
    int count = 0;
    for (int dr = 0; dr < factor; ++dr) {
      for (int dc = 0; dc < factor; ++dc) {
        const auto cell = (row0 + dr) * res + (col0 + dc);
        if (fine.masked(cell)) {
          sum += env.radiance().row(cell);
          ++count;
        }
      }
    }
    if (count > 0) out.row(coarse_cell) = sum / double(count);
  }
  return {std::move(coarse_grid), std::move(out)};
}

FieldPyramid FieldPyramid::build(const std::vector<int>& scales, const BrdfParams& params) {
  FieldPyramid pyramid;
  for (const int s : scales) {
    if (!pyramid.levels.empty() && s <= pyramid.levels.back().mirror.basis_resolution()) {
      throw DomainError("FieldPyramid: scales must be strictly increasing");
    }
    pyramid.levels.push_back(ProbeFields::build(s, params));
  }
  return pyramid;
}

std::vector<int> FieldPyramid::scales() const {
  std::vector<int> out;
  for (const auto& level : levels) out.push_back(level.mirror.basis_resolution());
  return out;
}

std::vector<LightEnv> env_pyramid(const LightEnv& env, const std::vector<int>& scales) {
  std::vector<LightEnv> out;
  out.reserve(scales.size());
  for (const int s : scales) {
    if (s <= 0 || env.resolution() % s != 0) {
      throw DomainError("env_pyramid: scale does not divide the environment resolution");
    }
    out.push_back(downsample_env(env, env.resolution() / s));
  }
  return out;
}

std::vector<SphereImage> render_pyramid(const std::vector<const ReflectanceField*>& fields, const LightEnv& env) {
  std::vector<SphereImage> out;
  out.reserve(fields.size());
  int previous = 0;
  for (const auto* field : fields) {
    const int s = field->basis_resolution();
    if (s <= previous || env.resolution() % s != 0) {
      throw DomainError("render_pyramid: fields must be ordered by scale and divide the environment resolution");
    }
    previous = s;
    out.push_back(render(*field, downsample_env(env, env.resolution() / s)));
  }
  return out;
}

}  // namespace hdrprobe
