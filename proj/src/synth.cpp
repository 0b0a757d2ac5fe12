#include "hdrprobe/synth.hpp"

#include "hdrprobe/probeio.hpp"
#include "hdrprobe/relight.hpp"
#include "hdrprobe/shlight.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace hdrprobe {

SceneSpec SceneSpec::unclipped(std::uint64_t seed) {
  SceneSpec spec;
  spec.seed = seed;
  spec.n_sources = 0;
  spec.ambient_level = 0.4;
  spec.ambient_variation = 0.6;
  spec.max_mirror_response = 0.6 + 0.35 * double(seed % 8) / 7.0;
  return spec;
}

SceneSpec SceneSpec::clipped(std::uint64_t seed) {
  SceneSpec spec;
  spec.seed = seed;
  spec.n_sources = 1 + int(seed % 5);
  spec.intensity_min = 2.0;
  spec.intensity_max = 50.0;
  spec.chroma_jitter = 0.1;
  spec.ambient_level = 0.2;
  return spec;
}

SceneSpec SceneSpec::strongly_hued(std::uint64_t seed) {
  SceneSpec spec;
  spec.seed = seed;
  spec.n_sources = 1;
  spec.intensity_min = 10.0;
  spec.intensity_max = 30.0;
  spec.chroma_jitter = 0.0;
  spec.ambient_level = 0.35;
  spec.ambient_variation = 0.2;
  spec.ambient_tint = {0.4, 0.8, 1.6};
  spec.ambient_tint_jitter = 0.0;
  return spec;
}

std::string SceneSpec::describe() const {
  std::ostringstream out;
  out << "seed " << seed << "\n"
      << "resolution " << resolution << "\n"
      << "n_sources " << n_sources << "\n"
      << "intensity_min " << intensity_min << "\n"
      << "intensity_max " << intensity_max << "\n"
      << "chroma_jitter " << chroma_jitter << "\n"
      << "ambient_level " << ambient_level << "\n"
      << "ambient_variation " << ambient_variation << "\n"
      << "ambient_tint " << ambient_tint(0) << " " << ambient_tint(1) << " " << ambient_tint(2) << "\n"
      << "ambient_tint_jitter " << ambient_tint_jitter << "\n";
  if (max_mirror_response) out << "max_mirror_response " << *max_mirror_response << "\n";
  out << "quantize_8bit " << (quantize_8bit ? 1 : 0) << "\n";
  return out.str();
}

SyntheticScene random_scene(const SceneSpec& spec, double mirror_reflectivity) {
  auto grid = shared_grid(spec.resolution);
  if (spec.n_sources < 0 || spec.n_sources > grid->masked_count()) {
    throw DomainError("random_env: source count exceeds the number of valid cells");
  }
  if (spec.intensity_min < 0.0 || spec.intensity_max < spec.intensity_min) {
    throw DomainError("random_env: invalid source intensity range");
  }
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  SyntheticScene scene{LightEnv::zeros(spec.resolution), {}, 0.0};
  RadianceMat radiance = RadianceMat::Zero(grid->cell_count(), kChannels);
  if (spec.ambient_level > 0.0) {
    ShCoeffs coeffs = ShCoeffs::Zero();
    const double dc = spec.ambient_level * 2.0 * std::sqrt(std::numbers::pi);
    for (int c = 0; c < kChannels; ++c) {
      coeffs(0, c) = dc * spec.ambient_tint(c) * (1.0 + spec.ambient_tint_jitter * unit(rng));
    }
    for (int i = 1; i < kShCount; ++i) {
      const double shared = unit(rng);
      for (int c = 0; c < kChannels; ++c) {
        coeffs(i, c) = coeffs(0, c) * spec.ambient_variation * (shared + 0.2 * unit(rng));
      }
    }
    radiance = reconstruct_sh_raw(coeffs, *grid).cwiseMax(0.0);
  }
  scene.ambient_max = radiance.maxCoeff();

  std::vector<Eigen::Index> cells = grid->masked_cells();
  std::shuffle(cells.begin(), cells.end(), rng);
  std::uniform_real_distribution<double> intensity(spec.intensity_min, spec.intensity_max);
  for (int s = 0; s < spec.n_sources; ++s) {
    const auto cell = cells[std::size_t(s)];
    Eigen::Array3d chroma;
    for (int c = 0; c < kChannels; ++c) chroma(c) = 1.0 + spec.chroma_jitter * unit(rng);
    chroma /= chroma.mean();
    radiance.row(cell) += (intensity(rng) * chroma).matrix().transpose();
    scene.source_cells.push_back(cell);
  }

  if (spec.max_mirror_response) {
    const double peak = radiance.maxCoeff() * mirror_reflectivity;
    if (peak > 0.0) {
      radiance *= *spec.max_mirror_response / peak;
      scene.ambient_max *= *spec.max_mirror_response / peak;
    }
  }
  scene.env = LightEnv(grid, std::move(radiance));
  return scene;
}

LightEnv random_env(const SceneSpec& spec, double mirror_reflectivity) {
  return random_scene(spec, mirror_reflectivity).env;
}

ProbeTriplet make_probes(const LightEnv& env, const ProbeFields& fields, const SolverConfig& config, bool quantize) {
  auto forward = [&](const ReflectanceField& field) {
    const SphereImage linear = render(field, env);
    SphereImage ldr = encode_gamma(linear, config.gamma);
    if (quantize) ldr = quantize_probe(ldr);
    ClipMask clip = (linear.pixels().array() >= 1.0) || (ldr.pixels().array() >= config.clip_threshold);
    return std::pair{std::move(ldr), std::move(clip)};
  };
  auto [diffuse, diffuse_clip] = forward(fields.diffuse);
  auto [silver, silver_clip] = forward(fields.silver);
  auto [mirror, mirror_clip] = forward(fields.mirror);
  ProbeTriplet probes{std::move(diffuse),      std::move(silver),      std::move(mirror),
                      std::move(diffuse_clip), std::move(silver_clip), std::move(mirror_clip)};
  probes.validate(config.clip_threshold);
  return probes;
}

}  // namespace hdrprobe
