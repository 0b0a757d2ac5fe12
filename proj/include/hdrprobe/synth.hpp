#pragma once

#include "hdrprobe/promote.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hdrprobe {

/// Synthetic ground-truth scene: a smooth non-negative ambient term from
/// random band-2 SH coefficients plus single-cell impulse sources.
struct SceneSpec {
  std::uint64_t seed = 0;
  int resolution = 32;
  int n_sources = 3;
  /// Linear radiance of each source (the mirror clips at 1 / 0.827).
  double intensity_min = 2.0;
  double intensity_max = 50.0;
  /// Per-channel multiplicative jitter of each source's color, in [0, 1).
  double chroma_jitter = 0.1;
  /// Mean ambient radiance; 0 disables the ambient term.
  double ambient_level = 0.3;
  /// Amplitude of bands 1 and 2 relative to band 0.
  double ambient_variation = 0.4;
  /// Per-channel ambient color and its random jitter.
  Eigen::Array3d ambient_tint = Eigen::Array3d::Ones();
  double ambient_tint_jitter = 0.1;
  /// When set, the whole environment is rescaled so its brightest mirror
  /// response equals this value.
  std::optional<double> max_mirror_response;
  bool quantize_8bit = true;

  /// Ambient-only scene whose mirror image never clips.
  static SceneSpec unclipped(std::uint64_t seed);
  /// One to five near-neutral impulses at 2-50 over a dim ambient.
  static SceneSpec clipped(std::uint64_t seed);
  /// One neutral source under a strongly tinted ambient, so the diffuse
  /// color balance disagrees with the clipped source's true color.
  static SceneSpec strongly_hued(std::uint64_t seed);

  std::string describe() const;
};

struct SyntheticScene {
  LightEnv env;
  /// Cells holding impulse sources.
  std::vector<Eigen::Index> source_cells;
  /// Maximum ambient radiance before sources were added.
  double ambient_max = 0;
};

/// Deterministic per seed. Throws DomainError if n_sources exceeds the
/// number of valid cells.
SyntheticScene random_scene(const SceneSpec& spec, double mirror_reflectivity = 0.827);
LightEnv random_env(const SceneSpec& spec, double mirror_reflectivity = 0.827);

/// Forward model: render each probe, hard-clip at 1, encode x^(1/gamma),
/// optionally quantize to 8 bits. A channel is flagged clipped when its
/// pre-clip linear value is >= 1 or its encoded value reaches the clip
/// threshold.
ProbeTriplet make_probes(const LightEnv& env, const ProbeFields& fields, const SolverConfig& config, bool quantize);

}  // namespace hdrprobe
