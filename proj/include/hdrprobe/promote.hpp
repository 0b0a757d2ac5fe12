#pragma once

#include "hdrprobe/nnls.hpp"
#include "hdrprobe/reflectance.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace hdrprobe {

inline constexpr double kClipThreshold8Bit = 254.0 / 255.0;
inline constexpr double kClipThresholdFloat = 1.0 - 1e-6;

struct SolverConfig {
  double gamma = 2.2;
  double mirror_reflectivity = 0.827;
  /// Weight of the cross-channel color-balance rows.
  double lambda_reg = 0.5;
  /// LDR value at or above which a pixel channel counts as clipped.
  double clip_threshold = kClipThreshold8Bit;
  double nnls_tolerance = 1e-10;
  /// 0 selects the solver's default bound.
  int max_iterations = 0;

  void validate() const;
  static SolverConfig for_float_inputs();
};

/// Gamma-encoded LDR images of the three probe spheres with per-channel
/// clip masks (true = clipped).
struct ProbeTriplet {
  SphereImage diffuse;
  SphereImage silver;
  SphereImage mirror;
  ClipMask diffuse_clip;
  ClipMask silver_clip;
  ClipMask mirror_clip;

  /// Builds clip masks with detect_clipped at the given threshold.
  static ProbeTriplet from_ldr(SphereImage diffuse, SphereImage silver, SphereImage mirror, double threshold);

  /// Throws DomainError if an image is not GammaLDR, resolutions differ, or a
  /// pixel at or above threshold is not flagged as clipped.
  void validate(double threshold) const;
};

SphereImage linearize(const SphereImage& img, double gamma);
/// Clamps linear values to [0, 1] and applies the x^(1/gamma) transfer.
SphereImage encode_gamma(const SphereImage& linear, double gamma);

ClipMask detect_clipped(const SphereImage& img, double threshold);

/// Mirror pixel / reflectivity where unclipped; 1 / reflectivity where
/// clipped.
LightEnv base_lighting(const SphereImage& mirror_linear, const ClipMask& mirror_clip, const SolverConfig& config);

struct ColorBalance {
  double r_avg = 0;
  double g_avg = 0;
  double b_avg = 0;

  Eigen::Array3d array() const { return {r_avg, g_avg, b_avg}; }
};

/// Per-channel mean of the linear diffuse ball over valid, unclipped pixels.
ColorBalance avg_color_balance(const SphereImage& diffuse_linear, const ClipMask& diffuse_clip);

/// Solver columns: one per (cell, channel) clipped in the mirror image.
class UnknownIndex {
 public:
  UnknownIndex() = default;
  UnknownIndex(const BallGrid& grid, const ClipMask& mirror_clip);

  Eigen::Index size() const noexcept { return Eigen::Index(columns_.size()); }
  const std::vector<std::pair<Eigen::Index, int>>& columns() const noexcept { return columns_; }
  /// Column of (cell, channel), or -1 when that residual is fixed at zero.
  Eigen::Index column(Eigen::Index cell, int channel) const { return lookup_(cell, channel); }

 private:
  std::vector<std::pair<Eigen::Index, int>> columns_;
  Eigen::Matrix<Eigen::Index, DYN, 3> lookup_;
};

struct LinearSystem {
  Mat<double> A;
  Vec<double> b;
  UnknownIndex unknowns;
  Eigen::Index data_rows = 0;
  Eigen::Index regularization_rows = 0;
  /// Fewer rows than columns.
  bool underdetermined = false;
};

/// Data rows for every valid, unclipped diffuse and silver pixel channel
/// (sum_w R U = p - sum_w R L), followed by two linearized color-ratio rows
/// per mirror-clipped direction.
LinearSystem assemble_system(const ProbeTriplet& probes, const ReflectanceField& diffuse,
                             const ReflectanceField& silver, const LightEnv& base, const ColorBalance& balance,
                             const SolverConfig& config);

struct ResidualLight {
  /// Residual radiance per cell and channel; zero off the unknown set.
  RadianceMat u;
  UnknownIndex index;
};

struct ResidualSolve {
  ResidualLight residual;
  int iterations = 0;
  double kkt_residual = 0;
};

ResidualSolve nnls_solve(const LinearSystem& system, const BallGrid& grid, const SolverConfig& config);

struct PromoteResult {
  LightEnv env;
  LightEnv base;
  std::optional<ColorBalance> balance;
  Eigen::Index unknowns = 0;
  Eigen::Index rows = 0;
  int iterations = 0;
  double kkt_residual = 0;
  bool underdetermined = false;
};

/// Recovers HDR illumination L + U from a clipped probe triplet.
PromoteResult promote(const ProbeTriplet& probes, const ReflectanceField& diffuse, const ReflectanceField& silver,
                      const SolverConfig& config = {});

}  // namespace hdrprobe
