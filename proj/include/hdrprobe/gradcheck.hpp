#pragma once

#include "hdrprobe/metrics.hpp"

#include <cstdint>

namespace hdrprobe {

/// Central finite-difference verification of loss_gradient.
///
/// Each cell's derivative is measured from the multi-scale loss evaluated at
/// q +/- h on that cell alone. Only the pixels whose rendered value changes
/// are re-evaluated, which is exact because rendering is linear in the
/// environment. A cell is skipped as non-smooth when some affected pixel's
/// L1 residual changes sign across the stencil.
struct GradCheckOptions {
  double h = 1e-4;
  /// Cells whose analytic |g| is at or below this are not compared.
  double grad_floor = 1e-7;
};

struct GradCheckReport {
  double loss = 0;
  double max_rel_error = 0;
  Eigen::Index cells_checked = 0;
  Eigen::Index cells_skipped_nonsmooth = 0;
  /// Finite-difference estimate for every cell and channel (0 where skipped).
  RadianceMat fd_gradient;
  RadianceMat analytic_gradient;
};

GradCheckReport finite_difference_check(const LogLightEnv& q, const FieldPyramid& fields,
                                        const std::vector<BrdfImages>& reference, const LossWeights& weights,
                                        const GradCheckOptions& options = {});

/// Random log-environment and gamma-encoded reference pyramid from a
/// synthetic scene; deterministic per seed.
struct GradCheckProblem {
  LogLightEnv q;
  std::vector<BrdfImages> reference;
};

GradCheckProblem make_gradcheck_problem(std::uint64_t seed, const FieldPyramid& fields, double gamma = 2.2);

}  // namespace hdrprobe
