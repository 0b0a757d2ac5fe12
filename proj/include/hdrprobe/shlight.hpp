#pragma once

#include "hdrprobe/image.hpp"

namespace hdrprobe {

inline constexpr int kShCount = 9;

/// Real orthonormal spherical harmonics through band 2, ordered
/// (l, m) = (0,0), (1,-1), (1,0), (1,1), (2,-2), (2,-1), (2,0), (2,1), (2,2).
template <typename Scalar>
Eigen::Matrix<Scalar, kShCount, 1> sh_basis(const Vec3<Scalar>& d) {
  const Scalar x = d.x(), y = d.y(), z = d.z();
  Eigen::Matrix<Scalar, kShCount, 1> out;
  out << Scalar(0.282094791773878143),                               //
      Scalar(0.488602511902919922) * y,                              //
      Scalar(0.488602511902919922) * z,                              //
      Scalar(0.488602511902919922) * x,                              //
      Scalar(1.092548430592079070) * x * y,                          //
      Scalar(1.092548430592079070) * y * z,                          //
      Scalar(0.315391565252520002) * (Scalar(3) * z * z - Scalar(1)),  //
      Scalar(1.092548430592079070) * x * z,                          //
      Scalar(0.546274215296039535) * (x * x - y * y);
  return out;
}

/// Nine coefficients per channel; column c holds channel c.
using ShCoeffs = Eigen::Matrix<double, kShCount, 3>;

/// Least-squares projection onto the nine basis functions over the valid
/// cells: the quadrature sums below corrected by the inverse discrete Gram
/// matrix, so constant and band-limited environments project exactly.
ShCoeffs project_sh(const LightEnv& env);

/// Plain quadrature c_i = sum over valid cells of L(d) Y_i(d) dOmega.
ShCoeffs project_sh_quadrature(const LightEnv& env);

/// sum over valid cells of Y_i Y_j dOmega.
Eigen::Matrix<double, kShCount, kShCount> sh_gram(const BallGrid& grid);

/// Raw reconstruction sum_i c_i Y_i(d) per valid cell; may be negative.
RadianceMat reconstruct_sh_raw(const ShCoeffs& coeffs, const BallGrid& grid);

/// Reconstruction clamped to non-negative radiance for rendering.
LightEnv reconstruct_sh(const ShCoeffs& coeffs, int resolution);

/// Keeps bands l <= max_band and zeroes the rest.
ShCoeffs truncate_sh(const ShCoeffs& coeffs, int max_band);

}  // namespace hdrprobe
