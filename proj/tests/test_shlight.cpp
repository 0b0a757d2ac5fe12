#include "hdrprobe/relight.hpp"
#include "hdrprobe/shlight.hpp"
#include "hdrprobe/synth.hpp"

#include "test_util.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace hdrprobe;
using Catch::Matchers::WithinAbs;

namespace {

ShCoeffs random_coeffs(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  ShCoeffs c;
  for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = unit(rng);
  c.row(0).array() += 6.0;  // keeps the reconstruction positive
  return c;
}

}  // namespace

TEST_CASE("basis reference values") {
  const auto y = sh_basis(Vec3<double>(0.6, 0.0, 0.8));
  CHECK_THAT(y(0), WithinAbs(0.282095, 1e-6));
  const auto up = sh_basis(Vec3<double>(0, 0, 1));
  CHECK_THAT(up(2), WithinAbs(0.488603, 1e-6));
  CHECK(up(1) == 0.0);
  CHECK(up(3) == 0.0);
  CHECK_THAT(up(0), WithinAbs(1.0 / (2.0 * std::sqrt(std::numbers::pi)), 1e-15));
}

TEST_CASE("basis is orthonormal in the continuum limit") {
  // Fibonacci-sphere quadrature, independent of the ball grid.
  const int n = 200000;
  Eigen::Matrix<double, 9, 9> gram = Eigen::Matrix<double, 9, 9>::Zero();
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < n; ++i) {
    const double z = 1.0 - (i + 0.5) * 2.0 / n;
    const double r = std::sqrt(1.0 - z * z);
    const Vec3<double> d(r * std::cos(golden * i), r * std::sin(golden * i), z);
    const auto y = sh_basis(d);
    gram += y * y.transpose();
  }
  gram *= 4.0 * std::numbers::pi / n;
  CHECK((gram - Eigen::Matrix<double, 9, 9>::Identity()).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("discrete Gram matrix approaches the identity") {
  const auto off32 = (sh_gram(BallGrid(32)) - Eigen::Matrix<double, 9, 9>::Identity()).cwiseAbs().maxCoeff();
  const auto off64 = (sh_gram(BallGrid(64)) - Eigen::Matrix<double, 9, 9>::Identity()).cwiseAbs().maxCoeff();
  CHECK(off32 <= 0.04);
  CHECK(off64 <= 0.02);
  CHECK(off64 < off32);
}

TEST_CASE("constant environment projects onto the constant band") {
  const ShCoeffs c = project_sh(LightEnv::constant(32, Eigen::Array3d::Ones()));
  for (int ch = 0; ch < 3; ++ch) {
    CHECK_THAT(c(0, ch), WithinAbs(2.0 * std::sqrt(std::numbers::pi), 1e-9));
    CHECK(c.col(ch).tail(8).cwiseAbs().maxCoeff() < 1e-9);
  }
  const ShCoeffs plain = project_sh_quadrature(LightEnv::constant(32, Eigen::Array3d::Ones()));
  CHECK_THAT(plain(0, 0), WithinAbs(3.5449, 0.02 * 3.5449));
}

TEST_CASE("projection of a single-band environment") {
  ShCoeffs only_dc = ShCoeffs::Zero();
  only_dc.row(0).setConstant(1.7);
  const ShCoeffs back = project_sh(reconstruct_sh(only_dc, 32));
  CHECK((back - only_dc).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("mirroring x negates the x-odd coefficients") {
  std::mt19937_64 rng(4);
  const LightEnv env = testing::random_positive_env(32, rng);
  const BallGrid& grid = env.grid();
  RadianceMat flipped = RadianceMat::Zero(grid.cell_count(), 3);
  for (const auto cell : grid.masked_cells()) {
    const auto row = cell / 32, col = cell % 32;
    flipped.row(row * 32 + (31 - col)) = env.radiance().row(cell);
  }
  const ShCoeffs a = project_sh(env);
  const ShCoeffs b = project_sh(LightEnv(env.grid_ptr(), flipped));
  for (int i = 0; i < 9; ++i) {
    const bool odd_in_x = i == 3 || i == 4 || i == 7;
    const Eigen::RowVector3d expected = a.row(i);
    if (odd_in_x) {
      CHECK((b.row(i) + expected).cwiseAbs().maxCoeff() < 1e-10);
    } else {
      CHECK((b.row(i) - expected).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("band-limited environments round trip") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const ShCoeffs c = random_coeffs(rng);
    const LightEnv env = reconstruct_sh(c, 32);
    REQUIRE((reconstruct_sh_raw(c, env.grid()).array() >= 0.0).all());
    const LightEnv back = reconstruct_sh(project_sh(env), 32);
    double worst = 0.0;
    for (const auto cell : env.grid().masked_cells()) {
      worst = std::max(worst, ((back.radiance().row(cell) - env.radiance().row(cell)).array().abs() /
                               env.radiance().row(cell).array())
                                  .maxCoeff());
    }
    CHECK(worst <= 0.02);
  }
}

TEST_CASE("zero and truncated coefficients") {
  CHECK(reconstruct_sh(ShCoeffs::Zero(), 16).radiance().isZero());
  std::mt19937_64 rng(2);
  const ShCoeffs c = random_coeffs(rng);
  const ShCoeffs t0 = truncate_sh(c, 0);
  CHECK(t0.row(0) == c.row(0));
  CHECK(t0.bottomRows(8).isZero());
  CHECK(truncate_sh(c, 1).topRows(4) == c.topRows(4));
  CHECK(truncate_sh(c, 1).bottomRows(5).isZero());
  CHECK(truncate_sh(c, 2) == c);
}

TEST_CASE("negative reconstructions are clamped") {
  ShCoeffs c = ShCoeffs::Zero();
  c(2, 0) = 1.0;  // pure z lobe
  const LightEnv env = reconstruct_sh(c, 16);
  CHECK((env.radiance().array() >= 0.0).all());
  CHECK((reconstruct_sh_raw(c, env.grid()).array() < 0.0).any());
}

TEST_CASE("more bands never hurt the diffuse render") {
  const auto fields = ProbeFields::build(32);
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const LightEnv env = random_env(SceneSpec::clipped(seed));
    const ShCoeffs c = project_sh(env);
    const RadianceMat truth = render(fields.diffuse, env).pixels();
    const double l1_9 = testing::masked_mean_abs(env.grid(), render(fields.diffuse, reconstruct_sh(c, 32)).pixels(), truth);
    const double l1_1 =
        testing::masked_mean_abs(env.grid(), render(fields.diffuse, reconstruct_sh(truncate_sh(c, 0), 32)).pixels(), truth);
    INFO("seed " << seed);
    CHECK(l1_9 <= l1_1);
  }
}

TEST_CASE("order two is inadequate for a mirror") {
  const auto fields = ProbeFields::build(32);
  SceneSpec spec;
  spec.seed = 6;
  spec.n_sources = 1;
  spec.ambient_level = 0.0;
  spec.intensity_min = spec.intensity_max = 1.0;
  const LightEnv env = random_env(spec);
  const LightEnv sh = reconstruct_sh(project_sh(env), 32);
  const auto l1 = [&](const ReflectanceField& f) {
    return testing::masked_mean_abs(env.grid(), render(f, sh).pixels(), render(f, env).pixels());
  };
  CHECK(l1(fields.mirror) > l1(fields.diffuse));
}

TEST_CASE("smooth environments render nearly identically on the diffuse ball") {
  const auto fields = ProbeFields::build(32);
  std::mt19937_64 rng(31);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SceneSpec spec = SceneSpec::unclipped(seed);
    spec.max_mirror_response.reset();
    const LightEnv env = random_env(spec);
    const LightEnv sh = reconstruct_sh(project_sh(env), 32);
    CHECK(testing::masked_mean_abs(env.grid(), render(fields.diffuse, sh).pixels(),
                                   render(fields.diffuse, env).pixels()) < 0.02);
  }
}
