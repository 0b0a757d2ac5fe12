#include "hdrprobe/gradcheck.hpp"
#include "hdrprobe/metrics.hpp"
#include "hdrprobe/promote.hpp"
#include "hdrprobe/shlight.hpp"
#include "hdrprobe/synth.hpp"

#include "test_util.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

using namespace hdrprobe;
using Catch::Matchers::WithinAbs;

namespace {

const FieldPyramid& pyramid() {
  static const FieldPyramid p = FieldPyramid::build(default_scales());
  return p;
}

BrdfImages render_all(const ProbeFields& fields, const LightEnv& env) {
  BrdfImages out;
  for (const Brdf brdf : kProbeBrdfs) out.push_back(render(fields.get(brdf), env));
  return out;
}

BrdfImages encode_all(const BrdfImages& linear) {
  BrdfImages out;
  for (const auto& img : linear) out.push_back(encode_gamma(img, 2.2));
  return out;
}

double full_loss(const RadianceMat& q, const GridPtr& grid, const std::vector<BrdfImages>& reference,
                 const LossWeights& weights) {
  const LightEnv env = LogLightEnv(grid, q).to_linear();
  return msrec_loss(render_probe_pyramid(pyramid(), env), reference, weights);
}

}  // namespace

TEST_CASE("soft clip reference values") {
  const auto [v, d] = soft_clip(0.5);
  CHECK(v == 0.5);
  CHECK(d == 1.0);
  CHECK(soft_clip(1e6).first == 1.0);
  CHECK(soft_clip(1.1).first == 1.0);
  CHECK(soft_clip(1.1).second == 0.0);
  CHECK_THAT(soft_clip(0.9).first, WithinAbs(0.9, 1e-15));
  CHECK(soft_clip(0.0).first == 0.0);
}

TEST_CASE("soft clip derivative matches central differences") {
  const double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const double x = 0.003 + 1.6 * i / 99.0;
    const double fd = (soft_clip(x + h).first - soft_clip(x - h).first) / (2 * h);
    INFO("x = " << x);
    CHECK_THAT(soft_clip(x).second, WithinAbs(fd, 1e-6));
  }
}

TEST_CASE("soft clip is a monotone saturating map") {
  double previous = -1.0;
  for (int i = 0; i <= 1000; ++i) {
    const double x = 3.0 * i / 1000.0;
    const auto [v, d] = soft_clip(x);
    CHECK(v >= previous);
    CHECK(v < 1.0 + 1e-9);
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
    if (x <= 0.9) CHECK(v == x);
    previous = v;
  }
}

TEST_CASE("reconstruction loss of matched inputs") {
  const auto fields = ProbeFields::build(16);
  SceneSpec spec = SceneSpec::unclipped(3);
  spec.resolution = 16;
  spec.max_mirror_response = 0.5;
  const LightEnv env = random_env(spec);
  const BrdfImages rendered = render_all(fields, env);
  const BrdfImages reference = encode_all(rendered);

  BrdfImages relinearized;
  for (const auto& img : reference) relinearized.push_back(linearize(img, 2.2));
  CHECK(rec_loss(relinearized, reference, LossWeights{}) < 1e-9);
  CHECK(rec_loss(rendered, reference, LossWeights{}) < 1e-9);

  const BrdfImages black = render_all(fields, LightEnv::zeros(16));
  CHECK(rec_loss(black, encode_all(black), LossWeights{}) == 0.0);
  CHECK(rec_loss(black, reference, LossWeights{}) > 0.0);
}

TEST_CASE("reconstruction loss ignores pixels outside the mask") {
  const auto fields = ProbeFields::build(16);
  std::mt19937_64 rng(1);
  const LightEnv env = testing::random_positive_env(16, rng, 0.0, 0.5);
  const SphereImage rendered = render(fields.diffuse, env);
  const SphereImage reference = encode_gamma(render(fields.diffuse, testing::random_positive_env(16, rng, 0.0, 0.5)), 2.2);
  RadianceMat outside = rendered.pixels();
  outside.row(0).setConstant(7.0);  // corner pixel
  const SphereImage altered(rendered.grid_ptr(), outside, Encoding::LinearHDR);
  CHECK(rec_loss_single(altered, reference, LossWeights{}) == rec_loss_single(rendered, reference, LossWeights{}));
  CHECK(rec_loss_single(rendered, reference, LossWeights{}) > 0.0);
}

TEST_CASE("reconstruction loss validates its inputs") {
  const auto f8 = ProbeFields::build(8);
  const auto f16 = ProbeFields::build(16);
  const SphereImage a = render(f8.diffuse, LightEnv::zeros(8));
  const SphereImage b = encode_gamma(render(f16.diffuse, LightEnv::zeros(16)), 2.2);
  CHECK_THROWS_AS(rec_loss_single(a, b, LossWeights{}), DomainError);
  CHECK_THROWS_AS(rec_loss_single(a, a, LossWeights{}), DomainError);
}

TEST_CASE("order-two lighting ranks diffuse, silver, mirror") {
  const auto fields = ProbeFields::build(32);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const LightEnv env = random_env(SceneSpec::clipped(seed));
    const LightEnv sh = reconstruct_sh(project_sh(env), 32);
    const BrdfImages rendered = render_all(fields, sh);
    const BrdfImages reference = encode_all(render_all(fields, env));
    const double mirror = rec_loss_single(rendered[0], reference[0], LossWeights{});
    const double diffuse = rec_loss_single(rendered[1], reference[1], LossWeights{});
    const double silver = rec_loss_single(rendered[2], reference[2], LossWeights{});
    INFO("seed " << seed << ": " << diffuse << " " << silver << " " << mirror);
    CHECK(diffuse < silver);
    CHECK(silver < mirror);
  }
}

TEST_CASE("multi-scale loss degenerate cases") {
  std::mt19937_64 rng(2);
  const LightEnv env = testing::random_positive_env(32, rng, 0.0, 0.4);
  const LightEnv other = testing::random_positive_env(32, rng, 0.0, 0.4);
  const auto rendered = render_probe_pyramid(pyramid(), env);
  const auto reference = reference_pyramid(pyramid(), other, 2.2);

  CHECK(msrec_loss(rendered, reference_pyramid(pyramid(), env, 2.2), LossWeights{}) < 1e-9);

  LossWeights zero;
  zero.lambda_s = {0, 0, 0, 0};
  CHECK(msrec_loss(rendered, reference, zero) == 0.0);

  const std::vector<BrdfImages> top_r{rendered.back()};
  const std::vector<BrdfImages> top_ref{reference.back()};
  CHECK(msrec_loss(top_r, top_ref, LossWeights{}) == rec_loss(rendered.back(), reference.back(), LossWeights{}));

  CHECK_THROWS_AS(msrec_loss(rendered, top_ref, LossWeights{}), DomainError);
  LossWeights wrong;
  wrong.lambda_s = {1, 1};
  CHECK_THROWS_AS(msrec_loss(rendered, reference, wrong), DomainError);
}

TEST_CASE("gradient vanishes at a smooth minimum") {
  SceneSpec spec = SceneSpec::unclipped(5);
  spec.max_mirror_response = 0.5;
  const LogLightEnv q = LogLightEnv::from_linear(random_env(spec));
  const auto reference = reference_pyramid(pyramid(), q.to_linear(), 2.2);
  const LossGradient g = loss_gradient(q, pyramid(), reference, LossWeights{});
  CHECK(g.loss < 1e-12);
  CHECK(g.dq.cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("gradient matches full re-rendering finite differences") {
  const GradCheckProblem problem = make_gradcheck_problem(3, pyramid());
  const LossWeights weights;
  const LossGradient g = loss_gradient(problem.q, pyramid(), problem.reference, weights);
  CHECK_THAT(g.loss, WithinAbs(full_loss(problem.q.q(), problem.q.grid_ptr(), problem.reference, weights), 1e-12));

  const GradCheckReport report = finite_difference_check(problem.q, pyramid(), problem.reference, weights);
  const auto& cells = problem.q.grid().masked_cells();
  const double h = 1e-4;
  int compared = 0;
  for (std::size_t i = 0; i < cells.size() && compared < 12; i += 67) {
    const auto cell = cells[i];
    for (int c = 0; c < 3; ++c) {
      if (std::abs(g.dq(cell, c)) <= 1e-7 || report.fd_gradient(cell, c) == 0.0) continue;
      RadianceMat plus = problem.q.q(), minus = problem.q.q();
      plus(cell, c) += h;
      minus(cell, c) -= h;
      const double fd = (full_loss(plus, problem.q.grid_ptr(), problem.reference, weights) -
                         full_loss(minus, problem.q.grid_ptr(), problem.reference, weights)) /
                        (2 * h);
      INFO("cell " << cell << " channel " << c);
      CHECK(std::abs(fd - g.dq(cell, c)) <= 1e-4 * std::abs(g.dq(cell, c)));
      CHECK(std::abs(fd - report.fd_gradient(cell, c)) <= 1e-6 * std::abs(fd) + 1e-12);
      ++compared;
    }
  }
  CHECK(compared >= 10);
}

TEST_CASE("finite-difference check passes and degrades with a coarse step") {
  const GradCheckProblem problem = make_gradcheck_problem(1, pyramid());
  const GradCheckReport fine = finite_difference_check(problem.q, pyramid(), problem.reference, LossWeights{});
  CHECK(fine.max_rel_error < 1e-4);
  CHECK(fine.cells_checked > 1000);
  GradCheckOptions coarse;
  coarse.h = 1e-2;
  const GradCheckReport rough = finite_difference_check(problem.q, pyramid(), problem.reference, LossWeights{}, coarse);
  CHECK(rough.max_rel_error > fine.max_rel_error);
}

TEST_CASE("brighter references push the descent direction toward more light") {
  LossWeights diffuse_only;
  diffuse_only.lambda_k = {0.0, 1.0, 0.0};
  SceneSpec spec = SceneSpec::unclipped(7);
  spec.max_mirror_response = 0.3;
  const LogLightEnv q = LogLightEnv::from_linear(random_env(spec));
  spec.seed = 8;
  const LightEnv target = random_env(spec);
  double previous = -std::numeric_limits<double>::infinity();
  for (const double gain : {0.6, 0.9, 1.1, 1.5}) {
    const LightEnv brighter(target.grid_ptr(), target.radiance() * gain);
    const LossGradient g = loss_gradient(q, pyramid(), reference_pyramid(pyramid(), brighter, 2.2), diffuse_only);
    const double descent = -g.dq.sum();
    INFO("gain " << gain << " descent " << descent);
    CHECK(descent > previous);
    previous = descent;
  }
}

TEST_CASE("relative radiance difference reference values") {
  std::mt19937_64 rng(8);
  const LightEnv gt = testing::random_positive_env(32, rng, 0.1, 1.0);
  CHECK(relative_radiance_diff(gt, gt).isZero(0.0));
  CHECK((relative_radiance_diff(gt, LightEnv::zeros(32)) == 1.0).all());
  const Eigen::Array3d doubled = relative_radiance_diff(gt, LightEnv(gt.grid_ptr(), 2.0 * gt.radiance()));
  CHECK((doubled == -1.0).all());
  CHECK_THROWS_AS(relative_radiance_diff(LightEnv::zeros(32), gt), DegenerateInputError);
  CHECK_THROWS_AS(relative_radiance_diff(gt, LightEnv::zeros(16)), DomainError);
}

TEST_CASE("promoted scenes keep total radiance within ten percent") {
  const auto fields = ProbeFields::build(32);
  for (std::uint64_t seed = 20; seed < 26; ++seed) {
    const LightEnv env = random_env(SceneSpec::clipped(seed));
    const PromoteResult result =
        promote(make_probes(env, fields, SolverConfig{}, true), fields.diffuse, fields.silver);
    INFO("seed " << seed);
    CHECK((relative_radiance_diff(env, result.env).abs() <= 0.10).all());
  }
}
