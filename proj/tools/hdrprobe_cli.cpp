#include "hdrprobe/gradcheck.hpp"
#include "hdrprobe/metrics.hpp"
#include "hdrprobe/probeio.hpp"
#include "hdrprobe/promote.hpp"
#include "hdrprobe/shlight.hpp"
#include "hdrprobe/synth.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

using namespace hdrprobe;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitTolerance = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  int basis_res = 32;
  double gamma = 2.2;
  double reflectivity = 0.827;
  double lambda_reg = 0.5;
  int threads = 1;

  BrdfParams brdf() const {
    BrdfParams p;
    p.mirror_reflectivity = reflectivity;
    return p;
  }
  SolverConfig solver(bool float_inputs) const {
    SolverConfig c = float_inputs ? SolverConfig::for_float_inputs() : SolverConfig{};
    c.gamma = gamma;
    c.mirror_reflectivity = reflectivity;
    c.lambda_reg = lambda_reg;
    return c;
  }
  LossWeights loss() const {
    LossWeights w;
    w.gamma = gamma;
    return w;
  }
};

void report(const std::string& name, double value) { std::printf("%s %.9g\n", name.c_str(), value); }

bool has_ext(const fs::path& p, const char* ext) { return p.extension() == ext; }

void require_exists(const fs::path& p) {
  if (!fs::exists(p)) throw FormatError("no such file: " + p.string());
}

SphereImage load_probe(const fs::path& p) {
  require_exists(p);
  if (has_ext(p, ".png")) return read_probe(p);
  if (has_ext(p, ".pfm")) return read_sphere_pfm(p, Encoding::GammaLDR);
  throw UsageError("probe images must be .png or .pfm: " + p.string());
}

LightEnv load_env(const fs::path& p) {
  require_exists(p);
  return read_env(p);
}

void save_image(const fs::path& p, const SphereImage& linear, double gamma) {
  if (has_ext(p, ".png")) {
    write_probe(p, quantize_probe(encode_gamma(linear, gamma)));
  } else if (has_ext(p, ".pfm")) {
    write_sphere_pfm(p, linear);
  } else {
    throw UsageError("output must be .png or .pfm: " + p.string());
  }
}

/// Scales of the default pyramid that fit the resolution, plus the
/// resolution itself.
std::vector<int> scales_for(int res) {
  std::vector<int> out;
  for (const int s : default_scales()) {
    if (s < res && res % s == 0) out.push_back(s);
  }
  out.push_back(res);
  return out;
}

int cmd_promote(const Globals& g, const std::vector<std::string>& inputs, const fs::path& output) {
  const SphereImage diffuse = load_probe(inputs[0]);
  const SphereImage silver = load_probe(inputs[1]);
  const SphereImage mirror = load_probe(inputs[2]);
  const bool float_inputs = has_ext(inputs[2], ".pfm");
  const SolverConfig config = g.solver(float_inputs);
  if (mirror.resolution() != g.basis_res) {
    throw UsageError("mirror probe resolution " + std::to_string(mirror.resolution()) +
                     " does not match --basis-res " + std::to_string(g.basis_res));
  }
  const ProbeTriplet probes = ProbeTriplet::from_ldr(diffuse, silver, mirror, config.clip_threshold);
  const auto fields = ProbeFields::build(g.basis_res, g.brdf());
  const PromoteResult r = promote(probes, fields.diffuse, fields.silver, config);
  write_env(output, r.env);
  report("unknowns", double(r.unknowns));
  report("rows", double(r.rows));
  report("iterations", r.iterations);
  report("kkt_residual", r.kkt_residual);
  report("underdetermined", r.underdetermined ? 1 : 0);
  if (r.balance) {
    report("balance_r", r.balance->r_avg);
    report("balance_g", r.balance->g_avg);
    report("balance_b", r.balance->b_avg);
  }
  return kExitOk;
}

int cmd_render(const Globals& g, const fs::path& input, const std::string& brdf_name, int scale,
               const fs::path& output) {
  const Brdf brdf = brdf_from_string(brdf_name);
  LightEnv env = load_env(input);
  if (scale > 0 && scale != env.resolution()) {
    if (env.resolution() % scale != 0) throw UsageError("--scale must divide the environment resolution");
    env = downsample_env(env, env.resolution() / scale);
  }
  const ReflectanceField field = make_field(brdf, env.grid_ptr(), g.brdf());
  const SphereImage img = render(field, env);
  save_image(output, img, g.gamma);
  report("resolution", env.resolution());
  report("max_pixel", img.pixels().maxCoeff());
  return kExitOk;
}

int cmd_compare(const Globals& g, const fs::path& gt_path, const fs::path& pred_path) {
  const LightEnv gt = load_env(gt_path);
  const LightEnv pred = load_env(pred_path);
  if (gt.resolution() != pred.resolution()) throw UsageError("environments must share one resolution");
  const LossWeights weights = g.loss();
  const FieldPyramid pyramid = FieldPyramid::build(scales_for(gt.resolution()), g.brdf());
  const auto reference = reference_pyramid(pyramid, gt, g.gamma);
  const auto rendered = render_probe_pyramid(pyramid, pred);
  const char* names[] = {"rec_loss_mirror", "rec_loss_diffuse", "rec_loss_silver"};
  for (std::size_t k = 0; k < kProbeBrdfs.size(); ++k) {
    report(names[k], rec_loss_single(rendered.back()[k], reference.back()[k], weights));
  }
  report("rec_loss", rec_loss(rendered.back(), reference.back(), weights));
  report("msrec_loss", msrec_loss(rendered, reference, weights));
  const Eigen::Array3d rel = relative_radiance_diff(gt, pred);
  report("rel_radiance_r", rel(0));
  report("rel_radiance_g", rel(1));
  report("rel_radiance_b", rel(2));
  return kExitOk;
}

int cmd_sh(const fs::path& input, const std::string& reconstruct) {
  const LightEnv env = load_env(input);
  const ShCoeffs c = project_sh(env);
  const char* names[] = {"sh_r", "sh_g", "sh_b"};
  for (int ch = 0; ch < 3; ++ch) {
    std::printf("%s", names[ch]);
    for (int i = 0; i < kShCount; ++i) std::printf(" %.9g", c(i, ch));
    std::printf("\n");
  }
  if (!reconstruct.empty()) write_env(reconstruct, reconstruct_sh(c, env.resolution()));
  return kExitOk;
}

struct SynthArgs {
  std::uint64_t seed = 0;
  int sources = -1;
  std::string preset = "clipped";
  bool quantize = true;
  int count = 1;
  fs::path out = ".";
};

SceneSpec preset_spec(const std::string& preset, std::uint64_t seed) {
  if (preset == "clipped") return SceneSpec::clipped(seed);
  if (preset == "unclipped") return SceneSpec::unclipped(seed);
  if (preset == "hued") return SceneSpec::strongly_hued(seed);
  throw UsageError("unknown preset: " + preset);
}

void synth_one(const Globals& g, const SynthArgs& a, std::uint64_t seed, const ProbeFields& fields,
               const fs::path& dir) {
  SceneSpec spec = preset_spec(a.preset, seed);
  spec.resolution = g.basis_res;
  spec.quantize_8bit = a.quantize;
  if (a.sources >= 0) spec.n_sources = a.sources;
  const LightEnv env = random_env(spec, g.reflectivity);
  const SolverConfig config = g.solver(!a.quantize);
  const ProbeTriplet probes = make_probes(env, fields, config, a.quantize);

  fs::create_directories(dir);
  write_env(dir / "env.pfm", env);
  const char* ext = a.quantize ? ".png" : ".pfm";
  const std::pair<const char*, const SphereImage*> images[] = {
      {"diffuse", &probes.diffuse}, {"silver", &probes.silver}, {"mirror", &probes.mirror}};
  for (const auto& [name, img] : images) {
    const fs::path p = dir / (std::string(name) + ext);
    if (a.quantize) {
      write_probe(p, *img);
    } else {
      write_sphere_pfm(p, *img);
    }
  }
  std::string manifest = spec.describe();
  manifest += "clipped_mirror_entries " + std::to_string(probes.mirror_clip.count()) + "\n";
  write_bytes(dir / "manifest.txt", std::vector<std::uint8_t>(manifest.begin(), manifest.end()));
}

int cmd_synth(const Globals& g, const SynthArgs& a) {
  const auto fields = ProbeFields::build(g.basis_res, g.brdf());
  if (a.count == 1) {
    synth_one(g, a, a.seed, fields, a.out);
    report("seed", double(a.seed));
    return kExitOk;
  }
  std::atomic<int> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (int i = next++; i < a.count; i = next++) {
      const std::uint64_t seed = a.seed + std::uint64_t(i);
      try {
        synth_one(g, a, seed, fields, a.out / ("scene_" + std::to_string(seed)));
      } catch (...) {
        const std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < std::max(1, std::min(g.threads, a.count)); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  report("scenes", a.count);
  return kExitOk;
}

int cmd_gradcheck(const Globals& g, std::uint64_t seed, double h, const std::vector<int>& scales) {
  const FieldPyramid pyramid = FieldPyramid::build(scales, g.brdf());
  const GradCheckProblem problem = make_gradcheck_problem(seed, pyramid, g.gamma);
  GradCheckOptions options;
  options.h = h;
  const GradCheckReport r = finite_difference_check(problem.q, pyramid, problem.reference, g.loss(), options);
  report("loss", r.loss);
  report("max_rel_error", r.max_rel_error);
  report("cells_checked", double(r.cells_checked));
  report("cells_skipped_nonsmooth", double(r.cells_skipped_nonsmooth));
  const bool pass = r.max_rel_error < 1e-4;
  std::printf("status %s\n", pass ? "PASS" : "FAIL");
  return pass ? kExitOk : kExitTolerance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HDR lighting from clipped light-probe triplets"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--basis-res", g.basis_res, "Lighting basis resolution")->check(CLI::Range(2, 4096));
  app.add_option("--gamma", g.gamma, "Display gamma")->check(CLI::PositiveNumber);
  app.add_option("--reflectivity", g.reflectivity, "Mirror-ball reflectivity")->check(CLI::Range(1e-6, 1.0));
  app.add_option("--lambda-reg", g.lambda_reg, "Color-balance regularization weight")->check(CLI::NonNegativeNumber);
  app.add_option("--threads", g.threads, "Worker threads for batch synthesis")->check(CLI::Range(1, 1024));

  std::vector<std::string> probe_inputs;
  std::string promote_out;
  auto* promote_cmd = app.add_subcommand("promote", "Recover HDR lighting from diffuse, silver and mirror probes");
  promote_cmd->add_option("probes", probe_inputs, "diffuse silver mirror (.png or .pfm)")->required()->expected(3);
  promote_cmd->add_option("-o,--output", promote_out, "Output environment (.pfm)")->required();

  std::string render_in, render_out, render_brdf = "diffuse";
  int render_scale = 0;
  auto* render_cmd = app.add_subcommand("render", "Render a probe sphere under an environment");
  render_cmd->add_option("env", render_in, "Environment (.pfm)")->required();
  render_cmd->add_option("--brdf", render_brdf, "mirror, diffuse or silver");
  render_cmd->add_option("--scale", render_scale, "Render at this resolution");
  render_cmd->add_option("-o,--output", render_out, "Output image (.png or .pfm)")->required();

  std::string gt_path, pred_path;
  auto* compare_cmd = app.add_subcommand("compare", "Compare two environments");
  compare_cmd->add_option("gt", gt_path, "Ground-truth environment")->required();
  compare_cmd->add_option("pred", pred_path, "Predicted environment")->required();

  std::string sh_in, sh_out;
  auto* sh_cmd = app.add_subcommand("sh", "Order-two spherical harmonics projection");
  sh_cmd->add_option("env", sh_in, "Environment (.pfm)")->required();
  sh_cmd->add_option("--reconstruct", sh_out, "Write the reconstruction here");

  SynthArgs synth;
  std::string synth_out = ".";
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic scene and its probes");
  synth_cmd->add_option("--seed", synth.seed);
  synth_cmd->add_option("--sources", synth.sources, "Override the preset's source count");
  synth_cmd->add_option("--preset", synth.preset, "clipped, unclipped or hued");
  synth_cmd->add_flag("--quantize,!--no-quantize", synth.quantize, "8-bit PNG probes (default) or float maps");
  synth_cmd->add_option("--count", synth.count, "Consecutive seeds to generate")->check(CLI::Range(1, 1000000));
  synth_cmd->add_option("-o,--output", synth_out, "Output directory");

  std::uint64_t grad_seed = 0;
  double grad_h = 1e-4;
  std::vector<int> grad_scales = default_scales();
  auto* grad_cmd = app.add_subcommand("gradcheck", "Verify the loss gradient against finite differences");
  grad_cmd->set_help_flag("--help", "Print this help message and exit");
  grad_cmd->add_option("--seed", grad_seed);
  grad_cmd->add_option("--h", grad_h, "Finite-difference step")->check(CLI::PositiveNumber);
  grad_cmd->add_option("--scales", grad_scales, "Pyramid resolutions")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*promote_cmd) return cmd_promote(g, probe_inputs, promote_out);
    if (*render_cmd) return cmd_render(g, render_in, render_brdf, render_scale, render_out);
    if (*compare_cmd) return cmd_compare(g, gt_path, pred_path);
    if (*sh_cmd) return cmd_sh(sh_in, sh_out);
    if (*synth_cmd) {
      synth.out = synth_out;
      return cmd_synth(g, synth);
    }
    if (*grad_cmd) return cmd_gradcheck(g, grad_seed, grad_h, grad_scales);
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << " (KKT violation " << e.kkt_violation() << ")\n";
    return kExitTolerance;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
