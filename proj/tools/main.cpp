// Command-line front door: trains coordinate networks on images, audio, and
// toy scenes, renders checkpoints, and sweeps activations. Every command
// writes a manifest.json recording the resolved config, content hashes of
// inputs and outputs, and final metrics; the manifest_hash field covers
// everything except wall-clock timing, so equal seeds give equal hashes.

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sinr/audio_io.hpp"
#include "sinr/filters.hpp"
#include "sinr/image_io.hpp"
#include "sinr/kernels.hpp"
#include "sinr/manifest.hpp"
#include "sinr/metrics.hpp"
#include "sinr/mlp.hpp"
#include "sinr/pipelines.hpp"
#include "sinr/radiance.hpp"
#include "sinr/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using namespace sinr;

const std::vector<std::string> kActNames = {"relu",     "elu",  "selu", "sigmoid",
                                            "softplus", "tanh", "sine"};

Act parse_act(const std::string& name) {
  Act a;
  if (!act_from_name(name, &a)) throw std::runtime_error("unknown activation: " + name);
  return a;
}

DerivFilter parse_filter(const std::string& name) {
  DerivFilter f;
  if (!filter_from_name(name, &f)) throw std::runtime_error("unknown filter: " + name);
  return f;
}

InitScheme parse_init(const std::string& name, Act act) {
  if (name == "auto") return default_init(act);
  if (name == "kaiming") return InitScheme::kaiming_normal;
  if (name == "xavier") return InitScheme::xavier_normal;
  if (name == "lecun") return InitScheme::lecun_normal;
  if (name == "siren") return InitScheme::siren_uniform;
  throw std::runtime_error("unknown init scheme: " + name);
}

std::string fmt_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, p);
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

// Shared network shape / activation flags.
struct NetOpts {
  std::string activation = "sine";
  double omega0 = 30.0;
  std::string init = "auto";
  bool pe = false;
  int pe_levels = 5;
  int width = 256;
  int layers = 4;
};

void add_net_flags(CLI::App* sub, NetOpts& o) {
  sub->add_option("--activation", o.activation, "hidden activation")
      ->check(CLI::IsMember(kActNames))
      ->capture_default_str();
  sub->add_option("--omega0", o.omega0, "sine frequency scale")->capture_default_str();
  sub->add_option("--init", o.init, "weight init scheme")
      ->check(CLI::IsMember({"auto", "kaiming", "xavier", "lecun", "siren"}))
      ->capture_default_str();
  sub->add_flag("--pe,!--no-pe", o.pe, "positional encoding on the input");
  sub->add_option("--pe-levels", o.pe_levels, "encoding frequency count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--width", o.width, "hidden layer width")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--layers", o.layers, "hidden layer count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

MlpConfig to_mlp_config(const NetOpts& o) {
  MlpConfig mc;
  mc.hidden_layers = o.layers;
  mc.hidden_width = o.width;
  mc.activation = Activation{parse_act(o.activation), o.omega0};
  mc.init = parse_init(o.init, mc.activation.kind);
  mc.pe_levels = o.pe ? o.pe_levels : 0;
  return mc;
}

json net_json(const NetOpts& o, const MlpConfig& mc) {
  return json{{"activation", o.activation},
              {"omega0", o.omega0},
              {"init", init_name(mc.init)},
              {"pe", o.pe},
              {"pe_levels", mc.pe_levels},
              {"width", o.width},
              {"layers", o.layers}};
}

// Shared optimization flags. Commands pick their own defaults before
// registering these.
struct TrainFlags {
  int iters = 50000;
  double lr = 1e-4;
  bool sobolev = true;
  double lambda = 1.0;
  int batch = 0;
  std::uint64_t seed = 0;
  int log_interval = 100;
};

void add_train_flags(CLI::App* sub, TrainFlags& o) {
  sub->add_option("--iters", o.iters, "training iterations")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--lr", o.lr, "Adam learning rate")->capture_default_str();
  sub->add_flag("--sobolev,!--no-sobolev", o.sobolev,
                "supervise derivatives alongside values");
  sub->add_option("--lambda", o.lambda, "derivative loss weight")->capture_default_str();
  sub->add_option("--batch", o.batch, "minibatch size, 0 = full batch")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sub->add_option("--seed", o.seed, "master RNG seed")->capture_default_str();
  sub->add_option("--log-interval", o.log_interval, "iterations between log rows")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

// A lambda without the Sobolev term weights nothing.
int reject_lambda_without_sobolev(const CLI::App* sub, const TrainFlags& o) {
  if (!o.sobolev && sub->count("--lambda") > 0) {
    std::fprintf(stderr, "error: --lambda has no effect with --no-sobolev; drop one\n");
    return 1;
  }
  return 0;
}

json train_json(const TrainFlags& o) {
  return json{{"iters", o.iters},     {"lr", o.lr},
              {"sobolev", o.sobolev}, {"lambda", o.sobolev ? o.lambda : 0.0},
              {"batch", o.batch},     {"seed", o.seed},
              {"log_interval", o.log_interval}};
}

void start_manifest(RunManifest& man, const std::string& command) {
  man.root()["command"] = command;
  man.root()["kernels"] = kernels::isa_name(kernels::active_isa());
}

int finish_manifest(RunManifest& man, const std::string& out_dir, const Timer& timer,
                    int rc) {
  man.root()["duration_seconds"] = timer.seconds();
  const std::string path = out_dir + "/manifest.json";
  man.write(path);
  std::printf("manifest: %s\n", path.c_str());
  return rc;
}

// Derivative map rescaled for dumping: 0.5 + d / (2 max|d|).
Grid2D deriv_to_image(const Grid2D& d) {
  double m = 0.0;
  const double* p = d.data();
  for (std::size_t i = 0; i < d.size(); ++i) m = std::max(m, std::fabs(p[i]));
  if (m == 0.0) m = 1.0;
  Grid2D out(d.rows(), d.cols(), d.channels());
  double* q = out.data();
  for (std::size_t i = 0; i < d.size(); ++i) q[i] = 0.5 + p[i] / (2.0 * m);
  return out;
}

json final_losses(const TrainResult& log) {
  json j = json::object();
  if (!log.history.empty()) {
    const LogRow& last = log.history.back();
    j["loss_value"] = last.loss_value;
    if (std::isfinite(last.loss_deriv)) j["loss_deriv"] = last.loss_deriv;
  }
  return j;
}

// --- fit-image ---

struct FitImageOpts {
  std::string image;
  std::string out = ".";
  NetOpts net;
  TrainFlags train{.iters = 50000, .lr = 1e-4};
  std::string filter = "sobel";
  int factor = 4;
  std::string deriv_source = "full";
};

int cmd_fit_image(const CLI::App* sub, const FitImageOpts& o) {
  if (int rc = reject_lambda_without_sobolev(sub, o.train)) return rc;
  fs::create_directories(o.out);
  const Grid2D img = load_png(o.image);

  ImageRunConfig cfg;
  cfg.data.factor = o.factor;
  cfg.data.filter = parse_filter(o.filter);
  cfg.data.deriv_source =
      o.deriv_source == "downsampled" ? DerivSource::downsampled : DerivSource::full_res;
  cfg.mlp = to_mlp_config(o.net);
  cfg.train.iterations = o.train.iters;
  cfg.train.adam.lr = o.train.lr;
  cfg.train.sobolev = o.train.sobolev;
  cfg.train.lambda = o.train.lambda;
  cfg.train.batch_size = o.train.batch;
  cfg.train.batch_seed = o.train.seed + 1;
  cfg.train.log_interval = o.train.log_interval;
  cfg.seed = o.train.seed;

  RunManifest man;
  start_manifest(man, "fit-image");
  man.root()["config"] = net_json(o.net, cfg.mlp);
  man.root()["config"].update(train_json(o.train));
  man.root()["config"]["filter"] = o.filter;
  man.root()["config"]["factor"] = o.factor;
  man.root()["config"]["deriv_source"] = o.deriv_source;
  man.root()["config"]["out"] = o.out;
  man.add_input(o.image);

  Timer timer;
  try {
    ImageRunResult res = run_image_regression(img, cfg);
    save_png(res.rendered, o.out + "/pred.png");
    auto [du, dv] = image_derivatives(res.rendered, cfg.data.filter);
    save_png(deriv_to_image(du), o.out + "/du.png");
    save_png(deriv_to_image(dv), o.out + "/dv.png");
    write_history_csv(res.log.history, o.out + "/metrics.csv");
    save_checkpoint(res.mlp, o.out + "/ckpt.bin");
    for (const char* f : {"pred.png", "du.png", "dv.png", "metrics.csv", "ckpt.bin"})
      man.add_output(o.out + "/" + f);
    man.root()["metrics"] = final_losses(res.log);
    man.root()["metrics"]["psnr"] = res.psnr;
    man.root()["metrics"]["ssim"] = res.ssim;
    man.root()["status"] = "ok";
    std::printf("fit-image: eval psnr %.2f dB, ssim %.4f\n", res.psnr, res.ssim);
  } catch (const DivergedError& e) {
    man.root()["status"] = std::string("diverged: ") + e.what();
    std::fprintf(stderr, "error: %s\n", e.what());
    return finish_manifest(man, o.out, timer, 2);
  }
  return finish_manifest(man, o.out, timer, 0);
}

// --- fit-audio ---

struct FitAudioOpts {
  std::string wav;
  std::string out = ".";
  NetOpts net;
  TrainFlags train{.iters = 50000, .lr = 5e-5};
  int factor = 5;
  std::string deriv_source = "full";
};

int cmd_fit_audio(const CLI::App* sub, const FitAudioOpts& o) {
  if (int rc = reject_lambda_without_sobolev(sub, o.train)) return rc;
  fs::create_directories(o.out);
  int rate = 0;
  const std::vector<double> signal = load_wav(o.wav, &rate);

  AudioRunConfig cfg;
  cfg.data.factor = o.factor;
  cfg.data.deriv_source =
      o.deriv_source == "downsampled" ? DerivSource::downsampled : DerivSource::full_res;
  cfg.mlp = to_mlp_config(o.net);
  cfg.train.iterations = o.train.iters;
  cfg.train.adam.lr = o.train.lr;
  cfg.train.sobolev = o.train.sobolev;
  cfg.train.lambda = o.train.lambda;
  cfg.train.batch_size = o.train.batch;
  cfg.train.batch_seed = o.train.seed + 1;
  cfg.train.log_interval = o.train.log_interval;
  cfg.seed = o.train.seed;

  RunManifest man;
  start_manifest(man, "fit-audio");
  man.root()["config"] = net_json(o.net, cfg.mlp);
  man.root()["config"].update(train_json(o.train));
  man.root()["config"]["factor"] = o.factor;
  man.root()["config"]["deriv_source"] = o.deriv_source;
  man.root()["config"]["sample_rate"] = rate;
  man.root()["config"]["out"] = o.out;
  man.add_input(o.wav);

  Timer timer;
  try {
    AudioRunResult res = run_audio_regression(signal, cfg);
    save_wav(res.rendered, rate, o.out + "/pred.wav");
    write_history_csv(res.log.history, o.out + "/metrics.csv");
    save_checkpoint(res.mlp, o.out + "/ckpt.bin");
    for (const char* f : {"pred.wav", "metrics.csv", "ckpt.bin"})
      man.add_output(o.out + "/" + f);
    man.root()["metrics"] = final_losses(res.log);
    man.root()["metrics"]["psnr"] = res.psnr;
    man.root()["status"] = "ok";
    std::printf("fit-audio: eval psnr %.2f dB over %zu samples\n", res.psnr, signal.size());
  } catch (const DivergedError& e) {
    man.root()["status"] = std::string("diverged: ") + e.what();
    std::fprintf(stderr, "error: %s\n", e.what());
    return finish_manifest(man, o.out, timer, 2);
  }
  return finish_manifest(man, o.out, timer, 0);
}

// --- scene helpers ---

struct SceneSource {
  std::string path;       // directory or .txt procedural spec
  bool toy_sphere = false;
  int views = 16;
  int size = 48;
};

void add_scene_source_flags(CLI::App* sub, SceneSource& o) {
  sub->add_option("scene", o.path, "scene directory or .txt procedural spec");
  sub->add_flag("--toy-sphere", o.toy_sphere, "use the built-in procedural sphere scene");
  sub->add_option("--views", o.views, "toy sphere: camera count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_option("--size", o.size, "toy sphere: image size in pixels")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

Scene resolve_scene(const SceneSource& o, RunManifest& man) {
  if (o.toy_sphere && !o.path.empty())
    throw std::runtime_error("give either a scene path or --toy-sphere, not both");
  if (!o.toy_sphere && o.path.empty())
    throw std::runtime_error("no scene given: pass a scene path or --toy-sphere");
  if (o.toy_sphere) {
    SphereSceneSpec spec;
    spec.views = o.views;
    spec.image_size = o.size;
    man.root()["config"]["scene"] = "toy-sphere";
    man.root()["config"]["views"] = o.views;
    man.root()["config"]["size"] = o.size;
    return make_sphere_scene(spec);
  }
  man.root()["config"]["scene"] = o.path;
  if (o.path.size() > 4 && o.path.substr(o.path.size() - 4) == ".txt") {
    man.add_input(o.path);
    return make_sphere_scene(parse_sphere_spec(o.path));
  }
  Scene scene = load_scene(o.path);
  const std::string table = fs::exists(o.path + "/poses_bounds.npy")
                                ? o.path + "/poses_bounds.npy"
                                : o.path + "/poses_bounds.bin";
  man.add_input(table);
  for (std::size_t i = 0; i < scene.views.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "/view_%03zu.png", i);
    man.add_input(o.path + buf);
  }
  return scene;
}

// --- fit-scene ---

struct FitSceneOpts {
  SceneSource scene;
  std::string out = ".";
  NetOpts net{.activation = "sine", .omega0 = 1.0, .init = "kaiming",
              .pe = true,           .pe_levels = 10, .width = 256,
              .layers = 8};
  TrainFlags train{.iters = 400000, .lr = 5e-4, .batch = 128, .log_interval = 500};
  std::string filter = "sobel";
  int samples = 64;
  int holdout = 8;
};

int cmd_fit_scene(const CLI::App* sub, const FitSceneOpts& o) {
  if (int rc = reject_lambda_without_sobolev(sub, o.train)) return rc;
  fs::create_directories(o.out);

  RunManifest man;
  start_manifest(man, "fit-scene");
  const Scene scene = resolve_scene(o.scene, man);

  SceneRunConfig cfg;
  cfg.mlp = to_mlp_config(o.net);
  cfg.samples_per_ray = o.samples;
  cfg.batch_rays = o.train.batch > 0 ? o.train.batch : 128;
  cfg.iterations = o.train.iters;
  cfg.sobolev = o.train.sobolev;
  cfg.lambda = o.train.lambda;
  cfg.filter = parse_filter(o.filter);
  cfg.adam.lr = o.train.lr;
  cfg.seed = o.train.seed;
  cfg.log_interval = o.train.log_interval;
  cfg.holdout_every = o.holdout;

  man.root()["config"].update(net_json(o.net, cfg.mlp));
  man.root()["config"].update(train_json(o.train));
  man.root()["config"]["batch"] = cfg.batch_rays;
  man.root()["config"]["filter"] = o.filter;
  man.root()["config"]["samples"] = o.samples;
  man.root()["config"]["holdout"] = o.holdout;
  man.root()["config"]["out"] = o.out;

  Timer timer;
  try {
    SceneRunResult res = run_inverse_rendering(scene, cfg);
    save_checkpoint(res.mlp, o.out + "/ckpt.bin");
    write_history_csv(res.log.history, o.out + "/metrics.csv");
    int heldout = 0;
    for (int i = 0; i < static_cast<int>(scene.views.size()); ++i)
      if (o.holdout > 0 && i % o.holdout == 0) {
        heldout = i;
        break;
      }
    save_png(render_view(res.mlp, scene, scene.views[heldout].pose, o.samples),
             o.out + "/heldout.png");
    for (const char* f : {"ckpt.bin", "metrics.csv", "heldout.png"})
      man.add_output(o.out + "/" + f);
    int eval_views = 0;
    for (int i = 0; i < static_cast<int>(scene.views.size()); ++i)
      if (o.holdout > 0 && i % o.holdout == 0) ++eval_views;
    if (eval_views == 0) eval_views = static_cast<int>(scene.views.size());
    man.root()["metrics"] = final_losses(res.log);
    man.root()["metrics"]["psnr"] = res.psnr;
    man.root()["status"] = "ok";
    std::printf("fit-scene: held-out psnr %.2f dB over %d views\n", res.psnr, eval_views);
  } catch (const DivergedError& e) {
    man.root()["status"] = std::string("diverged: ") + e.what();
    std::fprintf(stderr, "error: %s\n", e.what());
    return finish_manifest(man, o.out, timer, 2);
  }
  return finish_manifest(man, o.out, timer, 0);
}

// --- render ---

struct RenderOpts {
  std::string ckpt;
  SceneSource scene;
  std::string out = ".";
  int scale = 1;
  int samples = 64;
  int view = -1;
};

int cmd_render(const RenderOpts& o) {
  fs::create_directories(o.out);
  RunManifest man;
  start_manifest(man, "render");
  man.add_input(o.ckpt);
  const Scene scene = resolve_scene(o.scene, man);

  const Mlp mlp = load_checkpoint(o.ckpt);
  if (mlp.cfg.input_dim != 3 || mlp.cfg.output_dim != 4)
    throw std::runtime_error("checkpoint is not a scene field: expects " +
                             std::to_string(mlp.cfg.input_dim) + " -> " +
                             std::to_string(mlp.cfg.output_dim) + ", need 3 -> 4");

  man.root()["config"]["ckpt"] = o.ckpt;
  man.root()["config"]["scale"] = o.scale;
  man.root()["config"]["samples"] = o.samples;
  man.root()["config"]["view"] = o.view;
  man.root()["config"]["out"] = o.out;

  std::vector<int> targets;
  if (o.view >= 0) {
    if (o.view >= static_cast<int>(scene.views.size()))
      throw std::runtime_error("view index out of range");
    targets.push_back(o.view);
  } else {
    for (int i = 0; i < static_cast<int>(scene.views.size()); ++i) targets.push_back(i);
  }

  Timer timer;
  for (int vi : targets) {
    CameraPose pose = scene.views[vi].pose;
    pose.height *= o.scale;
    pose.width *= o.scale;
    pose.focal *= o.scale;
    char buf[32];
    std::snprintf(buf, sizeof buf, "/render_%03d.png", vi);
    save_png(render_view(mlp, scene, pose, o.samples), o.out + buf);
    man.add_output(o.out + buf);
  }
  man.root()["status"] = "ok";
  std::printf("render: %zu view(s) at %dx scale\n", targets.size(), o.scale);
  return finish_manifest(man, o.out, timer, 0);
}

// --- sweep-activations ---

struct SweepOpts {
  std::string image;
  std::string out = ".";
  TrainFlags train{.iters = 10000, .lr = 1e-4};
  std::string filter = "sobel";
  int factor = 4;
  int pe_levels = 5;
  int width = 256;
  int layers = 4;
};

int cmd_sweep(const SweepOpts& o) {
  if (!o.train.sobolev) {
    std::fprintf(stderr,
                 "error: sweep-activations compares derivative losses and always trains "
                 "jointly; drop --no-sobolev\n");
    return 1;
  }
  fs::create_directories(o.out);
  Grid2D img = load_png(o.image);
  if (img.channels() == 3) img = to_luma(img);

  RunManifest man;
  start_manifest(man, "sweep-activations");
  man.root()["config"] = train_json(o.train);
  man.root()["config"]["filter"] = o.filter;
  man.root()["config"]["factor"] = o.factor;
  man.root()["config"]["pe_levels"] = o.pe_levels;
  man.root()["config"]["width"] = o.width;
  man.root()["config"]["layers"] = o.layers;
  man.root()["config"]["out"] = o.out;
  man.add_input(o.image);

  Timer timer;
  std::string summary = "activation,pe,psnr,ssim,loss_val,loss_der\n";
  json metrics = json::object();
  for (const std::string& name : kActNames) {
    const Act act = parse_act(name);
    for (int pe = 0; pe < 2; ++pe) {
      if (pe && act == Act::sine) continue;  // matched init already covers high frequencies
      ImageRunConfig cfg;
      cfg.data.factor = o.factor;
      cfg.data.filter = parse_filter(o.filter);
      cfg.mlp.hidden_layers = o.layers;
      cfg.mlp.hidden_width = o.width;
      cfg.mlp.activation = Activation{act, 30.0};
      cfg.mlp.init = default_init(act);
      cfg.mlp.pe_levels = pe ? o.pe_levels : 0;
      cfg.train.iterations = o.train.iters;
      cfg.train.adam.lr = o.train.lr;
      cfg.train.sobolev = true;
      cfg.train.lambda = o.train.lambda;
      cfg.train.batch_size = o.train.batch;
      cfg.train.batch_seed = o.train.seed + 1;
      cfg.train.log_interval = o.train.log_interval;
      cfg.seed = o.train.seed;

      const std::string tag = pe ? name + "_pe" : name;
      try {
        ImageRunResult res = run_image_regression(img, cfg);
        const std::string curve = o.out + "/curve_" + tag + ".csv";
        write_history_csv(res.log.history, curve);
        man.add_output(curve);
        const LogRow& last = res.log.history.back();
        summary += name + "," + (pe ? "1" : "0") + "," + fmt_double(res.psnr) + "," +
                   fmt_double(res.ssim) + "," + fmt_double(last.loss_value) + "," +
                   fmt_double(last.loss_deriv) + "\n";
        metrics[tag] = {{"psnr", res.psnr}, {"loss_deriv", last.loss_deriv}};
        std::printf("sweep %-12s psnr %6.2f dB, final deriv loss %.3e\n", tag.c_str(),
                    res.psnr, last.loss_deriv);
      } catch (const DivergedError& e) {
        summary += name + "," + (pe ? "1" : "0") + ",nan,nan,nan,nan\n";
        metrics[tag] = {{"diverged", e.what()}};
        std::printf("sweep %-12s diverged: %s\n", tag.c_str(), e.what());
      }
    }
  }
  {
    std::ofstream f(o.out + "/summary.csv", std::ios::trunc);
    f << summary;
  }
  man.add_output(o.out + "/summary.csv");
  man.root()["metrics"] = metrics;
  man.root()["status"] = "ok";
  return finish_manifest(man, o.out, timer, 0);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coordinate network trainer with derivative supervision"};
  app.require_subcommand(1);

  FitImageOpts fi;
  CLI::App* fit_image = app.add_subcommand("fit-image", "fit a network to a PNG image");
  fit_image->set_config("--config", "", "plain-text key=value config file");
  fit_image->add_option("image", fi.image, "input PNG")->required();
  fit_image->add_option("--out", fi.out, "output directory")->capture_default_str();
  add_net_flags(fit_image, fi.net);
  add_train_flags(fit_image, fi.train);
  fit_image->add_option("--filter", fi.filter, "derivative stencil")
      ->check(CLI::IsMember({"sobel", "vanilla"}))
      ->capture_default_str();
  fit_image->add_option("--factor", fi.factor, "nearest-neighbor split factor")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  fit_image->add_option("--deriv-source", fi.deriv_source,
                        "filter the full-resolution or the downsampled image")
      ->check(CLI::IsMember({"full", "downsampled"}))
      ->capture_default_str();

  FitAudioOpts fa;
  CLI::App* fit_audio = app.add_subcommand("fit-audio", "fit a network to a mono WAV");
  fit_audio->set_config("--config", "", "plain-text key=value config file");
  fit_audio->add_option("wav", fa.wav, "input WAV (16-bit PCM mono)")->required();
  fit_audio->add_option("--out", fa.out, "output directory")->capture_default_str();
  add_net_flags(fit_audio, fa.net);
  add_train_flags(fit_audio, fa.train);
  fit_audio->add_option("--factor", fa.factor, "stride split factor")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  fit_audio->add_option("--deriv-source", fa.deriv_source,
                        "difference the full-resolution or the strided signal")
      ->check(CLI::IsMember({"full", "downsampled"}))
      ->capture_default_str();

  FitSceneOpts fsc;
  CLI::App* fit_scene =
      app.add_subcommand("fit-scene", "fit a radiance field to posed images");
  fit_scene->set_config("--config", "", "plain-text key=value config file");
  add_scene_source_flags(fit_scene, fsc.scene);
  fit_scene->add_option("--out", fsc.out, "output directory")->capture_default_str();
  add_net_flags(fit_scene, fsc.net);
  add_train_flags(fit_scene, fsc.train);
  fit_scene->add_option("--filter", fsc.filter, "derivative stencil for pixel targets")
      ->check(CLI::IsMember({"sobel", "vanilla"}))
      ->capture_default_str();
  fit_scene->add_option("--samples", fsc.samples, "depth samples per ray")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  fit_scene->add_option("--holdout", fsc.holdout, "every k-th view evaluates only")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  RenderOpts ro;
  CLI::App* render = app.add_subcommand("render", "render views from a scene checkpoint");
  render->add_option("ckpt", ro.ckpt, "checkpoint file")->required();
  add_scene_source_flags(render, ro.scene);
  render->add_option("--out", ro.out, "output directory")->capture_default_str();
  render->add_option("--scale", ro.scale, "resolution multiplier")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  render->add_option("--samples", ro.samples, "depth samples per ray")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  render->add_option("--view", ro.view, "view index, -1 = all")->capture_default_str();

  SweepOpts sw;
  CLI::App* sweep = app.add_subcommand(
      "sweep-activations", "joint training across all activations on one grayscale image");
  sweep->set_config("--config", "", "plain-text key=value config file");
  sweep->add_option("image", sw.image, "input PNG (converted to grayscale)")->required();
  sweep->add_option("--out", sw.out, "output directory")->capture_default_str();
  add_train_flags(sweep, sw.train);
  sweep->add_option("--filter", sw.filter, "derivative stencil")
      ->check(CLI::IsMember({"sobel", "vanilla"}))
      ->capture_default_str();
  sweep->add_option("--factor", sw.factor, "nearest-neighbor split factor")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sweep->add_option("--pe-levels", sw.pe_levels, "encoding frequency count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sweep->add_option("--width", sw.width, "hidden layer width")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sweep->add_option("--layers", sw.layers, "hidden layer count")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (fit_image->parsed()) return cmd_fit_image(fit_image, fi);
    if (fit_audio->parsed()) return cmd_fit_audio(fit_audio, fa);
    if (fit_scene->parsed()) return cmd_fit_scene(fit_scene, fsc);
    if (render->parsed()) return cmd_render(ro);
    if (sweep->parsed()) return cmd_sweep(sw);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
