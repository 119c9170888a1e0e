#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "sinr/audio_io.hpp"
#include "sinr/grid.hpp"
#include "sinr/image_io.hpp"

using namespace sinr;
namespace fs = std::filesystem;

namespace {

const std::string kCli = SINR_CLI_PATH;
const std::string kWork = "/tmp/sinr_cli_tests";

// Runs the binary with everything silenced; returns the exit code.
int run_cli(const std::string& args) {
  const std::string cmd = kCli + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return status < 0 ? status : WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string manifest_hash(const std::string& dir) {
  const auto man = nlohmann::json::parse(slurp(dir + "/manifest.json"));
  REQUIRE(man.at("status") == "ok");
  return man.at("manifest_hash").get<std::string>();
}

struct Workspace {
  Workspace() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);

    Grid2D img(12, 12, 3);
    for (int r = 0; r < 12; ++r)
      for (int c = 0; c < 12; ++c)
        for (int ch = 0; ch < 3; ++ch)
          img(r, c, ch) = 0.5 + 0.4 * std::sin(0.5 * c + 0.8 * ch) * std::cos(0.4 * r);
    save_png(img, kWork + "/input.png");

    std::vector<double> tone(240);
    for (int i = 0; i < 240; ++i) tone[i] = 0.7 * std::sin(2.0 * 3.14159265 * 440.0 * i / 8000.0);
    save_wav(tone, 8000, kWork + "/tone.wav");
  }
};

const Workspace& workspace() {
  static Workspace w;
  return w;
}

const std::string kImageArgs =
    " --width 8 --layers 1 --pe-levels 2 --omega0 10 --iters 60 --log-interval 30 --factor 2 "
    "--lr 1e-3";

}  // namespace

TEST_CASE("help succeeds and an unknown subcommand fails") {
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("fit-image --help") == 0);
  CHECK(run_cli("frobnicate") != 0);
  CHECK(run_cli("") != 0);  // a subcommand is required
}

TEST_CASE("fit-image rejects missing inputs and bad flag values") {
  workspace();
  CHECK(run_cli("fit-image /tmp/sinr_no_such_image.png --out " + kWork + "/x") != 0);
  CHECK(run_cli("fit-image " + kWork + "/input.png --activation bogus") != 0);
  CHECK(run_cli("fit-image " + kWork + "/input.png --iters 0") != 0);
}

TEST_CASE("fit-image writes its outputs and reruns byte-identically per seed") {
  workspace();
  const std::string a = kWork + "/img_a", c = kWork + "/img_c";
  REQUIRE(run_cli("fit-image " + kWork + "/input.png" + kImageArgs + " --seed 3 --out " + a) == 0);
  for (const char* f : {"pred.png", "du.png", "dv.png", "metrics.csv", "ckpt.bin",
                        "manifest.json"})
    CHECK(fs::exists(a + "/" + f));

  // The manifest covers the output paths, so the repeat goes to the same
  // directory after the first run's bytes are set aside.
  const std::string ckpt1 = slurp(a + "/ckpt.bin");
  const std::string csv1 = slurp(a + "/metrics.csv");
  const std::string hash1 = manifest_hash(a);
  REQUIRE(run_cli("fit-image " + kWork + "/input.png" + kImageArgs + " --seed 3 --out " + a) == 0);
  CHECK(slurp(a + "/ckpt.bin") == ckpt1);
  CHECK(slurp(a + "/metrics.csv") == csv1);
  CHECK(manifest_hash(a) == hash1);

  REQUIRE(run_cli("fit-image " + kWork + "/input.png" + kImageArgs + " --seed 4 --out " + c) == 0);
  CHECK(slurp(a + "/ckpt.bin") != slurp(c + "/ckpt.bin"));
}

TEST_CASE("fit-audio trains on a wav and value-only runs drop the derivative column") {
  workspace();
  const std::string out = kWork + "/aud";
  REQUIRE(run_cli("fit-audio " + kWork + "/tone.wav --width 8 --layers 1 --iters 40 "
                  "--log-interval 20 --factor 5 --lr 1e-3 --no-sobolev --out " + out) == 0);
  for (const char* f : {"pred.wav", "metrics.csv", "ckpt.bin", "manifest.json"})
    CHECK(fs::exists(out + "/" + f));
  // Without derivative supervision the loss_der column is logged as nan.
  const std::string csv = slurp(out + "/metrics.csv");
  CHECK(csv.find(",nan,") != std::string::npos);
  CHECK(run_cli("fit-audio /tmp/sinr_no_such.wav --out " + out) != 0);
}

TEST_CASE("fit-scene then render round-trips a checkpoint; mismatched ckpts fail") {
  workspace();
  const std::string out = kWork + "/scene";
  REQUIRE(run_cli("fit-scene --toy-sphere --views 4 --size 10 --width 8 --layers 1 "
                  "--pe-levels 2 --samples 3 --batch 8 --iters 20 --log-interval 10 "
                  "--holdout 2 --out " + out) == 0);
  for (const char* f : {"ckpt.bin", "metrics.csv", "heldout.png", "manifest.json"})
    CHECK(fs::exists(out + "/" + f));

  const std::string rdir = kWork + "/render";
  REQUIRE(run_cli("render " + out + "/ckpt.bin --toy-sphere --views 4 --size 10 --samples 3 "
                  "--view 1 --out " + rdir) == 0);
  CHECK(fs::exists(rdir + "/render_001.png"));
  CHECK_FALSE(fs::exists(rdir + "/render_000.png"));

  // Out-of-range view index and a 2-D image checkpoint are both rejected.
  CHECK(run_cli("render " + out + "/ckpt.bin --toy-sphere --views 4 --size 10 --view 9 --out " +
                rdir) != 0);
  const std::string img_out = kWork + "/img_for_render";
  REQUIRE(run_cli("fit-image " + kWork + "/input.png" + kImageArgs + " --out " + img_out) == 0);
  CHECK(run_cli("render " + img_out + "/ckpt.bin --toy-sphere --views 4 --size 10 --out " +
                rdir) != 0);
}

TEST_CASE("activation sweep writes a summary row per configuration") {
  workspace();
  const std::string out = kWork + "/sweep";
  // Derivative-loss comparisons are the whole point; value-only is refused.
  CHECK(run_cli("sweep-activations " + kWork + "/input.png --no-sobolev --out " + out) != 0);

  REQUIRE(run_cli("sweep-activations " + kWork + "/input.png --width 8 --layers 1 "
                  "--pe-levels 2 --iters 20 --log-interval 10 --factor 2 --lr 1e-3 --out " +
                  out) == 0);
  const std::string summary = slurp(out + "/summary.csv");
  CHECK(summary.rfind("activation,pe,psnr,ssim,loss_val,loss_der\n", 0) == 0);
  int lines = 0;
  for (char ch : summary)
    if (ch == '\n') ++lines;
  CHECK(lines == 14);  // header + 6 activations x {raw, encoded} + sine raw only
  CHECK(fs::exists(out + "/curve_sine.csv"));
  CHECK(fs::exists(out + "/curve_relu_pe.csv"));
  CHECK(fs::exists(out + "/manifest.json"));
}
