#pragma once

#include <cstdint>
#include <vector>

#include "sinr/filters.hpp"
#include "sinr/grid.hpp"
#include "sinr/metrics.hpp"
#include "sinr/mlp.hpp"
#include "sinr/training.hpp"

namespace sinr {

// A coordinate-sampled signal. derivs holds the derivative targets with
// column d*C + ch = d value_ch / d coord_d, one block of C columns per
// coordinate direction.
struct SampledSignal {
  Grid2D coords;  // [N x D]
  Grid2D values;  // [N x C]
  Grid2D derivs;  // [N x dirs*C]
  int dirs = 0;
};

// Reorder derivs into the stacked tangent-block layout training consumes.
DualBatch to_dual_batch(const SampledSignal& s);

// Pixel-center coordinate: 2 * (i + 0.5) / n - 1, so centers span
// [-1 + 1/n, 1 - 1/n].
double pixel_center_coord(int i, int n);

// [rows*cols x 2] coordinates in row-major pixel order. Column 0 is the
// horizontal coordinate u (from the pixel column), column 1 the vertical
// coordinate v (from the pixel row).
Grid2D image_coords(int rows, int cols);

// [n x 1] sample-center coordinates for a 1-D signal.
Grid2D signal_coords(int n);

// Rows of a [rows*cols x C] prediction back into an image grid.
Grid2D reshape_to_image(const Grid2D& flat, int rows, int cols, int channels);

// Whether derivative targets come from filtering the full-resolution signal
// (sampled at the kept pixels) or from filtering the downsampled signal.
enum class DerivSource { full_res, downsampled };

struct ImageDataConfig {
  int factor = 4;
  DerivFilter filter = DerivFilter::sobel;
  DerivSource deriv_source = DerivSource::full_res;
  DerivUnits units = DerivUnits::normalized;
  int psnr_border = 4;
};

struct ImageDataset {
  Grid2D image;                          // ground truth [H x W x C]
  SampledSignal train;                   // one sample per kept pixel
  std::vector<std::uint8_t> train_mask;  // H*W entries, 1 = trained pixel
  Grid2D eval_coords;                    // [H*W x 2]
  ImageDataConfig cfg;
};

ImageDataset build_image_dataset(const Grid2D& img, const ImageDataConfig& cfg);

// Pixels excluded from training, minus the border; falls back to the border
// mask alone when every pixel was trained (factor 1).
std::vector<std::uint8_t> image_eval_mask(const ImageDataset& ds);

// Model prediction over the full pixel grid.
Grid2D render_image(const Mlp& mlp, int rows, int cols);

// PSNR of the clamped render against ground truth under image_eval_mask.
double image_eval_psnr(const Mlp& mlp, const ImageDataset& ds);

struct AudioDataConfig {
  int factor = 5;
  DerivSource deriv_source = DerivSource::full_res;
  DerivUnits units = DerivUnits::normalized;
};

struct AudioDataset {
  std::vector<double> signal;            // ground truth
  SampledSignal train;                   // coords [N x 1]
  std::vector<std::uint8_t> train_mask;  // one entry per sample
  Grid2D eval_coords;                    // [n x 1]
  AudioDataConfig cfg;
};

AudioDataset build_audio_dataset(const std::vector<double>& signal, const AudioDataConfig& cfg);

std::vector<std::uint8_t> audio_eval_mask(const AudioDataset& ds);

std::vector<double> render_signal(const Mlp& mlp, int n);

// PSNR with range 2 (samples clamped to [-1, 1]) under audio_eval_mask.
double audio_eval_psnr(const Mlp& mlp, const AudioDataset& ds);

// --- end-to-end regression runs ---

struct ImageRunConfig {
  ImageDataConfig data;
  MlpConfig mlp;  // input_dim / output_dim are set by the runner
  TrainOptions train;
  std::uint64_t seed = 0;  // weight init stream
};

struct ImageRunResult {
  Mlp mlp;
  TrainResult log;
  Grid2D rendered;     // full-resolution prediction, unclamped
  double psnr = 0.0;   // held-out pixels, border-cropped
  double ssim = 0.0;   // luma SSIM on the border-cropped clamped render
};

ImageRunResult run_image_regression(const Grid2D& img, const ImageRunConfig& cfg);

struct AudioRunConfig {
  AudioDataConfig data;
  MlpConfig mlp;
  TrainOptions train;
  std::uint64_t seed = 0;
};

struct AudioRunResult {
  Mlp mlp;
  TrainResult log;
  std::vector<double> rendered;
  double psnr = 0.0;
};

AudioRunResult run_audio_regression(const std::vector<double>& signal,
                                    const AudioRunConfig& cfg);

}  // namespace sinr
