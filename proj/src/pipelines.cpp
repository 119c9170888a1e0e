#include "sinr/pipelines.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace sinr {

DualBatch to_dual_batch(const SampledSignal& s) {
  DualBatch b;
  b.values = s.values;
  b.dirs = s.dirs;
  if (s.dirs > 0) {
    const int n = s.values.rows();
    const int c = s.values.cols();
    if (s.derivs.rows() != n || s.derivs.cols() != s.dirs * c)
      throw std::invalid_argument("to_dual_batch: derivs must be [N x dirs*C]");
    b.tangents = Grid2D(s.dirs * n, c);
    for (int d = 0; d < s.dirs; ++d)
      for (int i = 0; i < n; ++i)
        for (int ch = 0; ch < c; ++ch) b.tangents(d * n + i, ch) = s.derivs(i, d * c + ch);
  }
  return b;
}

double pixel_center_coord(int i, int n) { return 2.0 * (i + 0.5) / n - 1.0; }

Grid2D image_coords(int rows, int cols) {
  Grid2D out(rows * cols, 2);
  int idx = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c, ++idx) {
      out(idx, 0) = pixel_center_coord(c, cols);
      out(idx, 1) = pixel_center_coord(r, rows);
    }
  return out;
}

Grid2D signal_coords(int n) {
  Grid2D out(n, 1);
  for (int i = 0; i < n; ++i) out(i, 0) = pixel_center_coord(i, n);
  return out;
}

Grid2D reshape_to_image(const Grid2D& flat, int rows, int cols, int channels) {
  if (flat.rows() != rows * cols || flat.cols() != channels || flat.channels() != 1)
    throw std::invalid_argument("reshape_to_image: prediction is " + std::to_string(flat.rows()) +
                                "x" + std::to_string(flat.cols()) + ", expected " +
                                std::to_string(rows * cols) + "x" + std::to_string(channels));
  Grid2D img(rows, cols, channels);
  int idx = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c, ++idx)
      for (int ch = 0; ch < channels; ++ch) img(r, c, ch) = flat(idx, ch);
  return img;
}

ImageDataset build_image_dataset(const Grid2D& img, const ImageDataConfig& cfg) {
  if (img.rows() < 1 || img.cols() < 1)
    throw std::invalid_argument("build_image_dataset: empty image");
  const int rows = img.rows(), cols = img.cols(), chans = img.channels();

  ImageDataset ds;
  ds.image = img;
  ds.cfg = cfg;
  ds.eval_coords = image_coords(rows, cols);

  const Downsampled down = downsample_nearest(img, cfg.factor);
  const int n = static_cast<int>(down.kept.size());
  ds.train_mask.assign(static_cast<std::size_t>(rows) * cols, 0);
  for (int idx : down.kept) ds.train_mask[idx] = 1;

  SampledSignal& tr = ds.train;
  tr.dirs = 2;
  tr.coords = Grid2D(n, 2);
  tr.values = Grid2D(n, chans);
  tr.derivs = Grid2D(n, 2 * chans);
  for (int i = 0; i < n; ++i) {
    const int r = down.kept[i] / cols;
    const int c = down.kept[i] % cols;
    tr.coords(i, 0) = pixel_center_coord(c, cols);
    tr.coords(i, 1) = pixel_center_coord(r, rows);
    for (int ch = 0; ch < chans; ++ch) tr.values(i, ch) = img(r, c, ch);
  }

  const double gain = filter_gain(cfg.filter);
  if (cfg.deriv_source == DerivSource::full_res) {
    const auto [du, dv] = image_derivatives(img, cfg.filter);
    const double su = deriv_scale(cfg.units, gain, cols);
    const double sv = deriv_scale(cfg.units, gain, rows);
    for (int i = 0; i < n; ++i) {
      const int r = down.kept[i] / cols;
      const int c = down.kept[i] % cols;
      for (int ch = 0; ch < chans; ++ch) {
        tr.derivs(i, ch) = du(r, c, ch) * su;
        tr.derivs(i, chans + ch) = dv(r, c, ch) * sv;
      }
    }
  } else {
    const auto [du, dv] = image_derivatives(down.image, cfg.filter);
    const double su = deriv_scale(cfg.units, gain, down.image.cols());
    const double sv = deriv_scale(cfg.units, gain, down.image.rows());
    for (int i = 0; i < n; ++i) {
      const int r = i / down.image.cols();
      const int c = i % down.image.cols();
      for (int ch = 0; ch < chans; ++ch) {
        tr.derivs(i, ch) = du(r, c, ch) * su;
        tr.derivs(i, chans + ch) = dv(r, c, ch) * sv;
      }
    }
  }
  return ds;
}

std::vector<std::uint8_t> image_eval_mask(const ImageDataset& ds) {
  const int rows = ds.image.rows(), cols = ds.image.cols();
  const int border = ds.cfg.psnr_border;
  if (rows <= 2 * border || cols <= 2 * border)
    throw std::invalid_argument("image_eval_mask: border " + std::to_string(border) +
                                " leaves no pixels of " + std::to_string(rows) + "x" +
                                std::to_string(cols));
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(rows) * cols);
  bool any = false;
  for (std::size_t p = 0; p < mask.size(); ++p) {
    mask[p] = !ds.train_mask[p];
    any = any || mask[p];
  }
  if (!any) mask.assign(mask.size(), 1);  // factor 1: nothing held out
  mask_and(mask, border_mask(rows, cols, border));
  return mask;
}

Grid2D render_image(const Mlp& mlp, int rows, int cols) {
  return reshape_to_image(predict(mlp, image_coords(rows, cols)), rows, cols,
                          mlp.cfg.output_dim);
}

double image_eval_psnr(const Mlp& mlp, const ImageDataset& ds) {
  const Grid2D pred = render_image(mlp, ds.image.rows(), ds.image.cols());
  return psnr(pred, ds.image, 0.0, 1.0, image_eval_mask(ds));
}

AudioDataset build_audio_dataset(const std::vector<double>& signal, const AudioDataConfig& cfg) {
  const int n = static_cast<int>(signal.size());
  if (n < 2) throw std::invalid_argument("build_audio_dataset: need at least 2 samples");

  AudioDataset ds;
  ds.signal = signal;
  ds.cfg = cfg;
  ds.eval_coords = signal_coords(n);

  const std::vector<int> kept = stride_indices(n, cfg.factor);
  const int m = static_cast<int>(kept.size());
  ds.train_mask.assign(signal.size(), 0);
  for (int idx : kept) ds.train_mask[idx] = 1;

  SampledSignal& tr = ds.train;
  tr.dirs = 1;
  tr.coords = Grid2D(m, 1);
  tr.values = Grid2D(m, 1);
  tr.derivs = Grid2D(m, 1);
  for (int i = 0; i < m; ++i) {
    tr.coords(i, 0) = pixel_center_coord(kept[i], n);
    tr.values(i, 0) = signal[kept[i]];
  }
  if (cfg.deriv_source == DerivSource::full_res) {
    const std::vector<double> d = audio_derivative(signal);
    const double s = deriv_scale(cfg.units, 1.0, n);
    for (int i = 0; i < m; ++i) tr.derivs(i, 0) = d[kept[i]] * s;
  } else {
    std::vector<double> small(m);
    for (int i = 0; i < m; ++i) small[i] = signal[kept[i]];
    const std::vector<double> d = audio_derivative(small);
    const double s = deriv_scale(cfg.units, 1.0, m);
    for (int i = 0; i < m; ++i) tr.derivs(i, 0) = d[i] * s;
  }
  return ds;
}

std::vector<std::uint8_t> audio_eval_mask(const AudioDataset& ds) {
  std::vector<std::uint8_t> mask(ds.signal.size());
  bool any = false;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    mask[i] = !ds.train_mask[i];
    any = any || mask[i];
  }
  if (!any) mask.assign(mask.size(), 1);
  return mask;
}

std::vector<double> render_signal(const Mlp& mlp, int n) {
  const Grid2D y = predict(mlp, signal_coords(n));
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[i] = y(i, 0);
  return out;
}

double audio_eval_psnr(const Mlp& mlp, const AudioDataset& ds) {
  const int n = static_cast<int>(ds.signal.size());
  const Grid2D pred = predict(mlp, ds.eval_coords);
  Grid2D ref(n, 1);
  for (int i = 0; i < n; ++i) ref(i, 0) = ds.signal[i];
  return psnr(pred, ref, -1.0, 1.0, audio_eval_mask(ds));
}

ImageRunResult run_image_regression(const Grid2D& img, const ImageRunConfig& cfg) {
  ImageDataset ds = build_image_dataset(img, cfg.data);

  MlpConfig mc = cfg.mlp;
  mc.input_dim = 2;
  mc.output_dim = img.channels();
  Rng rng(cfg.seed);

  ImageRunResult res;
  res.mlp = build_mlp(mc, rng);

  TrainData data;
  data.inputs = ds.train.coords;
  data.targets = to_dual_batch(ds.train);
  TrainOptions opt = cfg.train;
  if (!opt.eval) opt.eval = [&ds](const Mlp& m) { return image_eval_psnr(m, ds); };
  res.log = train(res.mlp, data, opt);

  res.rendered = render_image(res.mlp, img.rows(), img.cols());
  res.psnr = image_eval_psnr(res.mlp, ds);

  const int border = cfg.data.psnr_border;
  const int crows = img.rows() - 2 * border, ccols = img.cols() - 2 * border;
  if (crows >= 11 && ccols >= 11) {
    const Grid2D pa = to_luma(clamped(res.rendered, 0.0, 1.0));
    const Grid2D pb = to_luma(img);
    res.ssim = ssim(border > 0 ? cropped(pa, border) : pa, border > 0 ? cropped(pb, border) : pb);
  } else {
    res.ssim = std::numeric_limits<double>::quiet_NaN();
  }
  return res;
}

AudioRunResult run_audio_regression(const std::vector<double>& signal,
                                    const AudioRunConfig& cfg) {
  AudioDataset ds = build_audio_dataset(signal, cfg.data);

  MlpConfig mc = cfg.mlp;
  mc.input_dim = 1;
  mc.output_dim = 1;
  Rng rng(cfg.seed);

  AudioRunResult res;
  res.mlp = build_mlp(mc, rng);

  TrainData data;
  data.inputs = ds.train.coords;
  data.targets = to_dual_batch(ds.train);
  TrainOptions opt = cfg.train;
  if (!opt.eval) opt.eval = [&ds](const Mlp& m) { return audio_eval_psnr(m, ds); };
  res.log = train(res.mlp, data, opt);

  res.rendered = render_signal(res.mlp, static_cast<int>(signal.size()));
  res.psnr = audio_eval_psnr(res.mlp, ds);
  return res;
}

}  // namespace sinr
