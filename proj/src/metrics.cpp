#include "sinr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace sinr {

Grid2D to_luma(const Grid2D& img) {
  if (img.channels() == 1) return img;
  if (img.channels() != 3)
    throw std::invalid_argument("to_luma: expected 1 or 3 channels, got " +
                                std::to_string(img.channels()));
  Grid2D out(img.rows(), img.cols(), 1);
  for (int r = 0; r < img.rows(); ++r)
    for (int c = 0; c < img.cols(); ++c)
      out(r, c) = 0.299 * img(r, c, 0) + 0.587 * img(r, c, 1) + 0.114 * img(r, c, 2);
  return out;
}

Grid2D clamped(const Grid2D& g, double lo, double hi) {
  Grid2D out = g;
  double* p = out.data();
  for (std::size_t i = 0; i < out.size(); ++i) p[i] = std::clamp(p[i], lo, hi);
  return out;
}

Grid2D cropped(const Grid2D& g, int crop) {
  if (crop < 0 || g.rows() <= 2 * crop || g.cols() <= 2 * crop)
    throw std::invalid_argument("cropped: crop " + std::to_string(crop) +
                                " leaves no pixels of " + std::to_string(g.rows()) + "x" +
                                std::to_string(g.cols()));
  Grid2D out(g.rows() - 2 * crop, g.cols() - 2 * crop, g.channels());
  for (int r = 0; r < out.rows(); ++r)
    for (int c = 0; c < out.cols(); ++c)
      for (int ch = 0; ch < g.channels(); ++ch) out(r, c, ch) = g(r + crop, c + crop, ch);
  return out;
}

std::vector<std::uint8_t> border_mask(int rows, int cols, int crop) {
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(rows) * cols, 0);
  for (int r = crop; r < rows - crop; ++r)
    for (int c = crop; c < cols - crop; ++c) mask[static_cast<std::size_t>(r) * cols + c] = 1;
  return mask;
}

void mask_and(std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("mask_and: size mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = a[i] && b[i];
}

double mse(const Grid2D& a, const Grid2D& b, const std::vector<std::uint8_t>& mask) {
  if (!a.same_shape(b)) throw std::invalid_argument("mse: shape mismatch");
  const std::size_t pixels = static_cast<std::size_t>(a.rows()) * a.cols();
  if (!mask.empty() && mask.size() != pixels)
    throw std::invalid_argument("mse: mask must have rows*cols entries");
  double acc = 0.0;
  std::size_t count = 0;
  const double* pa = a.data();
  const double* pb = b.data();
  const int ch = a.channels();
  for (std::size_t p = 0; p < pixels; ++p) {
    if (!mask.empty() && !mask[p]) continue;
    for (int k = 0; k < ch; ++k) {
      const double d = pa[p * ch + k] - pb[p * ch + k];
      acc += d * d;
    }
    ++count;
  }
  if (count == 0) throw std::invalid_argument("mse: mask includes no pixels");
  return acc / (static_cast<double>(count) * ch);
}

double psnr_from_mse(double mse_value, double range) {
  if (mse_value < 0.0 || range <= 0.0)
    throw std::invalid_argument("psnr_from_mse: need mse >= 0 and range > 0");
  if (mse_value == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(range * range / mse_value);
}

double psnr(const Grid2D& pred, const Grid2D& ref, double lo, double hi,
            const std::vector<std::uint8_t>& mask) {
  return psnr_from_mse(mse(clamped(pred, lo, hi), ref, mask), hi - lo);
}

double ssim(const Grid2D& a, const Grid2D& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("ssim: shape mismatch");
  if (a.channels() != 1) throw std::invalid_argument("ssim: one-channel grids only");
  constexpr int kWin = 11;
  constexpr int kHalf = kWin / 2;
  if (a.rows() < kWin || a.cols() < kWin)
    throw std::invalid_argument("ssim: image smaller than the 11x11 window");

  static const std::vector<double> weights = [] {
    std::vector<double> w(kWin * kWin);
    const double sigma = 1.5;
    double sum = 0.0;
    for (int i = 0; i < kWin; ++i)
      for (int j = 0; j < kWin; ++j) {
        const double di = i - kHalf, dj = j - kHalf;
        w[i * kWin + j] = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
        sum += w[i * kWin + j];
      }
    for (double& v : w) v /= sum;
    return w;
  }();

  constexpr double kC1 = 0.01 * 0.01;  // (K1*L)^2 with L = 1
  constexpr double kC2 = 0.03 * 0.03;

  double total = 0.0;
  std::size_t count = 0;
  for (int r = kHalf; r < a.rows() - kHalf; ++r) {
    for (int c = kHalf; c < a.cols() - kHalf; ++c) {
      double mx = 0.0, my = 0.0, mxx = 0.0, myy = 0.0, mxy = 0.0;
      for (int i = 0; i < kWin; ++i) {
        for (int j = 0; j < kWin; ++j) {
          const double w = weights[i * kWin + j];
          const double x = a(r + i - kHalf, c + j - kHalf);
          const double y = b(r + i - kHalf, c + j - kHalf);
          mx += w * x;
          my += w * y;
          mxx += w * x * x;
          myy += w * y * y;
          mxy += w * x * y;
        }
      }
      const double vx = mxx - mx * mx;
      const double vy = myy - my * my;
      const double cxy = mxy - mx * my;
      total += ((2.0 * mx * my + kC1) * (2.0 * cxy + kC2)) /
               ((mx * mx + my * my + kC1) * (vx + vy + kC2));
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

}  // namespace sinr
