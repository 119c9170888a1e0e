#include "sinr/filters.hpp"

#include <stdexcept>
#include <string>

namespace sinr {

namespace {

// 180-degree rotations of the correlation masks.
constexpr std::array<double, 9> kSobelU = {1, 0, -1, 2, 0, -2, 1, 0, -1};
constexpr std::array<double, 9> kSobelV = {1, 2, 1, 0, 0, 0, -1, -2, -1};
constexpr std::array<double, 9> kVanillaU = {0, 0, 0, 1, 0, -1, 0, 0, 0};
constexpr std::array<double, 9> kVanillaV = {0, 1, 0, 0, 0, 0, 0, -1, 0};

}  // namespace

const std::array<double, 9>& filter_kernel_u(DerivFilter kind) {
  return kind == DerivFilter::sobel ? kSobelU : kVanillaU;
}

const std::array<double, 9>& filter_kernel_v(DerivFilter kind) {
  return kind == DerivFilter::sobel ? kSobelV : kVanillaV;
}

double filter_gain(DerivFilter kind) { return kind == DerivFilter::sobel ? 8.0 : 2.0; }

const char* filter_name(DerivFilter kind) {
  return kind == DerivFilter::sobel ? "sobel" : "vanilla";
}

bool filter_from_name(std::string_view name, DerivFilter* out) {
  if (name == "sobel") {
    *out = DerivFilter::sobel;
    return true;
  }
  if (name == "vanilla") {
    *out = DerivFilter::vanilla;
    return true;
  }
  return false;
}

std::pair<Grid2D, Grid2D> image_derivatives(const Grid2D& img, DerivFilter kind) {
  return {conv3x3(img, filter_kernel_u(kind)), conv3x3(img, filter_kernel_v(kind))};
}

std::vector<double> audio_derivative(const std::vector<double>& g) {
  const int n = static_cast<int>(g.size());
  std::vector<double> out(g.size(), 0.0);
  if (n < 2) return out;
  for (int i = 0; i < n; ++i) {
    const int lo = i > 0 ? i - 1 : 0;
    const int hi = i < n - 1 ? i + 1 : n - 1;
    out[i] = (g[hi] - g[lo]) / 2.0;
  }
  return out;
}

double deriv_scale(DerivUnits units, double gain, int n_axis) {
  if (gain == 0.0) throw std::invalid_argument("deriv_scale: zero gain");
  if (units == DerivUnits::per_sample) return 1.0 / gain;
  if (n_axis < 2) throw std::invalid_argument("deriv_scale: normalized units need n_axis >= 2");
  return (n_axis - 1) / (2.0 * gain);
}

Downsampled downsample_nearest(const Grid2D& img, int factor) {
  if (factor < 1) throw std::invalid_argument("downsample_nearest: factor must be >= 1");
  if (img.rows() < 1 || img.cols() < 1)
    throw std::invalid_argument("downsample_nearest: empty image");
  const int rows = (img.rows() + factor - 1) / factor;
  const int cols = (img.cols() + factor - 1) / factor;
  Downsampled out;
  out.factor = factor;
  out.image = Grid2D(rows, cols, img.channels());
  out.kept.reserve(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r) {
    const int rr = r * factor;
    for (int c = 0; c < cols; ++c) {
      const int cc = c * factor;
      for (int ch = 0; ch < img.channels(); ++ch) out.image(r, c, ch) = img(rr, cc, ch);
      out.kept.push_back(rr * img.cols() + cc);
    }
  }
  return out;
}

std::vector<int> stride_indices(int n, int factor) {
  if (factor < 1) throw std::invalid_argument("stride_indices: factor must be >= 1");
  std::vector<int> idx;
  idx.reserve(static_cast<std::size_t>((n + factor - 1) / factor));
  for (int i = 0; i < n; i += factor) idx.push_back(i);
  return idx;
}

}  // namespace sinr
