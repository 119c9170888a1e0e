#include "sinr/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sinr/kernels.hpp"

namespace sinr {

Grid2D::Grid2D(int rows, int cols, int channels, double fill)
    : rows_(rows), cols_(cols), channels_(channels) {
  if (rows < 0 || cols < 0 || channels < 0)
    throw std::invalid_argument("Grid2D: negative dimension");
  data_.assign(static_cast<std::size_t>(rows) * cols * channels, fill);
}

Grid2D Grid2D::identity(int n) {
  Grid2D g(n, n, 1);
  for (int i = 0; i < n; ++i) g(i, i) = 1.0;
  return g;
}

bool Grid2D::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

void Grid2D::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Grid2D Grid2D::transposed() const {
  if (channels_ != 1) throw std::invalid_argument("transposed: channels != 1");
  Grid2D t(cols_, rows_, 1);
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Grid2D matmul(const Grid2D& a, const Grid2D& b) {
  if (a.channels() != 1 || b.channels() != 1)
    throw std::invalid_argument("matmul: channels must be 1");
  if (a.cols() != b.rows())
    throw std::invalid_argument("matmul: inner dimensions disagree: [" +
                                std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                                "] * [" + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()) + "]");
  Grid2D c(a.rows(), b.cols(), 1);
  kernels::gemm_nn(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.cols(), false);
  return c;
}

Grid2D conv3x3(const Grid2D& img, const std::array<double, 9>& kernel) {
  if (img.rows() < 1 || img.cols() < 1) throw std::invalid_argument("conv3x3: empty image");
  const int rows = img.rows(), cols = img.cols(), chans = img.channels();
  Grid2D out(rows, cols, chans);
  auto clampi = [](int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); };
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      for (int ch = 0; ch < chans; ++ch) {
        double acc = 0.0;
        for (int m = -1; m <= 1; ++m) {
          const int rr = clampi(r - m, rows - 1);
          for (int n = -1; n <= 1; ++n) {
            const int cc = clampi(c - n, cols - 1);
            acc += kernel[static_cast<std::size_t>(m + 1) * 3 + (n + 1)] * img(rr, cc, ch);
          }
        }
        out(r, c, ch) = acc;
      }
    }
  }
  return out;
}

}  // namespace sinr
