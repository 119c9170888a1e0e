#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace sinr {

// Dense row-major 2-D array of doubles with interleaved channels.
// Element (r, c, ch) lives at data[(r*cols + c)*channels + ch].
// Doubles as the matrix type (channels == 1) for all linear algebra.
class Grid2D {
 public:
  Grid2D() = default;
  Grid2D(int rows, int cols, int channels = 1, double fill = 0.0);

  static Grid2D identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(int r, int c, int ch = 0) {
    return data_[(static_cast<std::size_t>(r) * cols_ + c) * channels_ + ch];
  }
  double operator()(int r, int c, int ch = 0) const {
    return data_[(static_cast<std::size_t>(r) * cols_ + c) * channels_ + ch];
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  // Pointer to the first element of row r (all channels interleaved).
  double* row(int r) { return data_.data() + static_cast<std::size_t>(r) * cols_ * channels_; }
  const double* row(int r) const {
    return data_.data() + static_cast<std::size_t>(r) * cols_ * channels_;
  }

  bool same_shape(const Grid2D& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && channels_ == other.channels_;
  }

  bool all_finite() const;
  void fill(double v);

  // channels == 1 only.
  Grid2D transposed() const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

// c[i][j] = sum_t a[i][t]*b[t][j], double accumulation, t ascending.
// Throws std::invalid_argument on dimension mismatch or channels != 1.
Grid2D matmul(const Grid2D& a, const Grid2D& b);

// True 2-D convolution with a 3x3 kernel: out[r][c] = sum_{m,n} k[m][n]*in[r-m][c-n]
// (the kernel is flipped relative to a sliding correlation mask). Borders use
// replicate (clamp-to-edge) padding. Channels are convolved independently and
// the output has the input's shape. Kernel entries are row-major, k[(m+1)*3+(n+1)].
Grid2D conv3x3(const Grid2D& img, const std::array<double, 9>& kernel);

}  // namespace sinr
