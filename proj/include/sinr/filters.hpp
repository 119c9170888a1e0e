#pragma once

#include <array>
#include <string_view>
#include <utility>
#include <vector>

#include "sinr/grid.hpp"

namespace sinr {

// Derivative stencils for building supervision targets. Templates are stored
// pre-rotated for conv3x3's flipped-kernel semantics, so the observable
// response matches the familiar correlation masks: a unit-slope ramp along u
// produces +gain everywhere.
enum class DerivFilter { sobel, vanilla };

// u is the column axis, v the row axis (increasing downward).
const std::array<double, 9>& filter_kernel_u(DerivFilter kind);
const std::array<double, 9>& filter_kernel_v(DerivFilter kind);

// Response of the stencil to a unit-slope ramp: sobel 8, vanilla 2.
double filter_gain(DerivFilter kind);

const char* filter_name(DerivFilter kind);
bool filter_from_name(std::string_view name, DerivFilter* out);

// Raw filter responses (not yet divided by the gain), per channel, replicate
// padding. first = d/du, second = d/dv.
std::pair<Grid2D, Grid2D> image_derivatives(const Grid2D& img, DerivFilter kind);

// Central two-sided difference with replicate ends:
// out[i] = (g[i+1] - g[i-1]) / 2. Unit gain on a unit-slope ramp.
std::vector<double> audio_derivative(const std::vector<double>& g);

// Units for derivative supervision targets.
//   per_sample: target = raw / gain, a derivative per pixel (or sample) step.
//   normalized: target = (raw / gain) * (n_axis - 1) / 2, a derivative with
//     respect to the [-1, 1] coordinate of an axis holding n_axis samples.
// n_axis is the axis length of the image the filter actually ran on.
enum class DerivUnits { per_sample, normalized };

double deriv_scale(DerivUnits units, double gain, int n_axis);

// Nearest-neighbor downsampling that keeps the top-left pixel of each
// factor x factor block. kept holds the row-major linear pixel index in the
// full image for each retained pixel, in the small image's row-major order.
// factor 1 is the identity.
struct Downsampled {
  Grid2D image;
  std::vector<int> kept;
  int factor = 1;
};

Downsampled downsample_nearest(const Grid2D& img, int factor);

// 1-D version: indices 0, factor, 2*factor, ... below n.
std::vector<int> stride_indices(int n, int factor);

}  // namespace sinr
