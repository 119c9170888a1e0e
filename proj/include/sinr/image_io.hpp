#pragma once

#include <string>

#include "sinr/grid.hpp"

namespace sinr {

// 8-bit PNG to doubles in [0, 1]. Grayscale loads as 1 channel, RGB as 3.
// Palette images expand to RGB, 16-bit files reduce to 8 bits, and an alpha
// channel is dropped with a note on stderr.
Grid2D load_png(const std::string& path);

// 1- or 3-channel doubles to 8-bit grayscale / RGB. Values are clamped to
// [0, 1]; quantization (round half up) happens only at this boundary.
void save_png(const Grid2D& img, const std::string& path);

}  // namespace sinr
