#pragma once

#include <cstdint>
#include <vector>

#include "sinr/grid.hpp"

namespace sinr {

// BT.601 luma (0.299 R + 0.587 G + 0.114 B) from interleaved RGB.
// One-channel input passes through unchanged.
Grid2D to_luma(const Grid2D& img);

Grid2D clamped(const Grid2D& g, double lo, double hi);

// Copy without a border of `crop` pixels on every side.
Grid2D cropped(const Grid2D& g, int crop);

// Per-pixel include mask (rows*cols entries): 1 everywhere except a border of
// `crop` pixels.
std::vector<std::uint8_t> border_mask(int rows, int cols, int crop);

// a &= b, elementwise. Sizes must match.
void mask_and(std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b);

// Mean squared error over included pixels, all channels. An empty mask
// includes every pixel. Throws when shapes differ or nothing is included.
double mse(const Grid2D& a, const Grid2D& b, const std::vector<std::uint8_t>& mask = {});

// 10 * log10(range^2 / mse); +inf when mse is zero.
double psnr_from_mse(double mse_value, double range);

// Clamps pred into [lo, hi], then PSNR against ref with range hi - lo.
double psnr(const Grid2D& pred, const Grid2D& ref, double lo, double hi,
            const std::vector<std::uint8_t>& mask = {});

// Single-scale SSIM between one-channel grids: 11x11 Gaussian window with
// sigma 1.5, K1 = 0.01, K2 = 0.03, dynamic range 1, weighted (not sample)
// covariance, averaged over window centers with full support.
double ssim(const Grid2D& a, const Grid2D& b);

}  // namespace sinr
