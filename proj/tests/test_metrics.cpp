#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "sinr/grid.hpp"
#include "sinr/metrics.hpp"
#include "sinr/rng.hpp"

using namespace sinr;

namespace {

Grid2D random_grid(int rows, int cols, int ch, Rng& rng, double lo = 0.0, double hi = 1.0) {
  Grid2D g(rows, cols, ch);
  for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] = rng.uniform(lo, hi);
  return g;
}

// Mean of squared differences over unmasked pixels, written as the plainest
// possible loop so the library version has something independent to match.
double mse_oracle(const Grid2D& a, const Grid2D& b, const std::vector<std::uint8_t>& mask) {
  double acc = 0.0;
  int n = 0;
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < a.cols(); ++c) {
      if (!mask.empty() && !mask[static_cast<std::size_t>(r) * a.cols() + c]) continue;
      ++n;
      for (int k = 0; k < a.channels(); ++k) {
        const double d = a(r, c, k) - b(r, c, k);
        acc += d * d;
      }
    }
  return acc / (static_cast<double>(n) * a.channels());
}

}  // namespace

TEST_CASE("luma uses the BT.601 weights per channel") {
  Grid2D img(1, 3, 3);
  img.fill(0.0);
  img(0, 0, 0) = 1.0;  // pure red pixel
  img(0, 1, 1) = 1.0;  // pure green pixel
  img(0, 2, 2) = 1.0;  // pure blue pixel
  const Grid2D y = to_luma(img);
  CHECK(y.channels() == 1);
  CHECK(y(0, 0) == 0.299);
  CHECK(y(0, 1) == 0.587);
  CHECK(y(0, 2) == 0.114);
  CHECK(0.299 + 0.587 + 0.114 == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("luma passes one-channel images through and rejects two channels") {
  Rng rng(5);
  const Grid2D mono = random_grid(4, 5, 1, rng);
  const Grid2D same = to_luma(mono);
  for (std::size_t i = 0; i < mono.size(); ++i) CHECK(same.data()[i] == mono.data()[i]);
  Grid2D two(2, 2, 2);
  CHECK_THROWS_AS(to_luma(two), std::invalid_argument);
}

TEST_CASE("clamping pins values outside the range and keeps the rest") {
  Grid2D g(1, 4, 1);
  g(0, 0) = -0.5;
  g(0, 1) = 0.25;
  g(0, 2) = 0.75;
  g(0, 3) = 1.5;
  const Grid2D c = clamped(g, 0.0, 1.0);
  CHECK(c(0, 0) == 0.0);
  CHECK(c(0, 1) == 0.25);
  CHECK(c(0, 2) == 0.75);
  CHECK(c(0, 3) == 1.0);
}

TEST_CASE("cropping removes the border and preserves interior values") {
  Rng rng(7);
  const Grid2D g = random_grid(5, 6, 2, rng);
  const Grid2D c = cropped(g, 1);
  CHECK(c.rows() == 3);
  CHECK(c.cols() == 4);
  CHECK(c.channels() == 2);
  for (int r = 0; r < c.rows(); ++r)
    for (int col = 0; col < c.cols(); ++col)
      for (int ch = 0; ch < 2; ++ch) CHECK(c(r, col, ch) == g(r + 1, col + 1, ch));
  CHECK_THROWS_AS(cropped(g, 3), std::invalid_argument);  // 5 rows <= 2*3
  CHECK_THROWS_AS(cropped(g, -1), std::invalid_argument);
}

TEST_CASE("border mask marks exactly the interior") {
  const auto m = border_mask(4, 5, 1);
  REQUIRE(m.size() == 20);
  int ones = 0;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 5; ++c) {
      const bool interior = r >= 1 && r < 3 && c >= 1 && c < 4;
      CHECK(m[static_cast<std::size_t>(r) * 5 + c] == (interior ? 1 : 0));
      ones += m[static_cast<std::size_t>(r) * 5 + c];
    }
  CHECK(ones == 6);
  const auto all = border_mask(3, 3, 0);
  for (auto v : all) CHECK(v == 1);
}

TEST_CASE("mask intersection is elementwise and checks sizes") {
  std::vector<std::uint8_t> a{1, 1, 0, 0};
  const std::vector<std::uint8_t> b{1, 0, 1, 0};
  mask_and(a, b);
  CHECK(a == std::vector<std::uint8_t>{1, 0, 0, 0});
  std::vector<std::uint8_t> c{1};
  CHECK_THROWS_AS(mask_and(c, b), std::invalid_argument);
}

TEST_CASE("mse matches a direct loop with and without a mask") {
  Rng rng(11);
  const Grid2D a = random_grid(9, 7, 3, rng);
  const Grid2D b = random_grid(9, 7, 3, rng);
  CHECK(mse(a, b) == doctest::Approx(mse_oracle(a, b, {})).epsilon(1e-14));
  std::vector<std::uint8_t> mask(63);
  for (auto& v : mask) v = rng.next_u64() % 2;
  mask[5] = 1;  // keep at least one pixel included
  CHECK(mse(a, b, mask) == doctest::Approx(mse_oracle(a, b, mask)).epsilon(1e-14));
}

TEST_CASE("mse rejects shape mismatches, bad masks, and empty selections") {
  const Grid2D a(3, 3, 1), b(3, 4, 1), c(3, 3, 1);
  CHECK_THROWS_AS(mse(a, b), std::invalid_argument);
  CHECK_THROWS_AS(mse(a, c, std::vector<std::uint8_t>(5, 1)), std::invalid_argument);
  CHECK_THROWS_AS(mse(a, c, std::vector<std::uint8_t>(9, 0)), std::invalid_argument);
}

TEST_CASE("psnr hand values: a uniform 0.1 error on unit range gives 20 dB") {
  Grid2D ref(6, 6, 1), pred(6, 6, 1);
  ref.fill(0.4);
  pred.fill(0.5);
  CHECK(psnr(pred, ref, 0.0, 1.0) == doctest::Approx(20.0).epsilon(1e-12));
  CHECK(psnr_from_mse(0.25, 1.0) == doctest::Approx(10.0 * std::log10(4.0)).epsilon(1e-15));
  CHECK(std::isinf(psnr_from_mse(0.0, 1.0)));
  CHECK_THROWS_AS(psnr_from_mse(-1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(psnr_from_mse(0.1, 0.0), std::invalid_argument);
}

TEST_CASE("psnr clamps the prediction before comparing") {
  Grid2D ref(2, 2, 1), pred(2, 2, 1);
  ref.fill(1.0);
  pred.fill(7.0);  // clamps to 1, so the error vanishes
  CHECK(std::isinf(psnr(pred, ref, 0.0, 1.0)));
  ref.fill(0.5);
  pred.fill(-3.0);  // clamps to 0, error 0.5 on unit range
  CHECK(psnr(pred, ref, 0.0, 1.0) == doctest::Approx(10.0 * std::log10(4.0)).epsilon(1e-12));
}

TEST_CASE("ssim is one for identical images and symmetric in its arguments") {
  Rng rng(13);
  const Grid2D a = random_grid(16, 16, 1, rng);
  const Grid2D b = random_grid(16, 16, 1, rng);
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-13));
  CHECK(ssim(a, b) < 1.0);
}

TEST_CASE("ssim on constant images reduces to the luminance term") {
  Grid2D a(12, 12, 1), b(12, 12, 1);
  a.fill(0.4);
  b.fill(0.6);
  // Variances vanish, so only (2*mx*my + C1) / (mx^2 + my^2 + C1) survives.
  const double expect = (2.0 * 0.4 * 0.6 + 1e-4) / (0.4 * 0.4 + 0.6 * 0.6 + 1e-4);
  CHECK(ssim(a, b) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("ssim matches a frozen reference value on a smooth pair") {
  // Reference computed with scikit-image 0.25.2: structural_similarity(a, b,
  // data_range=1.0, gaussian_weights=True, sigma=1.5,
  // use_sample_covariance=False) on the same closed-form inputs.
  Grid2D a(20, 24, 1), b(20, 24, 1);
  for (int r = 0; r < 20; ++r)
    for (int c = 0; c < 24; ++c) {
      a(r, c) = 0.5 + 0.3 * std::sin(0.3 * r + 0.5 * c);
      b(r, c) = a(r, c) + 0.08 * std::cos(0.7 * r - 0.4 * c);
    }
  CHECK(ssim(a, b) == doctest::Approx(0.9449423575322328).epsilon(1e-9));
}

TEST_CASE("ssim rejects multi-channel input and images below the window size") {
  Grid2D rgb(16, 16, 3), small(8, 8, 1), other(16, 15, 1), mono(16, 16, 1);
  CHECK_THROWS_AS(ssim(rgb, rgb), std::invalid_argument);
  CHECK_THROWS_AS(ssim(small, small), std::invalid_argument);
  CHECK_THROWS_AS(ssim(mono, other), std::invalid_argument);
}
