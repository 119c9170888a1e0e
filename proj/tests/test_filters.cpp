#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "sinr/filters.hpp"
#include "sinr/grid.hpp"
#include "sinr/rng.hpp"

using namespace sinr;

TEST_CASE("stencil gains are the exact ramp responses") {
  CHECK(filter_gain(DerivFilter::sobel) == 8.0);
  CHECK(filter_gain(DerivFilter::vanilla) == 2.0);
}

TEST_CASE("filter names round-trip") {
  DerivFilter f;
  CHECK(filter_from_name("sobel", &f));
  CHECK(f == DerivFilter::sobel);
  CHECK(filter_from_name("vanilla", &f));
  CHECK(f == DerivFilter::vanilla);
  CHECK_FALSE(filter_from_name("scharr", &f));
}

TEST_CASE("unit ramp along u produces the gain in du and zero in dv") {
  // Integer-valued inputs and integer stencils: responses are exact doubles.
  Grid2D ramp(6, 8);
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 8; ++c) ramp(r, c) = c;
  for (DerivFilter kind : {DerivFilter::sobel, DerivFilter::vanilla}) {
    auto [du, dv] = image_derivatives(ramp, kind);
    const double gain = filter_gain(kind);
    // Interior: replicate padding bends the ramp at the left/right columns.
    for (int r = 0; r < 6; ++r)
      for (int c = 1; c < 7; ++c) CHECK(du(r, c) == gain);
    for (std::size_t i = 0; i < dv.size(); ++i) CHECK(dv.data()[i] == 0.0);
  }
}

TEST_CASE("unit ramp along v produces the gain in dv and zero in du") {
  Grid2D ramp(8, 6);
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 6; ++c) ramp(r, c) = r;
  for (DerivFilter kind : {DerivFilter::sobel, DerivFilter::vanilla}) {
    auto [du, dv] = image_derivatives(ramp, kind);
    const double gain = filter_gain(kind);
    for (int r = 1; r < 7; ++r)
      for (int c = 0; c < 6; ++c) CHECK(dv(r, c) == gain);
    for (std::size_t i = 0; i < du.size(); ++i) CHECK(du.data()[i] == 0.0);
  }
}

TEST_CASE("channels are filtered independently") {
  Rng rng(5);
  Grid2D img(5, 5, 3);
  for (std::size_t i = 0; i < img.size(); ++i) img.data()[i] = rng.uniform(0.0, 1.0);
  auto [du, dv] = image_derivatives(img, DerivFilter::sobel);
  REQUIRE(du.channels() == 3);
  for (int ch = 0; ch < 3; ++ch) {
    Grid2D mono(5, 5);
    for (int r = 0; r < 5; ++r)
      for (int c = 0; c < 5; ++c) mono(r, c) = img(r, c, ch);
    auto [mu, mv] = image_derivatives(mono, DerivFilter::sobel);
    for (int r = 0; r < 5; ++r)
      for (int c = 0; c < 5; ++c) {
        CHECK(du(r, c, ch) == mu(r, c));
        CHECK(dv(r, c, ch) == mv(r, c));
      }
  }
}

TEST_CASE("audio_derivative is exact on quadratics and replicates at the ends") {
  const int n = 20;
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = 0.25 * i * i - 1.5 * i + 2.0;
  std::vector<double> d = audio_derivative(g);
  REQUIRE(static_cast<int>(d.size()) == n);
  // Central differences kill the quadratic's truncation term.
  for (int i = 1; i < n - 1; ++i)
    CHECK(d[i] == doctest::Approx(0.5 * i - 1.5).epsilon(1e-13));
  CHECK(d[0] == doctest::Approx((g[1] - g[0]) / 2.0).epsilon(1e-13));
  CHECK(d[n - 1] == doctest::Approx((g[n - 1] - g[n - 2]) / 2.0).epsilon(1e-13));
}

TEST_CASE("deriv_scale converts raw responses to the requested units") {
  CHECK(deriv_scale(DerivUnits::per_sample, 8.0, 101) == doctest::Approx(1.0 / 8.0));
  // Normalized: d/dx with x in [-1, 1] over n samples is (n-1)/2 per-sample.
  CHECK(deriv_scale(DerivUnits::normalized, 8.0, 101) == doctest::Approx(50.0 / 8.0));
  CHECK(deriv_scale(DerivUnits::normalized, 2.0, 3) == doctest::Approx(0.5));
}

TEST_CASE("downsample keeps the top-left pixel of each block") {
  Grid2D img(5, 7, 2);
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 7; ++c)
      for (int ch = 0; ch < 2; ++ch) img(r, c, ch) = 100.0 * r + 10.0 * c + ch;
  Downsampled ds = downsample_nearest(img, 2);
  CHECK(ds.factor == 2);
  REQUIRE(ds.image.rows() == 3);
  REQUIRE(ds.image.cols() == 4);
  REQUIRE(ds.image.channels() == 2);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c)
      for (int ch = 0; ch < 2; ++ch)
        CHECK(ds.image(r, c, ch) == 100.0 * (2 * r) + 10.0 * (2 * c) + ch);
  REQUIRE(ds.kept.size() == 12);
  CHECK(ds.kept[0] == 0);
  CHECK(ds.kept[1] == 2);
  CHECK(ds.kept[3] == 6);
  CHECK(ds.kept[4] == 14);  // (2,0) in a 7-wide image
  CHECK(ds.kept[11] == 34); // (4,6)
}

TEST_CASE("downsample with factor 1 is the identity") {
  Rng rng(9);
  Grid2D img(3, 4);
  for (std::size_t i = 0; i < img.size(); ++i) img.data()[i] = rng.uniform(0.0, 1.0);
  Downsampled ds = downsample_nearest(img, 1);
  REQUIRE(ds.image.rows() == 3);
  REQUIRE(ds.image.cols() == 4);
  for (std::size_t i = 0; i < img.size(); ++i) CHECK(ds.image.data()[i] == img.data()[i]);
  for (int i = 0; i < 12; ++i) CHECK(ds.kept[i] == i);
}

TEST_CASE("stride_indices covers every factor-th sample") {
  std::vector<int> idx = stride_indices(10, 3);
  REQUIRE(idx.size() == 4);
  CHECK(idx[0] == 0);
  CHECK(idx[3] == 9);
  CHECK(stride_indices(308207, 5).size() == 61642);  // ceil(n / factor)
  CHECK(stride_indices(8000, 5).size() == 1600);
  CHECK(stride_indices(7, 1).size() == 7);
}
