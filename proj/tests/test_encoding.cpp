#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "sinr/encoding.hpp"
#include "sinr/rng.hpp"

using namespace sinr;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("encoding output dim counts raw, sin and cos blocks") {
  CHECK(PositionalEncoding{5, true, 2}.output_dim() == 2 + 20);
  CHECK(PositionalEncoding{10, true, 3}.output_dim() == 3 + 60);
  CHECK(PositionalEncoding{4, false, 2}.output_dim() == 16);
  CHECK(PositionalEncoding{0, true, 2}.output_dim() == 2);
}

TEST_CASE("encoding layout is raw, then sin dims-outer, then cos") {
  PositionalEncoding pe{2, true, 2};
  const double x[2] = {0.3, -0.7};
  std::vector<double> out(pe.output_dim());
  pe.encode(x, out.data());

  CHECK(out[0] == 0.3);
  CHECK(out[1] == -0.7);
  // sin block: dim 0 freqs pi, 2pi; then dim 1.
  CHECK(out[2] == doctest::Approx(std::sin(kPi * 0.3)).epsilon(1e-15));
  CHECK(out[3] == doctest::Approx(std::sin(2.0 * kPi * 0.3)).epsilon(1e-15));
  CHECK(out[4] == doctest::Approx(std::sin(kPi * -0.7)).epsilon(1e-15));
  CHECK(out[5] == doctest::Approx(std::sin(2.0 * kPi * -0.7)).epsilon(1e-15));
  CHECK(out[6] == doctest::Approx(std::cos(kPi * 0.3)).epsilon(1e-15));
  CHECK(out[7] == doctest::Approx(std::cos(2.0 * kPi * 0.3)).epsilon(1e-15));
  CHECK(out[8] == doctest::Approx(std::cos(kPi * -0.7)).epsilon(1e-15));
  CHECK(out[9] == doctest::Approx(std::cos(2.0 * kPi * -0.7)).epsilon(1e-15));
}

TEST_CASE("encoding jacobian matches finite differences") {
  PositionalEncoding pe{6, true, 3};
  Rng rng(71);
  const double h = 1e-7;
  for (int trial = 0; trial < 4; ++trial) {
    double x[3];
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    const int od = pe.output_dim();
    std::vector<double> jac(static_cast<std::size_t>(od) * 3);
    pe.jacobian(x, jac.data());
    for (int c = 0; c < 3; ++c) {
      double xp[3] = {x[0], x[1], x[2]}, xm[3] = {x[0], x[1], x[2]};
      xp[c] += h;
      xm[c] -= h;
      std::vector<double> ep(od), em(od);
      pe.encode(xp, ep.data());
      pe.encode(xm, em.data());
      for (int r = 0; r < od; ++r) {
        const double fd = (ep[r] - em[r]) / (2.0 * h);
        // Frequencies reach 2^5 pi ~ 100, so scale the bound by the row size.
        const double scale = std::max(1.0, std::fabs(jac[r * 3 + c]));
        CHECK(std::fabs(jac[r * 3 + c] - fd) < 1e-7 * scale);
      }
    }
  }
}

TEST_CASE("jvp equals jacobian times vector") {
  PositionalEncoding pe{4, false, 2};
  Rng rng(73);
  double x[2] = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  double v[2] = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  const int od = pe.output_dim();
  std::vector<double> jac(static_cast<std::size_t>(od) * 2), jv(od), want(od, 0.0);
  pe.jacobian(x, jac.data());
  pe.jvp(x, v, jv.data());
  for (int r = 0; r < od; ++r)
    for (int c = 0; c < 2; ++c) want[r] += jac[r * 2 + c] * v[c];
  for (int r = 0; r < od; ++r) CHECK(jv[r] == doctest::Approx(want[r]).epsilon(1e-13));
}

TEST_CASE("encode_batch and tangent_batch agree with the pointwise calls") {
  PositionalEncoding pe{3, true, 2};
  Rng rng(79);
  Grid2D coords(5, 2);
  for (std::size_t i = 0; i < coords.size(); ++i) coords.data()[i] = rng.uniform(-1.0, 1.0);

  Grid2D enc = pe.encode_batch(coords);
  REQUIRE(enc.rows() == 5);
  REQUIRE(enc.cols() == pe.output_dim());
  std::vector<double> row(pe.output_dim());
  for (int i = 0; i < 5; ++i) {
    pe.encode(coords.row(i), row.data());
    for (int c = 0; c < pe.output_dim(); ++c) CHECK(enc(i, c) == row[c]);
  }

  std::vector<Grid2D> tb = pe.tangent_batch(coords);
  REQUIRE(tb.size() == 2);
  for (int d = 0; d < 2; ++d) {
    const double e0 = d == 0 ? 1.0 : 0.0;
    const double e1 = 1.0 - e0;
    for (int i = 0; i < 5; ++i) {
      const double v[2] = {e0, e1};
      pe.jvp(coords.row(i), v, row.data());
      for (int c = 0; c < pe.output_dim(); ++c) CHECK(tb[d](i, c) == row[c]);
    }
  }
}
