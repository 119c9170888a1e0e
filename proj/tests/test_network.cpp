#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "sinr/activation.hpp"
#include "sinr/grid.hpp"
#include "sinr/mlp.hpp"
#include "sinr/rng.hpp"

using namespace sinr;

namespace {

const std::vector<Activation> kAllActs = {
    {Act::relu, 0.0},    {Act::elu, 0.0},  {Act::selu, 0.0}, {Act::sigmoid, 0.0},
    {Act::softplus, 0.0}, {Act::tanh, 0.0}, {Act::sine, 2.0},
};

double eval1(const Activation& a, double z) {
  double s;
  act_eval(a, &z, &s, nullptr, nullptr, 1);
  return s;
}

double rel(double a, double b) {
  return std::fabs(a - b) / std::max({1e-12, std::fabs(a), std::fabs(b)});
}

// Primal forward oracle: explicit loops, no gemm, no cache.
Grid2D forward_oracle(const Mlp& mlp, const Grid2D& x) {
  Grid2D h = x;
  for (std::size_t k = 0; k < mlp.layers.size(); ++k) {
    const LayerParams& L = mlp.layers[k];
    Grid2D z(h.rows(), L.out());
    for (int i = 0; i < h.rows(); ++i)
      for (int o = 0; o < L.out(); ++o) {
        double s = L.b[o];
        for (int t = 0; t < L.in(); ++t) s += L.w(o, t) * h(i, t);
        z(i, o) = s;
      }
    if (k + 1 == mlp.layers.size()) return z;  // linear output layer
    Grid2D a(z.rows(), z.cols());
    act_eval(mlp.cfg.activation, z.data(), a.data(), nullptr, nullptr, z.size());
    h = std::move(a);
  }
  return h;
}

Mlp tiny_net(Act kind, int in_dim, int out_dim, Rng& rng, double omega0 = 2.0) {
  MlpConfig mc;
  mc.input_dim = in_dim;
  mc.output_dim = out_dim;
  mc.hidden_layers = 2;
  mc.hidden_width = 16;
  mc.activation = Activation{kind, omega0};
  mc.init = default_init(kind);
  return build_mlp(mc, rng);
}

double weight_std(const Grid2D& w) {
  double sum = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    sum += w.data()[i];
    sq += w.data()[i] * w.data()[i];
  }
  const double mean = sum / w.size();
  return std::sqrt(sq / w.size() - mean * mean);
}

}  // namespace

TEST_CASE("activation values match closed forms at fixed points") {
  double s, ds, dds;
  double z = 0.7;
  act_eval({Act::sine, 3.0}, &z, &s, &ds, &dds, 1);
  CHECK(s == doctest::Approx(std::sin(2.1)).epsilon(1e-15));
  CHECK(ds == doctest::Approx(3.0 * std::cos(2.1)).epsilon(1e-15));
  CHECK(dds == doctest::Approx(-9.0 * std::sin(2.1)).epsilon(1e-15));

  z = -0.9;
  act_eval({Act::sigmoid, 0.0}, &z, &s, &ds, &dds, 1);
  const double sig = 1.0 / (1.0 + std::exp(0.9));
  CHECK(s == doctest::Approx(sig).epsilon(1e-14));
  CHECK(ds == doctest::Approx(sig * (1.0 - sig)).epsilon(1e-14));
  CHECK(dds == doctest::Approx(sig * (1.0 - sig) * (1.0 - 2.0 * sig)).epsilon(1e-13));

  z = 1.3;
  act_eval({Act::relu, 0.0}, &z, &s, &ds, &dds, 1);
  CHECK(s == 1.3);
  CHECK(ds == 1.0);
  CHECK(dds == 0.0);
  z = -0.2;
  act_eval({Act::relu, 0.0}, &z, &s, &ds, &dds, 1);
  CHECK(s == 0.0);
  CHECK(ds == 0.0);
  z = 0.0;  // the kink keeps the zero derivative
  act_eval({Act::relu, 0.0}, &z, &s, &ds, &dds, 1);
  CHECK(ds == 0.0);

  z = -0.5;
  act_eval({Act::elu, 0.0}, &z, &s, &ds, &dds, 1);
  CHECK(s == doctest::Approx(std::exp(-0.5) - 1.0).epsilon(1e-14));
  CHECK(ds == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
  CHECK(dds == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));

  z = 0.8;
  act_eval({Act::softplus, 0.0}, &z, &s, &ds, &dds, 1);
  CHECK(s == doctest::Approx(std::log1p(std::exp(0.8))).epsilon(1e-14));
  CHECK(ds == doctest::Approx(1.0 / (1.0 + std::exp(-0.8))).epsilon(1e-14));
}

TEST_CASE("activation first and second derivatives match finite differences") {
  const double h = 1e-5;
  // Points clear of the relu/elu/selu joints at zero.
  for (double z : {-1.7, -0.4, 0.3, 1.2}) {
    for (const Activation& a : kAllActs) {
      double s, ds, dds;
      act_eval(a, &z, &s, &ds, &dds, 1);
      const double sp = eval1(a, z + h), sm = eval1(a, z - h);
      const double fd1 = (sp - sm) / (2.0 * h);
      const double fd2 = (sp - 2.0 * s + sm) / (h * h);
      INFO(act_name(a.kind), " at z = ", z);
      CHECK(rel(ds, fd1) < 1e-6);
      // One-sided curvature magnitude check; fd2 loses ~6 digits to rounding.
      CHECK(std::fabs(dds - fd2) < 1e-4 * std::max(1.0, std::fabs(dds)));
    }
  }
}

TEST_CASE("default init follows the activation family") {
  CHECK(default_init(Act::relu) == InitScheme::kaiming_normal);
  CHECK(default_init(Act::softplus) == InitScheme::kaiming_normal);
  CHECK(default_init(Act::sigmoid) == InitScheme::xavier_normal);
  CHECK(default_init(Act::tanh) == InitScheme::xavier_normal);
  CHECK(default_init(Act::elu) == InitScheme::lecun_normal);
  CHECK(default_init(Act::selu) == InitScheme::lecun_normal);
  CHECK(default_init(Act::sine) == InitScheme::siren_uniform);
}

TEST_CASE("activation names round-trip") {
  for (const Activation& a : kAllActs) {
    Act got;
    CHECK(act_from_name(act_name(a.kind), &got));
    CHECK(got == a.kind);
  }
  Act got;
  CHECK_FALSE(act_from_name("swish", &got));
}

TEST_CASE("siren init draws uniforms within the layer-dependent bounds") {
  MlpConfig mc;
  mc.input_dim = 2;
  mc.output_dim = 1;
  mc.hidden_layers = 3;
  mc.hidden_width = 256;
  mc.activation = {Act::sine, 30.0};
  mc.init = InitScheme::siren_uniform;
  Rng rng(101);
  Mlp mlp = build_mlp(mc, rng);

  // First layer: U(-1/in, 1/in) with in = 2.
  double max0 = 0.0;
  for (std::size_t i = 0; i < mlp.layers[0].w.size(); ++i)
    max0 = std::max(max0, std::fabs(mlp.layers[0].w.data()[i]));
  CHECK(max0 <= 0.5);
  CHECK(max0 > 0.25);  // 512 draws essentially fill the interval

  // Later layers: U(-b, b) with b = sqrt(6/256)/30.
  const double bound = std::sqrt(6.0 / 256.0) / 30.0;
  for (int k : {1, 2, 3}) {
    double maxk = 0.0;
    for (std::size_t i = 0; i < mlp.layers[k].w.size(); ++i)
      maxk = std::max(maxk, std::fabs(mlp.layers[k].w.data()[i]));
    CHECK(maxk <= bound);
    CHECK(maxk > 0.9 * bound);
    // Uniform on [-b, b] has stddev b/sqrt(3).
    CHECK(weight_std(mlp.layers[k].w) == doctest::Approx(bound / std::sqrt(3.0)).epsilon(0.05));
  }

  for (const LayerParams& L : mlp.layers)
    for (double b : L.b) CHECK(b == 0.0);
}

TEST_CASE("normal init schemes hit their target stddev") {
  MlpConfig mc;
  mc.input_dim = 64;
  mc.output_dim = 64;
  mc.hidden_layers = 1;
  mc.hidden_width = 256;
  mc.activation = {Act::relu, 0.0};

  Rng r1(7);
  mc.init = InitScheme::kaiming_normal;
  Mlp kaiming = build_mlp(mc, r1);
  CHECK(weight_std(kaiming.layers[0].w) ==
        doctest::Approx(std::sqrt(2.0 / 64.0)).epsilon(0.05));
  CHECK(weight_std(kaiming.layers[1].w) ==
        doctest::Approx(std::sqrt(2.0 / 256.0)).epsilon(0.05));

  Rng r2(7);
  mc.init = InitScheme::xavier_normal;
  Mlp xavier = build_mlp(mc, r2);
  CHECK(weight_std(xavier.layers[0].w) ==
        doctest::Approx(std::sqrt(2.0 / (64.0 + 256.0))).epsilon(0.05));

  Rng r3(7);
  mc.init = InitScheme::lecun_normal;
  Mlp lecun = build_mlp(mc, r3);
  CHECK(weight_std(lecun.layers[0].w) == doctest::Approx(std::sqrt(1.0 / 64.0)).epsilon(0.05));
}

TEST_CASE("build_mlp layer shapes and param_count") {
  MlpConfig mc;
  mc.input_dim = 3;
  mc.output_dim = 4;
  mc.hidden_layers = 2;
  mc.hidden_width = 16;
  mc.pe_levels = 5;
  Rng rng(1);
  Mlp mlp = build_mlp(mc, rng);
  const int enc = 3 + 2 * 5 * 3;  // raw + sin/cos blocks
  REQUIRE(mlp.layers.size() == 3);
  CHECK(mlp.layers[0].in() == enc);
  CHECK(mlp.layers[0].out() == 16);
  CHECK(mlp.layers[1].in() == 16);
  CHECK(mlp.layers[2].out() == 4);
  CHECK(mlp.param_count() ==
        static_cast<std::size_t>(enc * 16 + 16 + 16 * 16 + 16 + 16 * 4 + 4));
}

TEST_CASE("forward matches the loop oracle for every activation") {
  Rng rng(33);
  Grid2D x(5, 3);
  for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0);
  for (const Activation& a : kAllActs) {
    Mlp mlp = tiny_net(a.kind, 3, 2, rng, a.omega0);
    ForwardCache cache;
    forward(mlp, x, cache);
    Grid2D want = forward_oracle(mlp, x);
    REQUIRE(cache.y.rows() == 5);
    REQUIRE(cache.y.cols() == 2);
    for (std::size_t i = 0; i < want.size(); ++i) {
      INFO(act_name(a.kind));
      CHECK(std::fabs(cache.y.data()[i] - want.data()[i]) < 1e-12);
    }
  }
}

TEST_CASE("forward_dual primal output is bitwise identical to forward") {
  Rng rng(41);
  Mlp mlp = tiny_net(Act::sine, 2, 3, rng);
  Grid2D x(4, 2), xdot(8, 2);
  for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0);
  for (std::size_t i = 0; i < xdot.size(); ++i) xdot.data()[i] = rng.uniform(-1.0, 1.0);
  ForwardCache plain, dual;
  forward(mlp, x, plain);
  forward_dual(mlp, x, xdot, 2, dual);
  for (std::size_t i = 0; i < plain.y.size(); ++i)
    CHECK(plain.y.data()[i] == dual.y.data()[i]);
}

TEST_CASE("forward_dual tangents match finite differences of the primal") {
  Rng rng(43);
  const double h = 1e-6;
  for (const Activation& a : kAllActs) {
    if (a.kind == Act::relu) continue;  // kinks break the smooth-path bound
    Mlp mlp = tiny_net(a.kind, 2, 2, rng, a.omega0);
    const int B = 3, D = 2;
    Grid2D x(B, 2), xdot(D * B, 2);
    for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-0.9, 0.9);
    for (std::size_t i = 0; i < xdot.size(); ++i) xdot.data()[i] = rng.uniform(-1.0, 1.0);

    ForwardCache cache;
    forward_dual(mlp, x, xdot, D, cache);

    for (int d = 0; d < D; ++d) {
      Grid2D xp = x, xm = x;
      for (int i = 0; i < B; ++i)
        for (int c = 0; c < 2; ++c) {
          xp(i, c) += h * xdot(d * B + i, c);
          xm(i, c) -= h * xdot(d * B + i, c);
        }
      ForwardCache fp, fm;
      forward(mlp, xp, fp);
      forward(mlp, xm, fm);
      for (int i = 0; i < B; ++i)
        for (int o = 0; o < 2; ++o) {
          const double fd = (fp.y(i, o) - fm.y(i, o)) / (2.0 * h);
          INFO(act_name(a.kind), " row ", i, " out ", o);
          CHECK(std::fabs(cache.ydot(d * B + i, o) - fd) <
                1e-6 * std::max(1.0, std::fabs(fd)));
        }
    }
  }
}

namespace {

// Sobolev batch loss on raw (unencoded) inputs, for gradient checks.
double loss_for(const Mlp& mlp, const Grid2D& x, const Grid2D& xdot, int dirs, const Grid2D& g,
                const Grid2D& t, double lambda) {
  ForwardCache cache;
  forward_dual(mlp, x, xdot, dirs, cache);
  const int B = x.rows(), C = g.cols();
  double L = 0.0;
  for (int i = 0; i < B; ++i)
    for (int c = 0; c < C; ++c) {
      const double dv = cache.y(i, c) - g(i, c);
      L += dv * dv;
      for (int d = 0; d < dirs; ++d) {
        const double dd = cache.ydot(d * B + i, c) - t(d * B + i, c);
        L += lambda * dd * dd;
      }
    }
  return L / B;
}

}  // namespace

TEST_CASE("backward_sobolev gradients match finite differences") {
  Rng rng(47);
  const double lambda = 1.0;
  for (Act kind : {Act::sine, Act::tanh, Act::softplus}) {
    Mlp mlp = tiny_net(kind, 2, 2, rng);
    const int B = 4, D = 2;
    Grid2D x(B, 2), xdot(D * B, 2), g(B, 2), t(D * B, 2);
    for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-0.9, 0.9);
    for (std::size_t i = 0; i < xdot.size(); ++i) xdot.data()[i] = rng.uniform(-1.0, 1.0);
    for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] = rng.uniform(-1.0, 1.0);
    for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = rng.uniform(-1.0, 1.0);

    ForwardCache cache;
    forward_dual(mlp, x, xdot, D, cache, true);
    Grid2D ybar(B, 2), ydotbar(D * B, 2);
    for (int i = 0; i < B; ++i)
      for (int c = 0; c < 2; ++c) {
        ybar(i, c) = 2.0 / B * (cache.y(i, c) - g(i, c));
        for (int d = 0; d < D; ++d)
          ydotbar(d * B + i, c) =
              2.0 * lambda / B * (cache.ydot(d * B + i, c) - t(d * B + i, c));
      }
    ParamGrads grads;
    backward_sobolev(mlp, x, xdot, cache, ybar, ydotbar, grads);

    for (std::size_t k = 0; k < mlp.layers.size(); ++k) {
      Grid2D& w = mlp.layers[k].w;
      for (int r = 0; r < w.rows(); r += 5)
        for (int c = 0; c < w.cols(); c += 3) {
          const double save = w(r, c);
          const double h = 1e-6;
          w(r, c) = save + h;
          mlp.layers[k].refresh_transpose();
          const double lp = loss_for(mlp, x, xdot, D, g, t, lambda);
          w(r, c) = save - h;
          mlp.layers[k].refresh_transpose();
          const double lm = loss_for(mlp, x, xdot, D, g, t, lambda);
          w(r, c) = save;
          mlp.layers[k].refresh_transpose();
          const double fd = (lp - lm) / (2.0 * h);
          INFO(act_name(kind), " layer ", k, " w(", r, ",", c, ")");
          CHECK(rel(grads.w[k](r, c), fd) < 1e-5);
        }
      for (std::size_t bi = 0; bi < mlp.layers[k].b.size(); bi += 7) {
        const double save = mlp.layers[k].b[bi];
        const double h = 1e-6;
        mlp.layers[k].b[bi] = save + h;
        const double lp = loss_for(mlp, x, xdot, D, g, t, lambda);
        mlp.layers[k].b[bi] = save - h;
        const double lm = loss_for(mlp, x, xdot, D, g, t, lambda);
        mlp.layers[k].b[bi] = save;
        const double fd = (lp - lm) / (2.0 * h);
        INFO(act_name(kind), " layer ", k, " b[", bi, "]");
        CHECK(rel(grads.b[k][bi], fd) < 1e-5);
      }
    }
  }
}

TEST_CASE("backward_value gradients match finite differences") {
  Rng rng(53);
  Mlp mlp = tiny_net(Act::tanh, 2, 1, rng);
  const int B = 6;
  Grid2D x(B, 2), g(B, 1);
  for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-0.9, 0.9);
  for (std::size_t i = 0; i < g.size(); ++i) g.data()[i] = rng.uniform(-1.0, 1.0);

  ForwardCache cache;
  forward(mlp, x, cache, true);
  Grid2D ybar(B, 1);
  for (int i = 0; i < B; ++i) ybar(i, 0) = 2.0 / B * (cache.y(i, 0) - g(i, 0));
  ParamGrads grads;
  backward_value(mlp, x, cache, ybar, grads);

  auto value_loss_now = [&]() {
    ForwardCache c2;
    forward(mlp, x, c2);
    double L = 0.0;
    for (int i = 0; i < B; ++i) {
      const double d = c2.y(i, 0) - g(i, 0);
      L += d * d;
    }
    return L / B;
  };

  for (std::size_t k = 0; k < mlp.layers.size(); ++k) {
    Grid2D& w = mlp.layers[k].w;
    for (int r = 0; r < w.rows(); r += 4)
      for (int c = 0; c < w.cols(); c += 3) {
        const double save = w(r, c);
        const double h = 1e-6;
        w(r, c) = save + h;
        mlp.layers[k].refresh_transpose();
        const double lp = value_loss_now();
        w(r, c) = save - h;
        mlp.layers[k].refresh_transpose();
        const double lm = value_loss_now();
        w(r, c) = save;
        mlp.layers[k].refresh_transpose();
        CHECK(rel(grads.w[k](r, c), (lp - lm) / (2.0 * h)) < 1e-5);
      }
  }
}

TEST_CASE("checkpoints round-trip bit exactly") {
  Rng rng(59);
  MlpConfig mc;
  mc.input_dim = 2;
  mc.output_dim = 3;
  mc.hidden_layers = 2;
  mc.hidden_width = 16;
  mc.activation = {Act::sine, 30.0};
  mc.pe_levels = 4;
  mc.pe_include_input = false;
  Mlp mlp = build_mlp(mc, rng);

  const std::string path = "ckpt_roundtrip_test.bin";
  save_checkpoint(mlp, path);
  Mlp back = load_checkpoint(path);
  std::remove(path.c_str());

  CHECK(back.cfg.input_dim == mc.input_dim);
  CHECK(back.cfg.output_dim == mc.output_dim);
  CHECK(back.cfg.hidden_layers == mc.hidden_layers);
  CHECK(back.cfg.hidden_width == mc.hidden_width);
  CHECK(back.cfg.activation.kind == mc.activation.kind);
  CHECK(back.cfg.activation.omega0 == mc.activation.omega0);
  CHECK(back.cfg.pe_levels == mc.pe_levels);
  CHECK(back.cfg.pe_include_input == mc.pe_include_input);

  REQUIRE(back.layers.size() == mlp.layers.size());
  for (std::size_t k = 0; k < mlp.layers.size(); ++k) {
    for (std::size_t i = 0; i < mlp.layers[k].w.size(); ++i)
      CHECK(back.layers[k].w.data()[i] == mlp.layers[k].w.data()[i]);
    for (std::size_t i = 0; i < mlp.layers[k].b.size(); ++i)
      CHECK(back.layers[k].b[i] == mlp.layers[k].b[i]);
  }

  Grid2D coords(3, 2);
  Rng crng(61);
  for (std::size_t i = 0; i < coords.size(); ++i) coords.data()[i] = crng.uniform(-1.0, 1.0);
  Grid2D y0 = predict(mlp, coords);
  Grid2D y1 = predict(back, coords);
  for (std::size_t i = 0; i < y0.size(); ++i) CHECK(y0.data()[i] == y1.data()[i]);
}

TEST_CASE("load_checkpoint rejects a malformed file") {
  const std::string path = "ckpt_garbage_test.bin";
  std::FILE* f = std::fopen(path.c_str(), "wb");
  REQUIRE(f != nullptr);
  const char junk[] = "this is not a checkpoint";
  std::fwrite(junk, 1, sizeof junk, f);
  std::fclose(f);
  CHECK_THROWS_AS(load_checkpoint(path), std::runtime_error);
  std::remove(path.c_str());
  CHECK_THROWS_AS(load_checkpoint("definitely_missing_file.bin"), std::runtime_error);
}
