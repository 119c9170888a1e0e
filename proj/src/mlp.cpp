#include "sinr/mlp.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <utility>

#include "sinr/kernels.hpp"

namespace sinr {

void LayerParams::refresh_transpose() {
  kernels::transpose(w.data(), wt.data(), w.rows(), w.cols());
}

std::size_t Mlp::param_count() const {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.w.size() + l.b.size();
  return n;
}

namespace {

void ensure(Grid2D& g, int rows, int cols) {
  if (g.rows() != rows || g.cols() != cols || g.channels() != 1) g = Grid2D(rows, cols);
}

void add_bias(Grid2D& z, const std::vector<double>& b) {
  for (int r = 0; r < z.rows(); ++r) {
    double* zr = z.row(r);
    for (int j = 0; j < z.cols(); ++j) zr[j] += b[j];
  }
}

// out = in * W^T (+ bias); the cached transpose makes this a plain gemm_nn.
void linear(const LayerParams& lp, const Grid2D& in, Grid2D& out, bool bias) {
  ensure(out, in.rows(), lp.out());
  kernels::gemm_nn(in.data(), lp.wt.data(), out.data(), in.rows(), lp.in(), lp.out(), false);
  if (bias) add_bias(out, lp.b);
}

void colsum(const Grid2D& a, std::vector<double>& out) {
  out.assign(static_cast<std::size_t>(a.cols()), 0.0);
  for (int r = 0; r < a.rows(); ++r) {
    const double* ar = a.row(r);
    for (int j = 0; j < a.cols(); ++j) out[j] += ar[j];
  }
}

void check_input(const Mlp& mlp, const Grid2D& x, const char* who) {
  if (mlp.layers.size() < 2)
    throw std::invalid_argument(std::string(who) + ": network has no layers");
  if (x.channels() != 1 || x.cols() != mlp.cfg.encoded_dim())
    throw std::invalid_argument(std::string(who) + ": input must be [N x " +
                                std::to_string(mlp.cfg.encoded_dim()) + "], got " +
                                std::to_string(x.rows()) + "x" + std::to_string(x.cols()) + "x" +
                                std::to_string(x.channels()));
}

void init_layer(LayerParams& lp, InitScheme scheme, double omega0, bool first, Rng& rng) {
  const int fan_in = lp.in();
  const int fan_out = lp.out();
  double* w = lp.w.data();
  const std::size_t n = lp.w.size();
  switch (scheme) {
    case InitScheme::kaiming_normal: {
      const double sd = std::sqrt(2.0 / fan_in);
      for (std::size_t i = 0; i < n; ++i) w[i] = rng.normal(0.0, sd);
      break;
    }
    case InitScheme::xavier_normal: {
      const double sd = std::sqrt(2.0 / (fan_in + fan_out));
      for (std::size_t i = 0; i < n; ++i) w[i] = rng.normal(0.0, sd);
      break;
    }
    case InitScheme::lecun_normal: {
      const double sd = std::sqrt(1.0 / fan_in);
      for (std::size_t i = 0; i < n; ++i) w[i] = rng.normal(0.0, sd);
      break;
    }
    case InitScheme::siren_uniform: {
      const double bound = first ? 1.0 / fan_in : std::sqrt(6.0 / fan_in) / omega0;
      for (std::size_t i = 0; i < n; ++i) w[i] = rng.uniform(-bound, bound);
      break;
    }
  }
  lp.refresh_transpose();
}

}  // namespace

Mlp build_mlp(const MlpConfig& cfg, Rng& rng) {
  if (cfg.input_dim < 1 || cfg.output_dim < 1 || cfg.hidden_width < 1 || cfg.pe_levels < 0)
    throw std::invalid_argument("build_mlp: dimensions must be positive");
  if (cfg.hidden_layers < 1)
    throw std::invalid_argument("build_mlp: at least one hidden layer required");
  if (cfg.activation.kind == Act::sine && cfg.activation.omega0 == 0.0)
    throw std::invalid_argument("build_mlp: sine activation needs a nonzero omega0");
  Mlp mlp;
  mlp.cfg = cfg;
  mlp.layers.reserve(static_cast<std::size_t>(cfg.hidden_layers) + 1);
  for (int k = 0; k < cfg.hidden_layers; ++k)
    mlp.layers.emplace_back(cfg.hidden_width, k == 0 ? cfg.encoded_dim() : cfg.hidden_width);
  mlp.layers.emplace_back(cfg.output_dim, cfg.hidden_width);
  for (std::size_t k = 0; k < mlp.layers.size(); ++k)
    init_layer(mlp.layers[k], cfg.init, cfg.activation.omega0, k == 0, rng);
  return mlp;
}

void forward(const Mlp& mlp, const Grid2D& x, ForwardCache& cache, bool need_ds) {
  check_input(mlp, x, "forward");
  const int hidden = static_cast<int>(mlp.layers.size()) - 1;
  cache.batch = x.rows();
  cache.dirs = 0;
  cache.z.resize(hidden);
  cache.h.resize(hidden);
  cache.ds.resize(need_ds ? hidden : 0);
  cache.dds.clear();
  cache.zdot.clear();
  cache.hdot.clear();
  const Grid2D* cur = &x;
  for (int k = 0; k < hidden; ++k) {
    linear(mlp.layers[k], *cur, cache.z[k], true);
    const Grid2D& z = cache.z[k];
    ensure(cache.h[k], z.rows(), z.cols());
    double* ds = nullptr;
    if (need_ds) {
      ensure(cache.ds[k], z.rows(), z.cols());
      ds = cache.ds[k].data();
    }
    act_eval(mlp.cfg.activation, z.data(), cache.h[k].data(), ds, nullptr, z.size());
    cur = &cache.h[k];
  }
  linear(mlp.layers[hidden], *cur, cache.y, true);
}

void forward_dual(const Mlp& mlp, const Grid2D& x, const Grid2D& xdot, int dirs,
                  ForwardCache& cache, bool need_dds) {
  check_input(mlp, x, "forward_dual");
  if (dirs < 1) throw std::invalid_argument("forward_dual: dirs must be >= 1");
  if (xdot.channels() != 1 || xdot.rows() != dirs * x.rows() || xdot.cols() != x.cols())
    throw std::invalid_argument(
        "forward_dual: xdot must be [dirs*N x encoded_dim] (stacked tangent blocks), got " +
        std::to_string(xdot.rows()) + "x" + std::to_string(xdot.cols()));
  const int hidden = static_cast<int>(mlp.layers.size()) - 1;
  cache.batch = x.rows();
  cache.dirs = dirs;
  cache.z.resize(hidden);
  cache.h.resize(hidden);
  cache.ds.resize(hidden);
  cache.dds.resize(need_dds ? hidden : 0);
  cache.zdot.resize(hidden);
  cache.hdot.resize(hidden);
  const Grid2D* cur = &x;
  const Grid2D* curdot = &xdot;
  for (int k = 0; k < hidden; ++k) {
    linear(mlp.layers[k], *cur, cache.z[k], true);
    linear(mlp.layers[k], *curdot, cache.zdot[k], false);  // tangents carry no bias
    const Grid2D& z = cache.z[k];
    ensure(cache.h[k], z.rows(), z.cols());
    ensure(cache.ds[k], z.rows(), z.cols());
    double* dds = nullptr;
    if (need_dds) {
      ensure(cache.dds[k], z.rows(), z.cols());
      dds = cache.dds[k].data();
    }
    act_eval(mlp.cfg.activation, z.data(), cache.h[k].data(), cache.ds[k].data(), dds, z.size());
    // hdot = sigma'(z) broadcast over the tangent blocks, times zdot.
    ensure(cache.hdot[k], dirs * z.rows(), z.cols());
    const std::size_t blk = z.size();
    for (int d = 0; d < dirs; ++d)
      kernels::vmul(cache.ds[k].data(), cache.zdot[k].data() + d * blk,
                    cache.hdot[k].data() + d * blk, blk);
    cur = &cache.h[k];
    curdot = &cache.hdot[k];
  }
  linear(mlp.layers[hidden], *cur, cache.y, true);
  linear(mlp.layers[hidden], *curdot, cache.ydot, false);
}

void ParamGrads::match(const Mlp& mlp) {
  w.resize(mlp.layers.size());
  b.resize(mlp.layers.size());
  for (std::size_t k = 0; k < mlp.layers.size(); ++k) {
    ensure(w[k], mlp.layers[k].out(), mlp.layers[k].in());
    b[k].resize(mlp.layers[k].b.size(), 0.0);
  }
}

void backward_sobolev(const Mlp& mlp, const Grid2D& x, const Grid2D& xdot,
                      const ForwardCache& cache, const Grid2D& ybar, const Grid2D& ydotbar,
                      ParamGrads& grads) {
  const int hidden = static_cast<int>(mlp.layers.size()) - 1;
  const int B = cache.batch;
  const int D = cache.dirs;
  const int out_dim = mlp.cfg.output_dim;
  if (D < 1 || static_cast<int>(cache.dds.size()) != hidden)
    throw std::invalid_argument(
        "backward_sobolev: cache must come from forward_dual with need_dds");
  if (ybar.rows() != B || ybar.cols() != out_dim)
    throw std::invalid_argument("backward_sobolev: ybar must be [batch x output_dim]");
  if (ydotbar.rows() != D * B || ydotbar.cols() != out_dim)
    throw std::invalid_argument("backward_sobolev: ydotbar must be [dirs*batch x output_dim]");
  grads.match(mlp);

  // Output layer: grad_W = ybar^T h + ydotbar^T hdot, grad_b = colsum(ybar).
  const Grid2D& hp_out = cache.h[hidden - 1];
  const Grid2D& hdp_out = cache.hdot[hidden - 1];
  const LayerParams& lout = mlp.layers[hidden];
  kernels::gemm_tn(ybar.data(), hp_out.data(), grads.w[hidden].data(), lout.out(), B, lout.in(),
                   false);
  kernels::gemm_tn(ydotbar.data(), hdp_out.data(), grads.w[hidden].data(), lout.out(), D * B,
                   lout.in(), true);
  colsum(ybar, grads.b[hidden]);

  // Running adjoints entering layer k: gbar = dL/dh_k, gdot = dL/dhdot_k.
  Grid2D gbar(B, lout.in());
  Grid2D gdot(D * B, lout.in());
  kernels::gemm_nn(ybar.data(), lout.w.data(), gbar.data(), B, lout.out(), lout.in(), false);
  kernels::gemm_nn(ydotbar.data(), lout.w.data(), gdot.data(), D * B, lout.out(), lout.in(),
                   false);
  Grid2D gbar_next, gdot_next;

  for (int k = hidden; k-- > 0;) {
    const std::size_t blk = cache.z[k].size();
    // abar = gbar.*sigma' + sum_d gdot[d].*zdot[d].*sigma'' (in place on gbar,
    // while gdot still holds dL/dhdot).
    kernels::vmul(gbar.data(), cache.ds[k].data(), gbar.data(), blk);
    for (int d = 0; d < D; ++d)
      kernels::vmul3_add(gdot.data() + d * blk, cache.zdot[k].data() + d * blk,
                         cache.dds[k].data(), gbar.data(), blk);
    // bbar = gdot.*sigma' per block (in place).
    for (int d = 0; d < D; ++d)
      kernels::vmul(gdot.data() + d * blk, cache.ds[k].data(), gdot.data() + d * blk, blk);

    const Grid2D& hp = k > 0 ? cache.h[k - 1] : x;
    const Grid2D& hdp = k > 0 ? cache.hdot[k - 1] : xdot;
    const LayerParams& lk = mlp.layers[k];
    kernels::gemm_tn(gbar.data(), hp.data(), grads.w[k].data(), lk.out(), B, lk.in(), false);
    kernels::gemm_tn(gdot.data(), hdp.data(), grads.w[k].data(), lk.out(), D * B, lk.in(), true);
    colsum(gbar, grads.b[k]);

    if (k > 0) {
      ensure(gbar_next, B, lk.in());
      ensure(gdot_next, D * B, lk.in());
      kernels::gemm_nn(gbar.data(), lk.w.data(), gbar_next.data(), B, lk.out(), lk.in(), false);
      kernels::gemm_nn(gdot.data(), lk.w.data(), gdot_next.data(), D * B, lk.out(), lk.in(),
                       false);
      std::swap(gbar, gbar_next);
      std::swap(gdot, gdot_next);
    }
  }
}

void backward_value(const Mlp& mlp, const Grid2D& x, const ForwardCache& cache,
                    const Grid2D& ybar, ParamGrads& grads) {
  const int hidden = static_cast<int>(mlp.layers.size()) - 1;
  const int B = cache.batch;
  if (static_cast<int>(cache.ds.size()) != hidden)
    throw std::invalid_argument("backward_value: cache must come from forward with need_ds");
  if (ybar.rows() != B || ybar.cols() != mlp.cfg.output_dim)
    throw std::invalid_argument("backward_value: ybar must be [batch x output_dim]");
  grads.match(mlp);

  const LayerParams& lout = mlp.layers[hidden];
  kernels::gemm_tn(ybar.data(), cache.h[hidden - 1].data(), grads.w[hidden].data(), lout.out(), B,
                   lout.in(), false);
  colsum(ybar, grads.b[hidden]);

  Grid2D gbar(B, lout.in());
  kernels::gemm_nn(ybar.data(), lout.w.data(), gbar.data(), B, lout.out(), lout.in(), false);
  Grid2D gbar_next;

  for (int k = hidden; k-- > 0;) {
    kernels::vmul(gbar.data(), cache.ds[k].data(), gbar.data(), cache.z[k].size());
    const Grid2D& hp = k > 0 ? cache.h[k - 1] : x;
    const LayerParams& lk = mlp.layers[k];
    kernels::gemm_tn(gbar.data(), hp.data(), grads.w[k].data(), lk.out(), B, lk.in(), false);
    colsum(gbar, grads.b[k]);
    if (k > 0) {
      ensure(gbar_next, B, lk.in());
      kernels::gemm_nn(gbar.data(), lk.w.data(), gbar_next.data(), B, lk.out(), lk.in(), false);
      std::swap(gbar, gbar_next);
    }
  }
}

Grid2D predict(const Mlp& mlp, const Grid2D& coords) {
  ForwardCache cache;
  if (mlp.cfg.use_encoding()) {
    forward(mlp, mlp.cfg.encoding().encode_batch(coords), cache, false);
  } else {
    forward(mlp, coords, cache, false);
  }
  return std::move(cache.y);
}

// --- checkpoint format ---
// Little-endian; written and read on x86-64 without byte swapping.
//   magic "SINRCKPT" | u32 version | u32 activation | f64 omega0
//   u32 input_dim | u32 output_dim | u32 use_encoding | u32 pe_levels
//   u32 pe_include_input | u32 layer_count
//   per layer: u32 out | u32 in | f64 w[out*in] row-major | f64 b[out]

namespace {

constexpr char kMagic[8] = {'S', 'I', 'N', 'R', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

void w_u32(std::ostream& f, std::uint32_t v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void w_f64(std::ostream& f, double v) { f.write(reinterpret_cast<const char*>(&v), sizeof v); }

std::uint32_t r_u32(std::istream& f, const std::string& path) {
  std::uint32_t v = 0;
  if (!f.read(reinterpret_cast<char*>(&v), sizeof v))
    throw std::runtime_error("load_checkpoint: truncated file " + path);
  return v;
}
double r_f64(std::istream& f, const std::string& path) {
  double v = 0;
  if (!f.read(reinterpret_cast<char*>(&v), sizeof v))
    throw std::runtime_error("load_checkpoint: truncated file " + path);
  return v;
}

}  // namespace

void save_checkpoint(const Mlp& mlp, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("save_checkpoint: cannot open " + path);
  f.write(kMagic, sizeof kMagic);
  w_u32(f, kVersion);
  w_u32(f, static_cast<std::uint32_t>(mlp.cfg.activation.kind));
  w_f64(f, mlp.cfg.activation.omega0);
  w_u32(f, static_cast<std::uint32_t>(mlp.cfg.input_dim));
  w_u32(f, static_cast<std::uint32_t>(mlp.cfg.output_dim));
  w_u32(f, mlp.cfg.use_encoding() ? 1u : 0u);
  w_u32(f, static_cast<std::uint32_t>(mlp.cfg.pe_levels));
  w_u32(f, mlp.cfg.pe_include_input ? 1u : 0u);
  w_u32(f, static_cast<std::uint32_t>(mlp.layers.size()));
  for (const auto& l : mlp.layers) {
    w_u32(f, static_cast<std::uint32_t>(l.out()));
    w_u32(f, static_cast<std::uint32_t>(l.in()));
    f.write(reinterpret_cast<const char*>(l.w.data()),
            static_cast<std::streamsize>(l.w.size() * sizeof(double)));
    f.write(reinterpret_cast<const char*>(l.b.data()),
            static_cast<std::streamsize>(l.b.size() * sizeof(double)));
  }
  f.flush();
  if (!f) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

Mlp load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_checkpoint: cannot open " + path);
  char magic[8];
  if (!f.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw std::runtime_error("load_checkpoint: bad magic in " + path);
  const std::uint32_t version = r_u32(f, path);
  if (version != kVersion)
    throw std::runtime_error("load_checkpoint: unsupported version " + std::to_string(version) +
                             " in " + path);
  const std::uint32_t act = r_u32(f, path);
  if (act > static_cast<std::uint32_t>(Act::sine))
    throw std::runtime_error("load_checkpoint: unknown activation tag in " + path);
  MlpConfig cfg;
  cfg.activation.kind = static_cast<Act>(act);
  cfg.activation.omega0 = r_f64(f, path);
  cfg.input_dim = static_cast<int>(r_u32(f, path));
  cfg.output_dim = static_cast<int>(r_u32(f, path));
  const bool use_enc = r_u32(f, path) != 0;
  cfg.pe_levels = static_cast<int>(r_u32(f, path));
  cfg.pe_include_input = r_u32(f, path) != 0;
  if (use_enc != (cfg.pe_levels > 0))
    throw std::runtime_error("load_checkpoint: inconsistent encoding flags in " + path);
  const std::uint32_t nlayers = r_u32(f, path);
  if (nlayers < 2 || nlayers > 1024)
    throw std::runtime_error("load_checkpoint: implausible layer count in " + path);
  cfg.hidden_layers = static_cast<int>(nlayers) - 1;
  cfg.init = default_init(cfg.activation.kind);

  Mlp mlp;
  mlp.layers.reserve(nlayers);
  for (std::uint32_t k = 0; k < nlayers; ++k) {
    const std::uint32_t out = r_u32(f, path);
    const std::uint32_t in = r_u32(f, path);
    if (out < 1 || in < 1 || out > 1000000 || in > 1000000)
      throw std::runtime_error("load_checkpoint: implausible layer shape in " + path);
    LayerParams lp(static_cast<int>(out), static_cast<int>(in));
    if (!f.read(reinterpret_cast<char*>(lp.w.data()),
                static_cast<std::streamsize>(lp.w.size() * sizeof(double))) ||
        !f.read(reinterpret_cast<char*>(lp.b.data()),
                static_cast<std::streamsize>(lp.b.size() * sizeof(double))))
      throw std::runtime_error("load_checkpoint: truncated file " + path);
    lp.refresh_transpose();
    mlp.layers.push_back(std::move(lp));
  }
  cfg.hidden_width = mlp.layers.front().out();
  // Structural consistency: chained dims, uniform hidden width, declared ends.
  if (mlp.layers.front().in() != cfg.encoded_dim() ||
      mlp.layers.back().out() != cfg.output_dim)
    throw std::runtime_error("load_checkpoint: layer shapes disagree with header in " + path);
  for (std::size_t k = 1; k < mlp.layers.size(); ++k) {
    if (mlp.layers[k].in() != mlp.layers[k - 1].out())
      throw std::runtime_error("load_checkpoint: layer shapes do not chain in " + path);
    if (k + 1 < mlp.layers.size() && mlp.layers[k].out() != cfg.hidden_width)
      throw std::runtime_error("load_checkpoint: non-uniform hidden width in " + path);
  }
  mlp.cfg = cfg;
  return mlp;
}

}  // namespace sinr
