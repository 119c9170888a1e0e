#pragma once

#include <string>
#include <vector>

#include "sinr/activation.hpp"
#include "sinr/encoding.hpp"
#include "sinr/grid.hpp"
#include "sinr/rng.hpp"

namespace sinr {

class Rng;

// One dense layer. w is canonical [out x in]; wt is its transpose kept in
// sync so both row-major products in the passes map onto gemm_nn / gemm_tn.
// Call refresh_transpose() after any direct edit of w.
struct LayerParams {
  Grid2D w;
  Grid2D wt;
  std::vector<double> b;

  LayerParams() = default;
  LayerParams(int out, int in) : w(out, in), wt(in, out), b(out, 0.0) {}
  int in() const { return w.cols(); }
  int out() const { return w.rows(); }
  void refresh_transpose();
};

struct MlpConfig {
  int input_dim = 2;   // raw coordinate dim, before any encoding
  int output_dim = 1;
  int hidden_layers = 4;
  int hidden_width = 256;
  Activation activation{Act::sine, 30.0};
  InitScheme init = InitScheme::siren_uniform;
  int pe_levels = 0;  // 0 disables the positional encoding
  bool pe_include_input = true;

  bool use_encoding() const { return pe_levels > 0; }
  PositionalEncoding encoding() const {
    return PositionalEncoding{pe_levels, pe_include_input, input_dim};
  }
  int encoded_dim() const {
    return use_encoding() ? encoding().output_dim() : input_dim;
  }
};

struct Mlp {
  MlpConfig cfg;
  std::vector<LayerParams> layers;  // hidden layers then linear output layer

  std::size_t param_count() const;
};

// Weights drawn layer by layer, row-major within each matrix; biases zero.
// siren_uniform uses U(-1/in, 1/in) on the first layer and
// U(-sqrt(6/in)/omega0, sqrt(6/in)/omega0) after; the normal schemes use
// stddev sqrt(2/in) (kaiming), sqrt(2/(in+out)) (xavier), sqrt(1/in) (lecun)
// on every layer including the output.
Mlp build_mlp(const MlpConfig& cfg, Rng& rng);

// Buffers produced by the forward passes and consumed by the backward pass.
// Tangent blocks are stacked row-wise: block d of zdot/hdot/ydot covers rows
// [d*batch, (d+1)*batch).
struct ForwardCache {
  int batch = 0;
  int dirs = 0;  // tangent direction count, 0 for a primal-only pass
  std::vector<Grid2D> z;     // hidden pre-activations [batch x width]
  std::vector<Grid2D> h;     // hidden activations
  std::vector<Grid2D> ds;    // sigma'(z), when requested
  std::vector<Grid2D> dds;   // sigma''(z), when requested
  std::vector<Grid2D> zdot;  // stacked tangent pre-activations [dirs*batch x width]
  std::vector<Grid2D> hdot;  // stacked tangent activations
  Grid2D y;                  // output [batch x output_dim]
  Grid2D ydot;               // stacked output tangents [dirs*batch x output_dim]
};

// Primal pass. x is encoded input [batch x encoded_dim]. need_ds requests
// sigma' caching for a following value-only backward pass.
void forward(const Mlp& mlp, const Grid2D& x, ForwardCache& cache, bool need_ds = false);

// Primal plus dirs stacked tangent blocks. xdot is [dirs*batch x
// encoded_dim]. sigma' is always cached; need_dds requests sigma'' for a
// following backward pass.
void forward_dual(const Mlp& mlp, const Grid2D& x, const Grid2D& xdot, int dirs,
                  ForwardCache& cache, bool need_dds = false);

// Parameter gradients, mirroring Mlp::layers.
struct ParamGrads {
  std::vector<Grid2D> w;
  std::vector<std::vector<double>> b;

  void match(const Mlp& mlp);
};

// Reverse pass over the combined primal and tangent graph. ybar = dL/dy
// [batch x out], ydotbar = dL/dydot stacked [dirs*batch x out]. Requires the
// cache of a forward_dual call with need_dds = true on the same x / xdot.
void backward_sobolev(const Mlp& mlp, const Grid2D& x, const Grid2D& xdot,
                      const ForwardCache& cache, const Grid2D& ybar, const Grid2D& ydotbar,
                      ParamGrads& grads);

// Reverse pass with no tangent terms. Requires forward(need_ds = true).
// Kept structurally separate so value-only training never touches the
// tangent machinery.
void backward_value(const Mlp& mlp, const Grid2D& x, const ForwardCache& cache,
                    const Grid2D& ybar, ParamGrads& grads);

// Encode raw coordinates (if the config enables it) and run the primal pass.
Grid2D predict(const Mlp& mlp, const Grid2D& coords);

// Little-endian binary checkpoint. Same parameters in, bit-identical file
// out; load rebuilds an Mlp that predicts bit-identically.
void save_checkpoint(const Mlp& mlp, const std::string& path);
Mlp load_checkpoint(const std::string& path);

}  // namespace sinr
