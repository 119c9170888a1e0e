#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sinr/grid.hpp"
#include "sinr/mlp.hpp"

namespace sinr {

// Supervision for a batch: primal targets and, for derivative-supervised
// training, dirs stacked tangent targets (block d covers rows
// [d*B, (d+1)*B), matching the forward_dual layout).
struct DualBatch {
  Grid2D values;    // [B x C]
  Grid2D tangents;  // [dirs*B x C]; empty when dirs == 0
  int dirs = 0;
};

// L = 1/B sum_i ( ||y_i - g_i||^2 + lambda * sum_d ||ydot_i^d - t_i^d||^2 ),
// mean over the batch, sums over channels and directions.
struct SobolevLossTerms {
  double value = 0.0;  // the unweighted value term
  double deriv = 0.0;  // the unweighted derivative term
  double total(double lambda) const { return value + lambda * deriv; }
};

// Computes both terms and, when requested, the reverse-pass seeds
// ybar = (2/B)(y - g) and ydotbar = (2*lambda/B)(ydot - t).
SobolevLossTerms sobolev_loss(const Grid2D& y, const Grid2D& ydot, const DualBatch& target,
                              double lambda, Grid2D* ybar, Grid2D* ydotbar);

// Value term only; ybar = (2/B)(y - g) when requested.
double value_loss(const Grid2D& y, const Grid2D& values, Grid2D* ybar);

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias correction, one moment pair per parameter tensor.
class Adam {
 public:
  Adam(const Mlp& mlp, const AdamConfig& cfg);
  void step(Mlp& mlp, const ParamGrads& grads);
  int steps() const { return t_; }

 private:
  AdamConfig cfg_;
  int t_ = 0;
  std::vector<std::vector<double>> mw_, vw_, mb_, vb_;
};

// Full training problem over a fixed coordinate set. Encoded inputs and
// tangent seeds are computed once up front.
struct TrainData {
  Grid2D inputs;     // [N x input_dim] raw coordinates
  DualBatch targets; // values [N x C]; tangents [dirs*N x C] when supervised
};

struct TrainOptions {
  int iterations = 5000;
  bool sobolev = true;  // false trains on values alone, skipping all tangent code
  double lambda = 1.0;
  AdamConfig adam;
  int batch_size = 0;  // 0 trains full batch; otherwise uniform draws per step
  std::uint64_t batch_seed = 1;
  int log_interval = 100;
  std::function<double(const Mlp&)> eval;  // optional PSNR probe at log rows
};

struct LogRow {
  int iteration;      // 1-based
  double loss_value;
  double loss_deriv;  // nan for value-only training
  double psnr;        // nan when no evaluator is set
};

// history gets a row every log_interval iterations; the final iteration is
// always present as the last row.
struct TrainResult {
  std::vector<LogRow> history;
};

// Thrown when the loss stops being finite; training state is abandoned.
struct DivergedError : std::runtime_error {
  DivergedError(int it, double value, double deriv);
  int iteration;
};

TrainResult train(Mlp& mlp, const TrainData& data, const TrainOptions& opt);

// CSV columns: iteration,loss_val,loss_der,psnr_eval. Doubles are printed
// with shortest round-trip formatting so files are byte-stable.
void write_history_csv(const std::vector<LogRow>& history, const std::string& path);

}  // namespace sinr
