#include "sinr/training.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <system_error>

#include "sinr/kernels.hpp"
#include "sinr/rng.hpp"

namespace sinr {

namespace {

void ensure(Grid2D& g, int rows, int cols) {
  if (g.rows() != rows || g.cols() != cols || g.channels() != 1) g = Grid2D(rows, cols);
}

// acc += sum((a-b)^2), writing scale*(a-b) to res when given.
double residual_sumsq(const Grid2D& a, const Grid2D& b, double scale, Grid2D* res) {
  double acc = 0.0;
  const double* pa = a.data();
  const double* pb = b.data();
  double* pr = nullptr;
  if (res) {
    ensure(*res, a.rows(), a.cols());
    pr = res->data();
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = pa[i] - pb[i];
    acc += d * d;
    if (pr) pr[i] = scale * d;
  }
  return acc;
}

}  // namespace

SobolevLossTerms sobolev_loss(const Grid2D& y, const Grid2D& ydot, const DualBatch& target,
                              double lambda, Grid2D* ybar, Grid2D* ydotbar) {
  if (!y.same_shape(target.values))
    throw std::invalid_argument("sobolev_loss: value target shape mismatch");
  if (target.dirs < 1) throw std::invalid_argument("sobolev_loss: target carries no tangents");
  if (ydot.rows() != target.dirs * y.rows() || ydot.cols() != y.cols())
    throw std::invalid_argument("sobolev_loss: ydot must be [dirs*B x C]");
  if (!ydot.same_shape(target.tangents))
    throw std::invalid_argument("sobolev_loss: tangent target shape mismatch");
  const double inv_b = 1.0 / y.rows();
  SobolevLossTerms terms;
  terms.value = inv_b * residual_sumsq(y, target.values, 2.0 * inv_b, ybar);
  terms.deriv = inv_b * residual_sumsq(ydot, target.tangents, 2.0 * lambda * inv_b, ydotbar);
  return terms;
}

double value_loss(const Grid2D& y, const Grid2D& values, Grid2D* ybar) {
  if (!y.same_shape(values)) throw std::invalid_argument("value_loss: target shape mismatch");
  const double inv_b = 1.0 / y.rows();
  return inv_b * residual_sumsq(y, values, 2.0 * inv_b, ybar);
}

Adam::Adam(const Mlp& mlp, const AdamConfig& cfg) : cfg_(cfg) {
  mw_.reserve(mlp.layers.size());
  for (const auto& l : mlp.layers) {
    mw_.emplace_back(l.w.size(), 0.0);
    vw_.emplace_back(l.w.size(), 0.0);
    mb_.emplace_back(l.b.size(), 0.0);
    vb_.emplace_back(l.b.size(), 0.0);
  }
}

void Adam::step(Mlp& mlp, const ParamGrads& grads) {
  if (grads.w.size() != mlp.layers.size())
    throw std::invalid_argument("Adam::step: gradient layout mismatch");
  ++t_;
  const double bias1 = 1.0 - std::pow(cfg_.beta1, t_);
  const double bias2 = 1.0 - std::pow(cfg_.beta2, t_);
  for (std::size_t k = 0; k < mlp.layers.size(); ++k) {
    LayerParams& l = mlp.layers[k];
    kernels::adam_update(l.w.data(), mw_[k].data(), vw_[k].data(), grads.w[k].data(), l.w.size(),
                         cfg_.lr, cfg_.beta1, cfg_.beta2, cfg_.eps, bias1, bias2);
    kernels::adam_update(l.b.data(), mb_[k].data(), vb_[k].data(), grads.b[k].data(), l.b.size(),
                         cfg_.lr, cfg_.beta1, cfg_.beta2, cfg_.eps, bias1, bias2);
    l.refresh_transpose();
  }
}

DivergedError::DivergedError(int it, double value, double deriv)
    : std::runtime_error("training diverged at iteration " + std::to_string(it) +
                         " (loss_val=" + std::to_string(value) +
                         ", loss_der=" + std::to_string(deriv) + ")"),
      iteration(it) {}

namespace {

// Copy selected rows of src into dst (dst is resized to idx.size() rows).
void gather_rows(const Grid2D& src, const std::vector<int>& idx, Grid2D& dst) {
  ensure(dst, static_cast<int>(idx.size()), src.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const double* s = src.row(idx[i]);
    double* d = dst.row(static_cast<int>(i));
    for (int j = 0; j < src.cols(); ++j) d[j] = s[j];
  }
}

// Same, but per tangent block: row d*N + idx[i] of src lands at d*B + i.
void gather_blocks(const Grid2D& src, const std::vector<int>& idx, int dirs, int n, Grid2D& dst) {
  const int b = static_cast<int>(idx.size());
  ensure(dst, dirs * b, src.cols());
  for (int d = 0; d < dirs; ++d)
    for (int i = 0; i < b; ++i) {
      const double* s = src.row(d * n + idx[i]);
      double* o = dst.row(d * b + i);
      for (int j = 0; j < src.cols(); ++j) o[j] = s[j];
    }
}

}  // namespace

TrainResult train(Mlp& mlp, const TrainData& data, const TrainOptions& opt) {
  const int n = data.inputs.rows();
  const int input_dim = mlp.cfg.input_dim;
  const int dirs = input_dim;
  if (data.inputs.cols() != input_dim || data.inputs.channels() != 1)
    throw std::invalid_argument("train: inputs must be [N x input_dim]");
  if (data.targets.values.rows() != n || data.targets.values.cols() != mlp.cfg.output_dim)
    throw std::invalid_argument("train: value targets must be [N x output_dim]");
  if (opt.sobolev) {
    if (data.targets.dirs != dirs)
      throw std::invalid_argument("train: need one tangent target block per input dim");
    if (data.targets.tangents.rows() != dirs * n ||
        data.targets.tangents.cols() != mlp.cfg.output_dim)
      throw std::invalid_argument("train: tangent targets must be [dirs*N x output_dim]");
  }
  if (opt.iterations < 1) throw std::invalid_argument("train: iterations must be positive");
  if (opt.log_interval < 1) throw std::invalid_argument("train: log_interval must be positive");

  // Encode once; coordinates never change during training.
  Grid2D enc;
  Grid2D encdot;
  if (mlp.cfg.use_encoding()) {
    const PositionalEncoding pe = mlp.cfg.encoding();
    enc = pe.encode_batch(data.inputs);
    if (opt.sobolev) {
      const std::vector<Grid2D> blocks = pe.tangent_batch(data.inputs);
      encdot = Grid2D(dirs * n, pe.output_dim());
      for (int d = 0; d < dirs; ++d)
        for (int i = 0; i < n; ++i) {
          const double* s = blocks[d].row(i);
          double* o = encdot.row(d * n + i);
          for (int j = 0; j < pe.output_dim(); ++j) o[j] = s[j];
        }
    }
  } else {
    enc = data.inputs;
    if (opt.sobolev) {
      // Tangent of the identity encoding in direction d is basis vector e_d.
      encdot = Grid2D(dirs * n, input_dim);
      for (int d = 0; d < dirs; ++d)
        for (int i = 0; i < n; ++i) encdot(d * n + i, d) = 1.0;
    }
  }

  const bool minibatch = opt.batch_size > 0 && opt.batch_size < n;
  Rng batch_rng(opt.batch_seed);
  std::vector<int> idx;
  Grid2D bx, bxdot;
  DualBatch btarget;
  btarget.dirs = opt.sobolev ? dirs : 0;

  Adam adam(mlp, opt.adam);
  ForwardCache cache;
  ParamGrads grads;
  Grid2D ybar, ydotbar;
  TrainResult result;
  const double qnan = std::numeric_limits<double>::quiet_NaN();
  double last_lv = qnan, last_ld = qnan;

  for (int it = 0; it < opt.iterations; ++it) {
    const Grid2D* x = &enc;
    const Grid2D* xdot = &encdot;
    const DualBatch* target = &data.targets;
    if (minibatch) {
      idx.resize(opt.batch_size);
      for (int& v : idx) v = static_cast<int>(batch_rng.next_u64() % n);
      gather_rows(enc, idx, bx);
      gather_rows(data.targets.values, idx, btarget.values);
      if (opt.sobolev) {
        gather_blocks(encdot, idx, dirs, n, bxdot);
        gather_blocks(data.targets.tangents, idx, dirs, n, btarget.tangents);
      }
      x = &bx;
      xdot = &bxdot;
      target = &btarget;
    }

    double lv = 0.0, ld = qnan;
    if (opt.sobolev) {
      forward_dual(mlp, *x, *xdot, dirs, cache, true);
      const SobolevLossTerms terms =
          sobolev_loss(cache.y, cache.ydot, *target, opt.lambda, &ybar, &ydotbar);
      lv = terms.value;
      ld = terms.deriv;
      if (!std::isfinite(lv) || !std::isfinite(ld)) throw DivergedError(it + 1, lv, ld);
      backward_sobolev(mlp, *x, *xdot, cache, ybar, ydotbar, grads);
    } else {
      forward(mlp, *x, cache, true);
      lv = value_loss(cache.y, target->values, &ybar);
      if (!std::isfinite(lv)) throw DivergedError(it + 1, lv, 0.0);
      backward_value(mlp, *x, cache, ybar, grads);
    }
    adam.step(mlp, grads);
    last_lv = lv;
    last_ld = ld;

    if ((it + 1) % opt.log_interval == 0) {
      LogRow row;
      row.iteration = it + 1;
      row.loss_value = lv;
      row.loss_deriv = ld;
      row.psnr = opt.eval ? opt.eval(mlp) : qnan;
      result.history.push_back(row);
    }
  }
  if (opt.iterations % opt.log_interval != 0) {
    LogRow row;
    row.iteration = opt.iterations;
    row.loss_value = last_lv;
    row.loss_deriv = last_ld;
    row.psnr = opt.eval ? opt.eval(mlp) : qnan;
    result.history.push_back(row);
  }
  return result;
}

namespace {

void append_double(std::string& out, double v) {
  if (std::isnan(v)) {
    out += "nan";
    return;
  }
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

}  // namespace

void write_history_csv(const std::vector<LogRow>& history, const std::string& path) {
  std::string out = "iteration,loss_val,loss_der,psnr_eval\n";
  for (const LogRow& row : history) {
    out += std::to_string(row.iteration);
    out += ',';
    append_double(out, row.loss_value);
    out += ',';
    append_double(out, row.loss_deriv);
    out += ',';
    append_double(out, row.psnr);
    out += '\n';
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("write_history_csv: cannot open " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("write_history_csv: write failed for " + path);
}

}  // namespace sinr
