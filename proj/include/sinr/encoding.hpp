#pragma once

#include <vector>

#include "sinr/grid.hpp"

namespace sinr {

// Sinusoidal positional encoding with frequencies 2^k * pi, k = 0..levels-1.
// Output layout: [raw inputs if include_input | sin block | cos block], where
// each block runs over input dims outer and frequencies inner.
struct PositionalEncoding {
  int levels = 0;
  bool include_input = true;
  int input_dim = 2;

  int output_dim() const {
    return (include_input ? input_dim : 0) + 2 * levels * input_dim;
  }

  // out must hold output_dim() values.
  void encode(const double* x, double* out) const;

  // Row-major [output_dim() x input_dim] Jacobian d enc / d x.
  void jacobian(const double* x, double* jac) const;

  // out = jacobian(x) * v; one column of the Jacobian when v is a basis
  // vector. Cheaper than forming the full Jacobian.
  void jvp(const double* x, const double* v, double* out) const;

  // coords is [N x input_dim], channels 1; returns [N x output_dim()].
  Grid2D encode_batch(const Grid2D& coords) const;

  // Per input dim d, the [N x output_dim()] matrix whose row i is
  // jacobian(coords row i) times basis vector e_d. Seeds tangent inputs.
  std::vector<Grid2D> tangent_batch(const Grid2D& coords) const;
};

}  // namespace sinr
