#include "sinr/encoding.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

namespace sinr {

namespace {
constexpr double kPi = 3.14159265358979323846;

inline double freq(int k) { return std::ldexp(kPi, k); }  // 2^k * pi, exact scaling
}  // namespace

void PositionalEncoding::encode(const double* x, double* out) const {
  int o = 0;
  if (include_input)
    for (int d = 0; d < input_dim; ++d) out[o++] = x[d];
  for (int d = 0; d < input_dim; ++d)
    for (int k = 0; k < levels; ++k) out[o++] = std::sin(freq(k) * x[d]);
  for (int d = 0; d < input_dim; ++d)
    for (int k = 0; k < levels; ++k) out[o++] = std::cos(freq(k) * x[d]);
}

void PositionalEncoding::jacobian(const double* x, double* jac) const {
  const int dim = output_dim();
  std::memset(jac, 0, sizeof(double) * static_cast<std::size_t>(dim) * input_dim);
  int o = 0;
  if (include_input)
    for (int d = 0; d < input_dim; ++d, ++o) jac[o * input_dim + d] = 1.0;
  for (int d = 0; d < input_dim; ++d)
    for (int k = 0; k < levels; ++k, ++o) {
      const double f = freq(k);
      jac[o * input_dim + d] = f * std::cos(f * x[d]);
    }
  for (int d = 0; d < input_dim; ++d)
    for (int k = 0; k < levels; ++k, ++o) {
      const double f = freq(k);
      jac[o * input_dim + d] = -f * std::sin(f * x[d]);
    }
}

void PositionalEncoding::jvp(const double* x, const double* v, double* out) const {
  int o = 0;
  if (include_input)
    for (int d = 0; d < input_dim; ++d) out[o++] = v[d];
  for (int d = 0; d < input_dim; ++d)
    for (int k = 0; k < levels; ++k) {
      const double f = freq(k);
      out[o++] = f * std::cos(f * x[d]) * v[d];
    }
  for (int d = 0; d < input_dim; ++d)
    for (int k = 0; k < levels; ++k) {
      const double f = freq(k);
      out[o++] = -f * std::sin(f * x[d]) * v[d];
    }
}

Grid2D PositionalEncoding::encode_batch(const Grid2D& coords) const {
  if (coords.channels() != 1 || coords.cols() != input_dim)
    throw std::invalid_argument("encode_batch: coords must be [N x " + std::to_string(input_dim) +
                                "], got " + std::to_string(coords.rows()) + "x" +
                                std::to_string(coords.cols()) + "x" +
                                std::to_string(coords.channels()));
  Grid2D out(coords.rows(), output_dim());
  for (int i = 0; i < coords.rows(); ++i) encode(coords.row(i), out.row(i));
  return out;
}

std::vector<Grid2D> PositionalEncoding::tangent_batch(const Grid2D& coords) const {
  std::vector<Grid2D> tangents;
  tangents.reserve(input_dim);
  std::vector<double> basis(input_dim, 0.0);
  for (int d = 0; d < input_dim; ++d) {
    basis.assign(input_dim, 0.0);
    basis[d] = 1.0;
    Grid2D t(coords.rows(), output_dim());
    for (int i = 0; i < coords.rows(); ++i) jvp(coords.row(i), basis.data(), t.row(i));
    tangents.push_back(std::move(t));
  }
  return tangents;
}

}  // namespace sinr
