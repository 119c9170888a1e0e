#include "sinr/activation.hpp"

#include <cmath>

namespace sinr {

namespace {

constexpr double kEluAlpha = 1.0;
constexpr double kSeluLambda = 1.0507;
constexpr double kSeluAlpha = 1.6733;

inline double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

void act_eval(const Activation& act, const double* z, double* s, double* ds, double* dds,
              std::size_t n) {
  switch (act.kind) {
    case Act::relu:
      for (std::size_t i = 0; i < n; ++i) {
        const double x = z[i];
        const bool pos = x > 0.0;
        s[i] = pos ? x : 0.0;
        if (ds) ds[i] = pos ? 1.0 : 0.0;
        if (dds) dds[i] = 0.0;
      }
      break;
    case Act::elu:
      for (std::size_t i = 0; i < n; ++i) {
        const double x = z[i];
        if (x > 0.0) {
          s[i] = x;
          if (ds) ds[i] = 1.0;
          if (dds) dds[i] = 0.0;
        } else {
          const double ae = kEluAlpha * std::exp(x);
          s[i] = ae - kEluAlpha;
          if (ds) ds[i] = ae;
          if (dds) dds[i] = ae;
        }
      }
      break;
    case Act::selu:
      for (std::size_t i = 0; i < n; ++i) {
        const double x = z[i];
        if (x > 0.0) {
          s[i] = kSeluLambda * x;
          if (ds) ds[i] = kSeluLambda;
          if (dds) dds[i] = 0.0;
        } else {
          const double lae = kSeluLambda * kSeluAlpha * std::exp(x);
          s[i] = lae - kSeluLambda * kSeluAlpha;
          if (ds) ds[i] = lae;
          if (dds) dds[i] = lae;
        }
      }
      break;
    case Act::sigmoid:
      for (std::size_t i = 0; i < n; ++i) {
        const double v = stable_sigmoid(z[i]);
        s[i] = v;
        const double d = v * (1.0 - v);
        if (ds) ds[i] = d;
        if (dds) dds[i] = d * (1.0 - 2.0 * v);
      }
      break;
    case Act::softplus:
      for (std::size_t i = 0; i < n; ++i) {
        const double x = z[i];
        s[i] = (x > 0.0 ? x : 0.0) + std::log1p(std::exp(-std::fabs(x)));
        const double v = stable_sigmoid(x);
        if (ds) ds[i] = v;
        if (dds) dds[i] = v * (1.0 - v);
      }
      break;
    case Act::tanh:
      for (std::size_t i = 0; i < n; ++i) {
        const double t = std::tanh(z[i]);
        s[i] = t;
        const double d = 1.0 - t * t;
        if (ds) ds[i] = d;
        if (dds) dds[i] = -2.0 * t * d;
      }
      break;
    case Act::sine:
      for (std::size_t i = 0; i < n; ++i) {
        const double w = act.omega0 * z[i];
        const double sw = std::sin(w);
        s[i] = sw;
        if (ds) ds[i] = act.omega0 * std::cos(w);
        if (dds) dds[i] = -act.omega0 * act.omega0 * sw;
      }
      break;
  }
}

InitScheme default_init(Act kind) {
  switch (kind) {
    case Act::relu:
    case Act::softplus:
      return InitScheme::kaiming_normal;
    case Act::sigmoid:
    case Act::tanh:
      return InitScheme::xavier_normal;
    case Act::elu:
    case Act::selu:
      return InitScheme::lecun_normal;
    case Act::sine:
      return InitScheme::siren_uniform;
  }
  return InitScheme::kaiming_normal;
}

const char* act_name(Act kind) {
  switch (kind) {
    case Act::relu: return "relu";
    case Act::elu: return "elu";
    case Act::selu: return "selu";
    case Act::sigmoid: return "sigmoid";
    case Act::softplus: return "softplus";
    case Act::tanh: return "tanh";
    case Act::sine: return "sine";
  }
  return "?";
}

const char* init_name(InitScheme scheme) {
  switch (scheme) {
    case InitScheme::kaiming_normal: return "kaiming_normal";
    case InitScheme::xavier_normal: return "xavier_normal";
    case InitScheme::lecun_normal: return "lecun_normal";
    case InitScheme::siren_uniform: return "siren_uniform";
  }
  return "?";
}

bool act_from_name(std::string_view name, Act* out) {
  for (Act a : {Act::relu, Act::elu, Act::selu, Act::sigmoid, Act::softplus, Act::tanh,
                Act::sine}) {
    if (name == act_name(a)) {
      *out = a;
      return true;
    }
  }
  return false;
}

}  // namespace sinr
