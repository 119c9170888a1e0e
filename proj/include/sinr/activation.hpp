#pragma once

#include <cstddef>
#include <string_view>

namespace sinr {

enum class Act { relu, elu, selu, sigmoid, softplus, tanh, sine };

// Weight init families. Each activation has a default; a network may
// override the scheme independently of the activation.
enum class InitScheme { kaiming_normal, xavier_normal, lecun_normal, siren_uniform };

struct Activation {
  Act kind = Act::sine;
  double omega0 = 30.0;  // frequency scale, sine only
};

// Batch evaluation of sigma(z), sigma'(z), sigma''(z). s is required; ds and
// dds may be null when the caller does not need them. Subgradient convention
// at piecewise joints takes the x <= 0 branch, except relu'(0) = 0.
void act_eval(const Activation& act, const double* z, double* s, double* ds, double* dds,
              std::size_t n);

InitScheme default_init(Act kind);
const char* act_name(Act kind);
const char* init_name(InitScheme scheme);
bool act_from_name(std::string_view name, Act* out);

}  // namespace sinr
