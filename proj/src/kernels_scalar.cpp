#include <cmath>
#include <cstring>

#include "sinr/kernels.hpp"

// Reference kernels. Plain loops, no intrinsics; the AVX2 variants are checked
// against these elementwise.

namespace sinr::kernels::scalar {

void gemm_nn(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate) {
  for (int i = 0; i < m; ++i) {
    double* ci = c + static_cast<std::size_t>(i) * n;
    if (!accumulate) std::memset(ci, 0, sizeof(double) * n);
    const double* ai = a + static_cast<std::size_t>(i) * k;
    for (int t = 0; t < k; ++t) {
      const double av = ai[t];
      const double* bt = b + static_cast<std::size_t>(t) * n;
      for (int j = 0; j < n; ++j) ci[j] += av * bt[j];
    }
  }
}

void gemm_tn(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate) {
  if (!accumulate) std::memset(c, 0, sizeof(double) * m * n);
  for (int t = 0; t < k; ++t) {
    const double* at = a + static_cast<std::size_t>(t) * m;
    const double* bt = b + static_cast<std::size_t>(t) * n;
    for (int i = 0; i < m; ++i) {
      const double av = at[i];
      double* ci = c + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) ci[j] += av * bt[j];
    }
  }
}

void vmul(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void vmul_add(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] += a[i] * b[i];
}

void vmul3_add(const double* a, const double* b, const double* c, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] += a[i] * b[i] * c[i];
}

void vaxpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void adam_update(double* p, double* m, double* v, const double* g, std::size_t n, double lr,
                 double beta1, double beta2, double eps, double bias1, double bias2) {
  const double c1 = 1.0 - beta1;
  const double c2 = 1.0 - beta2;
  for (std::size_t i = 0; i < n; ++i) {
    const double gi = g[i];
    const double mi = beta1 * m[i] + c1 * gi;
    const double vi = beta2 * v[i] + c2 * (gi * gi);
    m[i] = mi;
    v[i] = vi;
    const double mhat = mi / bias1;
    const double vhat = vi / bias2;
    p[i] -= lr * (mhat / (std::sqrt(vhat) + eps));
  }
}

}  // namespace sinr::kernels::scalar
