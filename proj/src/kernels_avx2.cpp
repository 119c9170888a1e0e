#include "sinr/kernels.hpp"

#if defined(SINR_HAVE_AVX2_KERNELS)

#include <immintrin.h>

#include <cmath>
#include <cstring>
#include <vector>

// AVX2+FMA variants. Built with per-function target attributes so the rest of
// the binary stays baseline x86-64 and the dispatcher decides at runtime.
//
// gemm_nn keeps the ascending-t accumulation per output element: t is the
// sequential loop, lanes run across output columns. gemm_tn transposes A into
// scratch and reuses the same core, which preserves the order as well.

#define SINR_AVX2 __attribute__((target("avx2,fma")))

namespace sinr::kernels::avx2 {
namespace {

// 4-row by 8-column register-blocked core, C[mxn] += A[mxk]*B[kxn].
SINR_AVX2 void gemm_nn_core(const double* a, const double* b, double* c, int m, int k, int n) {
  const int n8 = n & ~7;
  int i = 0;
  for (; i + 4 <= m; i += 4) {
    const double* a0 = a + static_cast<std::size_t>(i) * k;
    const double* a1 = a0 + k;
    const double* a2 = a1 + k;
    const double* a3 = a2 + k;
    double* c0 = c + static_cast<std::size_t>(i) * n;
    double* c1 = c0 + n;
    double* c2 = c1 + n;
    double* c3 = c2 + n;
    int j = 0;
    for (; j < n8; j += 8) {
      __m256d acc00 = _mm256_loadu_pd(c0 + j);
      __m256d acc01 = _mm256_loadu_pd(c0 + j + 4);
      __m256d acc10 = _mm256_loadu_pd(c1 + j);
      __m256d acc11 = _mm256_loadu_pd(c1 + j + 4);
      __m256d acc20 = _mm256_loadu_pd(c2 + j);
      __m256d acc21 = _mm256_loadu_pd(c2 + j + 4);
      __m256d acc30 = _mm256_loadu_pd(c3 + j);
      __m256d acc31 = _mm256_loadu_pd(c3 + j + 4);
      const double* bt = b + j;
      for (int t = 0; t < k; ++t, bt += n) {
        const __m256d b0 = _mm256_loadu_pd(bt);
        const __m256d b1 = _mm256_loadu_pd(bt + 4);
        __m256d av = _mm256_broadcast_sd(a0 + t);
        acc00 = _mm256_fmadd_pd(av, b0, acc00);
        acc01 = _mm256_fmadd_pd(av, b1, acc01);
        av = _mm256_broadcast_sd(a1 + t);
        acc10 = _mm256_fmadd_pd(av, b0, acc10);
        acc11 = _mm256_fmadd_pd(av, b1, acc11);
        av = _mm256_broadcast_sd(a2 + t);
        acc20 = _mm256_fmadd_pd(av, b0, acc20);
        acc21 = _mm256_fmadd_pd(av, b1, acc21);
        av = _mm256_broadcast_sd(a3 + t);
        acc30 = _mm256_fmadd_pd(av, b0, acc30);
        acc31 = _mm256_fmadd_pd(av, b1, acc31);
      }
      _mm256_storeu_pd(c0 + j, acc00);
      _mm256_storeu_pd(c0 + j + 4, acc01);
      _mm256_storeu_pd(c1 + j, acc10);
      _mm256_storeu_pd(c1 + j + 4, acc11);
      _mm256_storeu_pd(c2 + j, acc20);
      _mm256_storeu_pd(c2 + j + 4, acc21);
      _mm256_storeu_pd(c3 + j, acc30);
      _mm256_storeu_pd(c3 + j + 4, acc31);
    }
    for (; j < n; ++j) {
      double s0 = c0[j], s1 = c1[j], s2 = c2[j], s3 = c3[j];
      const double* bt = b + j;
      for (int t = 0; t < k; ++t, bt += n) {
        const double bv = *bt;
        s0 = std::fma(a0[t], bv, s0);
        s1 = std::fma(a1[t], bv, s1);
        s2 = std::fma(a2[t], bv, s2);
        s3 = std::fma(a3[t], bv, s3);
      }
      c0[j] = s0;
      c1[j] = s1;
      c2[j] = s2;
      c3[j] = s3;
    }
  }
  for (; i < m; ++i) {
    const double* ai = a + static_cast<std::size_t>(i) * k;
    double* ci = c + static_cast<std::size_t>(i) * n;
    int j = 0;
    for (; j < n8; j += 8) {
      __m256d acc0 = _mm256_loadu_pd(ci + j);
      __m256d acc1 = _mm256_loadu_pd(ci + j + 4);
      const double* bt = b + j;
      for (int t = 0; t < k; ++t, bt += n) {
        const __m256d av = _mm256_broadcast_sd(ai + t);
        acc0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bt), acc0);
        acc1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bt + 4), acc1);
      }
      _mm256_storeu_pd(ci + j, acc0);
      _mm256_storeu_pd(ci + j + 4, acc1);
    }
    for (; j < n; ++j) {
      double s = ci[j];
      const double* bt = b + j;
      for (int t = 0; t < k; ++t, bt += n) s = std::fma(ai[t], *bt, s);
      ci[j] = s;
    }
  }
}

thread_local std::vector<double> g_transpose_scratch;

}  // namespace

SINR_AVX2 void gemm_nn(const double* a, const double* b, double* c, int m, int k, int n,
                       bool accumulate) {
  if (!accumulate) std::memset(c, 0, sizeof(double) * static_cast<std::size_t>(m) * n);
  gemm_nn_core(a, b, c, m, k, n);
}

SINR_AVX2 void gemm_tn(const double* a, const double* b, double* c, int m, int k, int n,
                       bool accumulate) {
  auto& at = g_transpose_scratch;
  at.resize(static_cast<std::size_t>(m) * k);
  kernels::transpose(a, at.data(), k, m);
  if (!accumulate) std::memset(c, 0, sizeof(double) * static_cast<std::size_t>(m) * n);
  gemm_nn_core(at.data(), b, c, m, k, n);
}

SINR_AVX2 void vmul(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

SINR_AVX2 void vmul_add(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d acc =
        _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), _mm256_loadu_pd(out + i));
    _mm256_storeu_pd(out + i, acc);
  }
  for (; i < n; ++i) out[i] = std::fma(a[i], b[i], out[i]);
}

SINR_AVX2 void vmul3_add(const double* a, const double* b, const double* c, double* out,
                         std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d ab = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(ab, _mm256_loadu_pd(c + i), _mm256_loadu_pd(out + i)));
  }
  for (; i < n; ++i) out[i] = std::fma(a[i] * b[i], c[i], out[i]);
}

SINR_AVX2 void vaxpy(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

SINR_AVX2 void adam_update(double* p, double* m, double* v, const double* g, std::size_t n,
                           double lr, double beta1, double beta2, double eps, double bias1,
                           double bias2) {
  // Mirrors the scalar path operation-for-operation (mul+add, no FMA) so the
  // two are bitwise identical.
  const __m256d b1 = _mm256_set1_pd(beta1);
  const __m256d b2 = _mm256_set1_pd(beta2);
  const __m256d c1 = _mm256_set1_pd(1.0 - beta1);
  const __m256d c2 = _mm256_set1_pd(1.0 - beta2);
  const __m256d vlr = _mm256_set1_pd(lr);
  const __m256d veps = _mm256_set1_pd(eps);
  const __m256d vb1 = _mm256_set1_pd(bias1);
  const __m256d vb2 = _mm256_set1_pd(bias2);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d gi = _mm256_loadu_pd(g + i);
    const __m256d mi =
        _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(c1, gi));
    const __m256d vi = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                                     _mm256_mul_pd(c2, _mm256_mul_pd(gi, gi)));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    const __m256d mhat = _mm256_div_pd(mi, vb1);
    const __m256d vhat = _mm256_div_pd(vi, vb2);
    const __m256d step =
        _mm256_mul_pd(vlr, _mm256_div_pd(mhat, _mm256_add_pd(_mm256_sqrt_pd(vhat), veps)));
    _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
  }
  for (; i < n; ++i) {
    const double gi = g[i];
    const double mi = beta1 * m[i] + (1.0 - beta1) * gi;
    const double vi = beta2 * v[i] + (1.0 - beta2) * (gi * gi);
    m[i] = mi;
    v[i] = vi;
    p[i] -= lr * ((mi / bias1) / (std::sqrt(vi / bias2) + eps));
  }
}

}  // namespace sinr::kernels::avx2

#endif  // SINR_HAVE_AVX2_KERNELS
