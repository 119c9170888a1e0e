#include "sinr/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace sinr::kernels {

namespace {

Isa detect_isa() {
  // Env override first so tests can pin a path: SINR_KERNELS=scalar|avx2.
  if (const char* env = std::getenv("SINR_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return Isa::scalar;
#if defined(SINR_HAVE_AVX2_KERNELS)
    if (std::strcmp(env, "avx2") == 0) return Isa::avx2;
#endif
  }
#if defined(SINR_HAVE_AVX2_KERNELS)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Isa::avx2;
#endif
  return Isa::scalar;
}

}  // namespace

Isa active_isa() {
  static const Isa isa = detect_isa();
  return isa;
}

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void transpose(const double* src, double* dst, int rows, int cols) {
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      dst[static_cast<std::size_t>(c) * rows + r] = src[static_cast<std::size_t>(r) * cols + c];
}

void gemm_nn(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate) {
#if defined(SINR_HAVE_AVX2_KERNELS)
  if (active_isa() == Isa::avx2) {
    avx2::gemm_nn(a, b, c, m, k, n, accumulate);
    return;
  }
#endif
  scalar::gemm_nn(a, b, c, m, k, n, accumulate);
}

void gemm_tn(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate) {
#if defined(SINR_HAVE_AVX2_KERNELS)
  if (active_isa() == Isa::avx2) {
    avx2::gemm_tn(a, b, c, m, k, n, accumulate);
    return;
  }
#endif
  scalar::gemm_tn(a, b, c, m, k, n, accumulate);
}

void vmul(const double* a, const double* b, double* out, std::size_t n) {
#if defined(SINR_HAVE_AVX2_KERNELS)
  if (active_isa() == Isa::avx2) {
    avx2::vmul(a, b, out, n);
    return;
  }
#endif
  scalar::vmul(a, b, out, n);
}

void vmul_add(const double* a, const double* b, double* out, std::size_t n) {
#if defined(SINR_HAVE_AVX2_KERNELS)
  if (active_isa() == Isa::avx2) {
    avx2::vmul_add(a, b, out, n);
    return;
  }
#endif
  scalar::vmul_add(a, b, out, n);
}

void vmul3_add(const double* a, const double* b, const double* c, double* out, std::size_t n) {
#if defined(SINR_HAVE_AVX2_KERNELS)
  if (active_isa() == Isa::avx2) {
    avx2::vmul3_add(a, b, c, out, n);
    return;
  }
#endif
  scalar::vmul3_add(a, b, c, out, n);
}

void vaxpy(double alpha, const double* x, double* y, std::size_t n) {
#if defined(SINR_HAVE_AVX2_KERNELS)
  if (active_isa() == Isa::avx2) {
    avx2::vaxpy(alpha, x, y, n);
    return;
  }
#endif
  scalar::vaxpy(alpha, x, y, n);
}

void adam_update(double* p, double* m, double* v, const double* g, std::size_t n, double lr,
                 double beta1, double beta2, double eps, double bias1, double bias2) {
#if defined(SINR_HAVE_AVX2_KERNELS)
  if (active_isa() == Isa::avx2) {
    avx2::adam_update(p, m, v, g, n, lr, beta1, beta2, eps, bias1, bias2);
    return;
  }
#endif
  scalar::adam_update(p, m, v, g, n, lr, beta1, beta2, eps, bias1, bias2);
}

}  // namespace sinr::kernels
