#pragma once

#include <cstddef>
#include <cstdint>

// Data-parallel inner loops behind the math layer. Every kernel has a scalar
// reference implementation and (on x86-64) an AVX2+FMA variant; the active one
// is picked once at startup from CPUID and can be forced with the environment
// variable SINR_KERNELS=scalar|avx2.
//
// Accumulation order contract: gemm kernels accumulate each output element
// over the shared dimension in ascending order, so results are deterministic
// for a given build and ISA. The AVX2 path fuses multiply-add (FMA) where the
// scalar path rounds twice; the two agree elementwise to ~1e-13 relative and
// the equivalence tests pin that.

namespace sinr::kernels {

enum class Isa { scalar, avx2 };

Isa active_isa();
const char* isa_name(Isa isa);

// --- matrix kernels (row-major, channels-free raw pointers) ---

// C[m x n] = (accumulate ? C : 0) + A[m x k] * B[k x n]
void gemm_nn(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate);

// C[m x n] = (accumulate ? C : 0) + A^T * B, with A stored [k x m] row-major.
void gemm_tn(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate);

// dst[cols x rows] = src[rows x cols]^T
void transpose(const double* src, double* dst, int rows, int cols);

// --- elementwise kernels ---

void vmul(const double* a, const double* b, double* out, std::size_t n);      // out = a.*b
void vmul_add(const double* a, const double* b, double* out, std::size_t n);  // out += a.*b
// out += a.*b.*c
void vmul3_add(const double* a, const double* b, const double* c, double* out, std::size_t n);
void vaxpy(double alpha, const double* x, double* y, std::size_t n);  // y += alpha*x

// One fused Adam update over a parameter block:
//   m = b1*m + (1-b1)*g;  v = b2*v + (1-b2)*g^2
//   p -= lr * (m/(1-b1^t)) / (sqrt(v/(1-b2^t)) + eps)
// Scalar and AVX2 paths use identical operation order and are bitwise equal.
void adam_update(double* p, double* m, double* v, const double* g, std::size_t n, double lr,
                 double beta1, double beta2, double eps, double bias1, double bias2);

// --- per-ISA entry points, exposed for the equivalence tests ---
namespace scalar {
void gemm_nn(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate);
void gemm_tn(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate);
void vmul(const double* a, const double* b, double* out, std::size_t n);
void vmul_add(const double* a, const double* b, double* out, std::size_t n);
void vmul3_add(const double* a, const double* b, const double* c, double* out, std::size_t n);
void vaxpy(double alpha, const double* x, double* y, std::size_t n);
void adam_update(double* p, double* m, double* v, const double* g, std::size_t n, double lr,
                 double beta1, double beta2, double eps, double bias1, double bias2);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define SINR_HAVE_AVX2_KERNELS 1
namespace avx2 {
void gemm_nn(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate);
void gemm_tn(const double* a, const double* b, double* c, int m, int k, int n, bool accumulate);
void vmul(const double* a, const double* b, double* out, std::size_t n);
void vmul_add(const double* a, const double* b, double* out, std::size_t n);
void vmul3_add(const double* a, const double* b, const double* c, double* out, std::size_t n);
void vaxpy(double alpha, const double* x, double* y, std::size_t n);
void adam_update(double* p, double* m, double* v, const double* g, std::size_t n, double lr,
                 double beta1, double beta2, double eps, double bias1, double bias2);
}  // namespace avx2
#endif

}  // namespace sinr::kernels
