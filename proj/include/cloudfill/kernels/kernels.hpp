#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace cloudfill::kern {

// Hot inner loops used by the models and metrics. Every entry has a scalar
// reference implementation and, on x86-64, an AVX2+FMA variant; the table is
// selected once at runtime (CLOUDFILL_KERNEL_BACKEND=scalar|avx2|auto
// overrides CPU detection). SIMD and scalar variants are equivalence-tested
// against each other: elementwise kernels bit-exact, reductions and matmuls
// to 1e-12 relative (reassociation).
struct Backend {
  const char* name;

  // C[m x n] = A[m x k] * B[k x n]; accumulates into C when acc is set
  void (*matmul)(const double* a, const double* b, double* c, std::size_t m,
                 std::size_t k, std::size_t n, bool acc);
  // C[m x n] = A^T * B with A[k x m], B[k x n]
  void (*matmul_atb)(const double* a, const double* b, double* c, std::size_t m,
                     std::size_t k, std::size_t n, bool acc);
  // C[m x n] = A * B^T with A[m x k], B[n x k]
  void (*matmul_abt)(const double* a, const double* b, double* c, std::size_t m,
                     std::size_t k, std::size_t n, bool acc);

  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* x, std::size_t n);

  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  void (*scal)(double alpha, double* x, std::size_t n);

  // one fused Adam update; bc1/bc2 are the bias corrections 1-beta^t
  void (*adam_step)(double* p, const double* g, double* m, double* v,
                    std::size_t n, double lr, double beta1, double beta2,
                    double eps, double bc1, double bc2);

  // sum over mask==1 of |a-b| resp. (a-b)^2
  double (*masked_abs_err)(const double* a, const double* b,
                           const std::uint8_t* mask, std::size_t n);
  double (*masked_sq_err)(const double* a, const double* b,
                          const std::uint8_t* mask, std::size_t n);
};

const Backend& active();
void force(const std::string& name);  // "auto" | "scalar" | "avx2"
std::vector<std::string> available();

}  // namespace cloudfill::kern
