#pragma once

#include "cloudfill/kernels/kernels.hpp"

namespace cloudfill::kern::avx2 {

// True when this build carries the AVX2 variants and the CPU has AVX2+FMA.
bool supported();

#if defined(__x86_64__) || defined(_M_X64)
void matmul(const double* a, const double* b, double* c, std::size_t m,
            std::size_t k, std::size_t n, bool acc);
void matmul_atb(const double* a, const double* b, double* c, std::size_t m,
                std::size_t k, std::size_t n, bool acc);
void matmul_abt(const double* a, const double* b, double* c, std::size_t m,
                std::size_t k, std::size_t n, bool acc);
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* x, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scal(double alpha, double* x, std::size_t n);
void adam_step(double* p, const double* g, double* m, double* v, std::size_t n,
               double lr, double beta1, double beta2, double eps, double bc1,
               double bc2);
double masked_abs_err(const double* a, const double* b, const std::uint8_t* mask,
                      std::size_t n);
double masked_sq_err(const double* a, const double* b, const std::uint8_t* mask,
                     std::size_t n);

const Backend& backend();
#endif

}  // namespace cloudfill::kern::avx2
