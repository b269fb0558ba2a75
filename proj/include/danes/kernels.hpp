#pragma once

#include <cstdint>

// Dense kernels behind the layer implementations. Every kernel comes in two
// flavours: the OpenMP version used by the library and a serial reference in
// kernels::serial. Both compute each output cell as one fixed-order dot
// product, so the parallel version is bit-identical to the reference for any
// thread count; tests assert that and tools/bench_kernels compares their speed.

namespace danes::kernels {

// C(rows x cols) = A(rows x inner) * B(inner x cols), or += when accumulate.
void gemm_nn(const double* a, const double* b, double* c,
             int64_t rows, int64_t inner, int64_t cols, bool accumulate = false);

// C(rows x cols) = A(rows x inner) * B(cols x inner)^T
void gemm_nt(const double* a, const double* b, double* c,
             int64_t rows, int64_t inner, int64_t cols, bool accumulate = false);

// C(rows x cols) = A(inner x rows)^T * B(inner x cols)
void gemm_tn(const double* a, const double* b, double* c,
             int64_t rows, int64_t inner, int64_t cols, bool accumulate = false);

// Valid 1-D cross-correlation along time.
//   x: batch x time x channels, w: filters x kernel x channels, bias: filters
//   y: batch x (time-kernel+1) x filters
void conv1d_forward(const double* x, const double* w, const double* bias, double* y,
                    int64_t batch, int64_t time, int64_t channels,
                    int64_t filters, int64_t kernel);

namespace serial {

void gemm_nn(const double* a, const double* b, double* c,
             int64_t rows, int64_t inner, int64_t cols, bool accumulate = false);
void gemm_nt(const double* a, const double* b, double* c,
             int64_t rows, int64_t inner, int64_t cols, bool accumulate = false);
void gemm_tn(const double* a, const double* b, double* c,
             int64_t rows, int64_t inner, int64_t cols, bool accumulate = false);
void conv1d_forward(const double* x, const double* w, const double* bias, double* y,
                    int64_t batch, int64_t time, int64_t channels,
                    int64_t filters, int64_t kernel);

} // namespace serial

} // namespace danes::kernels
