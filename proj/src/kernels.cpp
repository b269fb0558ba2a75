#include "danes/kernels.hpp"

namespace danes::kernels {

void gemm_nn(const double* a, const double* b, double* c,
             int64_t rows, int64_t inner, int64_t cols, bool accumulate) {
#pragma omp parallel for collapse(2) schedule(static)
    for (int64_t i = 0; i < rows; ++i) {
        for (int64_t j = 0; j < cols; ++j) {
            double sum = 0.0;
            for (int64_t k = 0; k < inner; ++k) {
                sum += a[i * inner + k] * b[k * cols + j];
            }
            c[i * cols + j] = accumulate ? c[i * cols + j] + sum : sum;
        }
    }
}

void gemm_nt(const double* a, const double* b, double* c,
             int64_t rows, int64_t inner, int64_t cols, bool accumulate) {
#pragma omp parallel for collapse(2) schedule(static)
    for (int64_t i = 0; i < rows; ++i) {
        for (int64_t j = 0; j < cols; ++j) {
            double sum = 0.0;
            for (int64_t k = 0; k < inner; ++k) {
                sum += a[i * inner + k] * b[j * inner + k];
            }
            c[i * cols + j] = accumulate ? c[i * cols + j] + sum : sum;
        }
    }
}

void gemm_tn(const double* a, const double* b, double* c,
             int64_t rows, int64_t inner, int64_t cols, bool accumulate) {
#pragma omp parallel for collapse(2) schedule(static)
    for (int64_t i = 0; i < rows; ++i) {
        for (int64_t j = 0; j < cols; ++j) {
            double sum = 0.0;
            for (int64_t k = 0; k < inner; ++k) {
                sum += a[k * rows + i] * b[k * cols + j];
            }
            c[i * cols + j] = accumulate ? c[i * cols + j] + sum : sum;
        }
    }
}

void conv1d_forward(const double* x, const double* w, const double* bias, double* y,
                    int64_t batch, int64_t time, int64_t channels,
                    int64_t filters, int64_t kernel) {
    const int64_t out_time = time - kernel + 1;
#pragma omp parallel for collapse(2) schedule(static)
    for (int64_t n = 0; n < batch; ++n) {
        for (int64_t t = 0; t < out_time; ++t) {
            for (int64_t f = 0; f < filters; ++f) {
                double sum = bias[f];
                for (int64_t k = 0; k < kernel; ++k) {
                    const double* xr = x + ((n * time + t + k) * channels);
                    const double* wr = w + ((f * kernel + k) * channels);
                    for (int64_t ch = 0; ch < channels; ++ch) {
                        sum += xr[ch] * wr[ch];
                    }
                }
                y[(n * out_time + t) * filters + f] = sum;
            }
        }
    }
}

namespace serial {

void gemm_nn(const double* a, const double* b, double* c,
             int64_t rows, int64_t inner, int64_t cols, bool accumulate) {
    for (int64_t i = 0; i < rows; ++i) {
        for (int64_t j = 0; j < cols; ++j) {
            double sum = 0.0;
            for (int64_t k = 0; k < inner; ++k) {
                sum += a[i * inner + k] * b[k * cols + j];
            }
            c[i * cols + j] = accumulate ? c[i * cols + j] + sum : sum;
        }
    }
}

void gemm_nt(const double* a, const double* b, double* c,
             int64_t rows, int64_t inner, int64_t cols, bool accumulate) {
    for (int64_t i = 0; i < rows; ++i) {
        for (int64_t j = 0; j < cols; ++j) {
            double sum = 0.0;
            for (int64_t k = 0; k < inner; ++k) {
                sum += a[i * inner + k] * b[j * inner + k];
            }
            c[i * cols + j] = accumulate ? c[i * cols + j] + sum : sum;
        }
    }
}

void gemm_tn(const double* a, const double* b, double* c,
             int64_t rows, int64_t inner, int64_t cols, bool accumulate) {
    for (int64_t i = 0; i < rows; ++i) {
        for (int64_t j = 0; j < cols; ++j) {
            double sum = 0.0;
            for (int64_t k = 0; k < inner; ++k) {
                sum += a[k * rows + i] * b[k * cols + j];
            }
            c[i * cols + j] = accumulate ? c[i * cols + j] + sum : sum;
        }
    }
}

void conv1d_forward(const double* x, const double* w, const double* bias, double* y,
                    int64_t batch, int64_t time, int64_t channels,
                    int64_t filters, int64_t kernel) {
    const int64_t out_time = time - kernel + 1;
    for (int64_t n = 0; n < batch; ++n) {
        for (int64_t t = 0; t < out_time; ++t) {
            for (int64_t f = 0; f < filters; ++f) {
                double sum = bias[f];
                for (int64_t k = 0; k < kernel; ++k) {
                    const double* xr = x + ((n * time + t + k) * channels);
                    const double* wr = w + ((f * kernel + k) * channels);
                    for (int64_t ch = 0; ch < channels; ++ch) {
                        sum += xr[ch] * wr[ch];
                    }
                }
                y[(n * out_time + t) * filters + f] = sum;
            }
        }
    }
}

} // namespace serial

} // namespace danes::kernels
