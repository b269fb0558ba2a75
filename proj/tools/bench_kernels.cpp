// Compares the OpenMP kernels against the serial reference: verifies the
// outputs are bit-identical and reports wall-clock timings per size.

#include "danes/common.hpp"
#include "danes/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <vector>

using namespace danes;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
    fn(); // warm up
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    const auto elapsed = std::chrono::steady_clock::now() - start;
    return std::chrono::duration<double, std::milli>(elapsed).count() / reps;
}

std::vector<double> random_vec(int64_t n, Rng& rng) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    return v;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP: not enabled\n");
#endif
    std::printf("%-22s %10s %12s %12s %8s\n", "kernel", "size", "serial ms", "omp ms", "equal");

    Rng rng(7);
    const int reps = 3;

    for (int64_t n : {64, 128, 256, 512}) {
        const auto a = random_vec(n * n, rng);
        const auto b = random_vec(n * n, rng);
        std::vector<double> c_serial(n * n), c_omp(n * n);

        const double t_serial = time_ms(
            [&] { kernels::serial::gemm_nn(a.data(), b.data(), c_serial.data(), n, n, n); }, reps);
        const double t_omp =
            time_ms([&] { kernels::gemm_nn(a.data(), b.data(), c_omp.data(), n, n, n); }, reps);
        std::printf("%-22s %7lldx%-3lld %12.3f %12.3f %8s\n", "gemm_nn",
                    static_cast<long long>(n), static_cast<long long>(n), t_serial, t_omp,
                    bit_equal(c_serial, c_omp) ? "yes" : "NO");

        const double t_serial_nt = time_ms(
            [&] { kernels::serial::gemm_nt(a.data(), b.data(), c_serial.data(), n, n, n); }, reps);
        const double t_omp_nt =
            time_ms([&] { kernels::gemm_nt(a.data(), b.data(), c_omp.data(), n, n, n); }, reps);
        std::printf("%-22s %7lldx%-3lld %12.3f %12.3f %8s\n", "gemm_nt",
                    static_cast<long long>(n), static_cast<long long>(n), t_serial_nt, t_omp_nt,
                    bit_equal(c_serial, c_omp) ? "yes" : "NO");

        const double t_serial_tn = time_ms(
            [&] { kernels::serial::gemm_tn(a.data(), b.data(), c_serial.data(), n, n, n); }, reps);
        const double t_omp_tn =
            time_ms([&] { kernels::gemm_tn(a.data(), b.data(), c_omp.data(), n, n, n); }, reps);
        std::printf("%-22s %7lldx%-3lld %12.3f %12.3f %8s\n", "gemm_tn",
                    static_cast<long long>(n), static_cast<long long>(n), t_serial_tn, t_omp_tn,
                    bit_equal(c_serial, c_omp) ? "yes" : "NO");
    }

    {
        const int64_t batch = 32, time_len = 76, channels = 128, filters = 64, kernel = 16;
        const auto x = random_vec(batch * time_len * channels, rng);
        const auto w = random_vec(filters * kernel * channels, rng);
        const auto bias = random_vec(filters, rng);
        const int64_t out_len = batch * (time_len - kernel + 1) * filters;
        std::vector<double> y_serial(out_len), y_omp(out_len);

        const double t_serial = time_ms(
            [&] {
                kernels::serial::conv1d_forward(x.data(), w.data(), bias.data(), y_serial.data(),
                                                batch, time_len, channels, filters, kernel);
            },
            reps);
        const double t_omp = time_ms(
            [&] {
                kernels::conv1d_forward(x.data(), w.data(), bias.data(), y_omp.data(), batch,
                                        time_len, channels, filters, kernel);
            },
            reps);
        std::printf("%-22s %10s %12.3f %12.3f %8s\n", "conv1d_forward", "32x76x128", t_serial,
                    t_omp, bit_equal(y_serial, y_omp) ? "yes" : "NO");
    }
    return 0;
}
