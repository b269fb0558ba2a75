#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "danes/common.hpp"
#include "danes/kernels.hpp"

#include <cstring>
#include <vector>

using namespace danes;

namespace {

std::vector<double> random_vec(int64_t n, Rng& rng) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.uniform(-2.0, 2.0);
    return v;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

} // namespace

TEST_CASE("gemm_nn matches a hand-computed 2x2 product") {
    // [1 2; 3 4] * [5 6; 7 8] = [19 22; 43 50]
    const std::vector<double> a = {1, 2, 3, 4};
    const std::vector<double> b = {5, 6, 7, 8};
    std::vector<double> c(4);
    kernels::gemm_nn(a.data(), b.data(), c.data(), 2, 2, 2);
    CHECK(c == std::vector<double>{19, 22, 43, 50});
}

TEST_CASE("gemm_nt and gemm_tn agree with explicit transposition") {
    Rng rng(11);
    const int64_t rows = 5, inner = 7, cols = 4;
    const auto a = random_vec(rows * inner, rng);
    const auto b = random_vec(cols * inner, rng); // cols x inner, used as B^T

    std::vector<double> c_nt(rows * cols);
    kernels::gemm_nt(a.data(), b.data(), c_nt.data(), rows, inner, cols);

    // materialize B = (cols x inner)^T and multiply normally
    std::vector<double> b_t(inner * cols);
    for (int64_t i = 0; i < cols; ++i)
        for (int64_t k = 0; k < inner; ++k) b_t[k * cols + i] = b[i * inner + k];
    std::vector<double> c_ref(rows * cols);
    kernels::serial::gemm_nn(a.data(), b_t.data(), c_ref.data(), rows, inner, cols);
    for (int64_t i = 0; i < rows * cols; ++i) CHECK(c_nt[i] == doctest::Approx(c_ref[i]));

    // A^T * A via gemm_tn against the same materialization trick
    std::vector<double> c_tn(inner * inner);
    kernels::gemm_tn(a.data(), a.data(), c_tn.data(), inner, rows, inner);
    std::vector<double> a_t(inner * rows);
    for (int64_t i = 0; i < rows; ++i)
        for (int64_t k = 0; k < inner; ++k) a_t[k * rows + i] = a[i * inner + k];
    std::vector<double> c_tn_ref(inner * inner);
    kernels::serial::gemm_nn(a_t.data(), a.data(), c_tn_ref.data(), inner, rows, inner);
    for (int64_t i = 0; i < inner * inner; ++i) CHECK(c_tn[i] == doctest::Approx(c_tn_ref[i]));
}

TEST_CASE("OpenMP kernels are bit-identical to the serial reference") {
    Rng rng(42);
    for (const auto [rows, inner, cols] :
         {std::tuple<int64_t, int64_t, int64_t>{3, 5, 7}, {32, 128, 384}, {1, 1, 1}, {17, 13, 29}}) {
        const auto a = random_vec(rows * inner, rng);
        const auto b_nn = random_vec(inner * cols, rng);
        const auto b_nt = random_vec(cols * inner, rng);

        std::vector<double> serial(rows * cols), omp(rows * cols);
        kernels::serial::gemm_nn(a.data(), b_nn.data(), serial.data(), rows, inner, cols);
        kernels::gemm_nn(a.data(), b_nn.data(), omp.data(), rows, inner, cols);
        CHECK(bit_equal(serial, omp));

        kernels::serial::gemm_nt(a.data(), b_nt.data(), serial.data(), rows, inner, cols);
        kernels::gemm_nt(a.data(), b_nt.data(), omp.data(), rows, inner, cols);
        CHECK(bit_equal(serial, omp));

        std::vector<double> serial_tn(inner * inner), omp_tn(inner * inner);
        const auto b_tn = random_vec(rows * inner, rng);
        kernels::serial::gemm_tn(a.data(), b_tn.data(), serial_tn.data(), inner, rows, inner);
        kernels::gemm_tn(a.data(), b_tn.data(), omp_tn.data(), inner, rows, inner);
        CHECK(bit_equal(serial_tn, omp_tn));
    }
}

TEST_CASE("accumulate adds on top of existing values") {
    const std::vector<double> a = {1, 0, 0, 1}; // identity
    const std::vector<double> b = {2, 3, 4, 5};
    std::vector<double> c = {10, 10, 10, 10};
    kernels::gemm_nn(a.data(), b.data(), c.data(), 2, 2, 2, /*accumulate=*/true);
    CHECK(c == std::vector<double>{12, 13, 14, 15});
}

TEST_CASE("conv1d_forward matches hand cross-correlation and the serial path") {
    // x = [1 2 3] (1 channel), w = [1 0 -1], bias 0 -> single output -2
    const std::vector<double> x = {1, 2, 3};
    const std::vector<double> w = {1, 0, -1};
    const std::vector<double> bias = {0};
    std::vector<double> y(1);
    kernels::conv1d_forward(x.data(), w.data(), bias.data(), y.data(), 1, 3, 1, 1, 3);
    CHECK(y[0] == doctest::Approx(-2.0));

    Rng rng(3);
    const int64_t batch = 4, time_len = 19, channels = 6, filters = 5, kernel = 4;
    const auto xr = random_vec(batch * time_len * channels, rng);
    const auto wr = random_vec(filters * kernel * channels, rng);
    const auto br = random_vec(filters, rng);
    const int64_t out_n = batch * (time_len - kernel + 1) * filters;
    std::vector<double> serial(out_n), omp(out_n);
    kernels::serial::conv1d_forward(xr.data(), wr.data(), br.data(), serial.data(), batch,
                                    time_len, channels, filters, kernel);
    kernels::conv1d_forward(xr.data(), wr.data(), br.data(), omp.data(), batch, time_len,
                            channels, filters, kernel);
    CHECK(bit_equal(serial, omp));
}
