#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "danes/common.hpp"
#include "danes/social.hpp"

#include <cmath>
#include <filesystem>

using namespace danes;
using namespace danes::social;

namespace {

SocialMatrix make_matrix(std::vector<std::vector<double>> rows,
                         std::vector<std::string> names) {
    SocialMatrix m;
    m.n = static_cast<int64_t>(rows.size());
    m.f = static_cast<int64_t>(names.size());
    m.feature_names = std::move(names);
    for (const auto& row : rows) m.data.insert(m.data.end(), row.begin(), row.end());
    return m;
}

} // namespace

TEST_CASE("fit_scaler computes population statistics per column") {
    const SocialMatrix m = make_matrix({{1, 5}, {3, 5}}, {"a", "b"});
    const Scaler s = fit_scaler(m);
    CHECK(s.mu[0] == doctest::Approx(2.0));
    CHECK(s.sigma[0] == doctest::Approx(1.0)); // population std of {1,3}
    CHECK(s.mu[1] == doctest::Approx(5.0));
    CHECK(s.sigma[1] == doctest::Approx(0.0)); // constant column
}

TEST_CASE("transform standardizes and zeroes constant columns") {
    const SocialMatrix m = make_matrix({{1, 7}, {3, 7}, {2, 7}}, {"a", "b"});
    const Scaler s = fit_scaler(m);
    const SocialMatrix t = transform(m, s);
    CHECK(t.at(1, 0) == doctest::Approx((3.0 - 2.0) / s.sigma[0]));
    for (int64_t i = 0; i < t.n; ++i) CHECK(t.at(i, 1) == 0.0); // sigma = 0 rule

    SocialMatrix wrong = m;
    wrong.feature_names = {"a", "c"};
    CHECK_THROWS_AS(transform(wrong, s), DataError);
}

TEST_CASE("x=3 with mu=2 sigma=1 maps to 1.0") {
    Scaler s;
    s.feature_names = {"a"};
    s.mu = {2.0};
    s.sigma = {1.0};
    const SocialMatrix m = make_matrix({{3.0}}, {"a"});
    CHECK(transform(m, s).at(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("transforming the fit input gives mean 0 and std 1") {
    Rng rng(17);
    SocialMatrix m;
    m.n = 40;
    m.f = 3;
    m.feature_names = {"a", "b", "c"};
    m.data.resize(m.n * m.f);
    for (double& x : m.data) x = std::floor(rng.uniform(0.0, 50.0));
    const Scaler s = fit_scaler(m);
    const SocialMatrix t = transform(m, s);

    for (int64_t j = 0; j < m.f; ++j) {
        double mean = 0.0;
        for (int64_t i = 0; i < t.n; ++i) mean += t.at(i, j);
        mean /= static_cast<double>(t.n);
        CHECK(std::abs(mean) < 1e-12);
        if (s.sigma[j] > 0) {
            double var = 0.0;
            for (int64_t i = 0; i < t.n; ++i) var += (t.at(i, j) - mean) * (t.at(i, j) - mean);
            var /= static_cast<double>(t.n);
            CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("standardization is invariant to per-column affine rescaling") {
    Rng rng(23);
    SocialMatrix m;
    m.n = 25;
    m.f = 2;
    m.feature_names = {"a", "b"};
    m.data.resize(m.n * m.f);
    for (double& x : m.data) x = rng.uniform(-5.0, 5.0);

    SocialMatrix scaled = m;
    const double a = 3.5, b = -7.0;
    for (double& x : scaled.data) x = a * x + b;

    const SocialMatrix t1 = transform(m, fit_scaler(m));
    const SocialMatrix t2 = transform(scaled, fit_scaler(scaled));
    for (int64_t i = 0; i < t1.n * t1.f; ++i) {
        CHECK(t1.data[i] == doctest::Approx(t2.data[i]).epsilon(1e-10));
    }
}

TEST_CASE("scaler round-trips through JSON") {
    Scaler s;
    s.feature_names = {"x", "y"};
    s.mu = {1.25, -3.5};
    s.sigma = {0.5, 2.0};
    const auto path = (std::filesystem::temp_directory_path() / "scaler_rt.json").string();
    save_scaler(s, path);
    const Scaler s2 = load_scaler(path);
    CHECK(s2.feature_names == s.feature_names);
    CHECK(s2.mu == s.mu);
    CHECK(s2.sigma == s.sigma);
}

TEST_CASE("social matrix round-trips through CSV") {
    const SocialMatrix m = make_matrix({{1.5, 2.25}, {3.0, -0.125}}, {"a", "b"});
    const auto path = (std::filesystem::temp_directory_path() / "social_rt.csv").string();
    save_social_matrix(m, path);
    const SocialMatrix m2 = load_social_matrix(path);
    CHECK(m2.feature_names == m.feature_names);
    CHECK(m2.data == m.data);
}
