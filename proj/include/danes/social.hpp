#pragma once

#include <string>
#include <vector>

namespace danes::social {

struct SocialMatrix {
    int64_t n = 0;
    int64_t f = 0;
    std::vector<double> data; // row-major n x f
    std::vector<std::string> feature_names;
    bool standardized = false;

    double at(int64_t i, int64_t j) const { return data[i * f + j]; }
    double& at(int64_t i, int64_t j) { return data[i * f + j]; }

    SocialMatrix rows(const std::vector<int64_t>& indices) const;
};

struct Scaler {
    std::vector<double> mu;    // per-feature training mean
    std::vector<double> sigma; // per-feature population standard deviation
    std::vector<std::string> feature_names;
};

// Population statistics (divide by n) per column.
Scaler fit_scaler(const SocialMatrix& train);

// (x - mu) / sigma per column; constant columns (sigma == 0) map to 0.
SocialMatrix transform(const SocialMatrix& x, const Scaler& scaler);

void save_scaler(const Scaler& scaler, const std::string& path);
Scaler load_scaler(const std::string& path);

void save_social_matrix(const SocialMatrix& m, const std::string& path);
SocialMatrix load_social_matrix(const std::string& path);

} // namespace danes::social
