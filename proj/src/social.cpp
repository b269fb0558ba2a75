#include "danes/social.hpp"
#include "danes/common.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace danes::social {

using nlohmann::json;

SocialMatrix SocialMatrix::rows(const std::vector<int64_t>& indices) const {
    SocialMatrix out;
    out.n = static_cast<int64_t>(indices.size());
    out.f = f;
    out.feature_names = feature_names;
    out.standardized = standardized;
    out.data.reserve(out.n * f);
    for (int64_t i : indices) {
        out.data.insert(out.data.end(), data.begin() + i * f, data.begin() + (i + 1) * f);
    }
    return out;
}

Scaler fit_scaler(const SocialMatrix& train) {
    if (train.n < 1) throw DataError("fit_scaler: empty matrix");
    Scaler scaler;
    scaler.feature_names = train.feature_names;
    scaler.mu.resize(train.f);
    scaler.sigma.resize(train.f);
    for (int64_t j = 0; j < train.f; ++j) {
        double sum = 0.0;
        for (int64_t i = 0; i < train.n; ++i) sum += train.at(i, j);
        const double mean = sum / static_cast<double>(train.n);
        double sq = 0.0;
        for (int64_t i = 0; i < train.n; ++i) {
            const double d = train.at(i, j) - mean;
            sq += d * d;
        }
        scaler.mu[j] = mean;
        scaler.sigma[j] = std::sqrt(sq / static_cast<double>(train.n));
    }
    return scaler;
}

SocialMatrix transform(const SocialMatrix& x, const Scaler& scaler) {
    if (x.feature_names != scaler.feature_names)
        throw DataError("transform: feature names do not match the fitted scaler");
    SocialMatrix out = x;
    out.standardized = true;
    for (int64_t j = 0; j < x.f; ++j) {
        const double mu = scaler.mu[j];
        const double sigma = scaler.sigma[j];
        for (int64_t i = 0; i < x.n; ++i) {
            out.at(i, j) = sigma == 0.0 ? 0.0 : (x.at(i, j) - mu) / sigma;
        }
    }
    return out;
}

void save_scaler(const Scaler& scaler, const std::string& path) {
    json doc;
    doc["feature_names"] = scaler.feature_names;
    doc["mu"] = scaler.mu;
    doc["sigma"] = scaler.sigma;
    std::ofstream out(path);
    if (!out) throw DataError("cannot write scaler file: " + path);
    out << doc.dump(2) << "\n";
}

Scaler load_scaler(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open scaler file: " + path);
    json doc = json::parse(in);
    Scaler scaler;
    scaler.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    scaler.mu = doc.at("mu").get<std::vector<double>>();
    scaler.sigma = doc.at("sigma").get<std::vector<double>>();
    if (scaler.mu.size() != scaler.feature_names.size() ||
        scaler.sigma.size() != scaler.feature_names.size())
        throw DataError("scaler file has inconsistent lengths: " + path);
    return scaler;
}

void save_social_matrix(const SocialMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write social matrix: " + path);
    for (size_t j = 0; j < m.feature_names.size(); ++j) {
        if (j) out << ',';
        out << m.feature_names[j];
    }
    out << '\n';
    char buf[64];
    for (int64_t i = 0; i < m.n; ++i) {
        for (int64_t j = 0; j < m.f; ++j) {
            if (j) out << ',';
            std::snprintf(buf, sizeof(buf), "%.17g", m.at(i, j));
            out << buf;
        }
        out << '\n';
    }
}

SocialMatrix load_social_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open social matrix: " + path);
    SocialMatrix m;
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty social matrix file: " + path);
    {
        std::istringstream header(line);
        std::string name;
        while (std::getline(header, name, ',')) m.feature_names.push_back(name);
    }
    m.f = static_cast<int64_t>(m.feature_names.size());
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        int64_t count = 0;
        while (std::getline(row, cell, ',')) {
            m.data.push_back(std::stod(cell));
            ++count;
        }
        if (count != m.f) throw DataError("ragged social matrix row in " + path);
        ++m.n;
    }
    return m;
}

} // namespace danes::social
