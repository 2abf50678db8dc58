#pragma once

#include <random>
#include <vector>

#include "dsv/embedding_set.hpp"
#include "oracle.hpp"

namespace testutil {

// Test-local randomness, separate from the library's Rng on purpose.
inline std::mt19937_64& rng() {
    static std::mt19937_64 gen(20240613);
    return gen;
}

inline double uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng()() >> 11) * 0x1.0p-53);
}

inline oracle::Vec random_vec(std::size_t dim, double scale = 1.0) {
    oracle::Vec v(dim);
    for (double& x : v) x = uniform(-scale, scale);
    return v;
}

inline oracle::Mat random_mat(std::size_t rows, std::size_t dim, double scale = 1.0) {
    oracle::Mat m(rows);
    for (auto& r : m) r = random_vec(dim, scale);
    return m;
}

inline dsv::EmbeddingSet to_set(const oracle::Mat& m) { return dsv::EmbeddingSet::from_rows(m); }

inline oracle::Mat translate(oracle::Mat m, const oracle::Vec& offset) {
    for (auto& row : m)
        for (std::size_t i = 0; i < row.size(); ++i) row[i] += offset[i];
    return m;
}

inline oracle::Mat scale(oracle::Mat m, double factor) {
    for (auto& row : m)
        for (double& x : row) x *= factor;
    return m;
}

} // namespace testutil
