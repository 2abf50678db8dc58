#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "dsv/embedding_set.hpp"
#include "dsv/errors.hpp"

namespace dsv {

/// Euclidean distance between two vectors of equal dimension.
inline double vec_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw ValidationError("vec_distance: dimension mismatch " + std::to_string(a.size()) +
                              " vs " + std::to_string(b.size()));
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

/// Average of all pairwise distances between two sets. Self-pairs are kept
/// when both arguments are the same set, so d(A,A) is the within-set spread.
inline double set_distance(const EmbeddingSet& a, const EmbeddingSet& b) {
    if (a.empty() || b.empty()) throw ValidationError("set_distance: empty embedding set");
    if (a.dim() != b.dim()) throw ValidationError("set_distance: dimension mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            sum += vec_distance(a.row(i), b.row(j));
    return sum / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

/// Norm of c-a projected onto the direction b-a, with a as anchor.
/// Bounded above by ‖c-a‖; negative when c lies behind a.
inline double projected_norm(std::span<const double> a, std::span<const double> b,
                             std::span<const double> c) {
    if (a.size() != b.size() || a.size() != c.size())
        throw ValidationError("projected_norm: dimension mismatch");
    double dot = 0.0, norm_sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double dir = b[i] - a[i];
        dot += (c[i] - a[i]) * dir;
        norm_sq += dir * dir;
    }
    if (norm_sq == 0.0)
        throw NumericError("projected_norm: degenerate direction (a == b)");
    return dot / std::sqrt(norm_sq);
}

/// Component-wise arithmetic mean of a set.
inline std::vector<double> mean_vector(const EmbeddingSet& set) {
    if (set.empty()) throw ValidationError("mean_vector: empty embedding set");
    std::vector<double> mean(set.dim(), 0.0);
    for (std::size_t i = 0; i < set.size(); ++i) {
        auto r = set.row(i);
        for (std::size_t k = 0; k < set.dim(); ++k) mean[k] += r[k];
    }
    for (double& m : mean) m /= static_cast<double>(set.size());
    return mean;
}

/// Population standard deviation, √(n⁻¹ Σ (x-mean)²).
inline double population_std(std::span<const double> values) {
    if (values.empty()) throw ValidationError("population_std: empty input");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) {
        const double d = v - mean;
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(values.size()));
}

} // namespace dsv
