#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "dsv/embedding_set.hpp"

namespace dsv {

// Deterministic random source. std::mt19937_64 is fully specified by the
// standard; the transforms below are hand-rolled because the standard
// distributions are implementation-defined and would break byte-identical
// reproducibility across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform in [0, 1) with 53 random mantissa bits.
    double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; the spare value is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 == 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    /// Unbiased uniform index in [0, n) via rejection sampling.
    std::size_t index(std::size_t n) {
        const std::uint64_t bound = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r;
        do {
            r = gen_();
        } while (r >= bound);
        return static_cast<std::size_t>(r % n);
    }

    std::vector<double> normal_vector(std::size_t dim) {
        std::vector<double> v(dim);
        for (double& x : v) x = normal();
        return v;
    }

    /// n rows of isotropic Gaussian noise around a center, scaled by sigma.
    EmbeddingSet gaussian_set(std::size_t n, std::span<const double> center, double sigma) {
        EmbeddingSet set(center.size());
        set.reserve(n);
        std::vector<double> row(center.size());
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < center.size(); ++k) row[k] = center[k] + sigma * normal();
            set.append(row);
        }
        return set;
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace dsv
