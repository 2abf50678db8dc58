#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dsv/errors.hpp"

namespace dsv {

/// A finite ordered collection of fixed-dimension real vectors, stored
/// row-major. Order is preserved so downstream results are deterministic.
class EmbeddingSet {
public:
    EmbeddingSet() = default;

    explicit EmbeddingSet(std::size_t dim) : dim_(dim) {
        if (dim == 0) throw ValidationError("embedding dimension must be positive");
    }

    static EmbeddingSet from_rows(const std::vector<std::vector<double>>& rows) {
        if (rows.empty()) throw ValidationError("embedding set must not be empty");
        EmbeddingSet set(rows.front().size());
        for (const auto& r : rows) set.append(r);
        return set;
    }

    void append(std::span<const double> v) {
        if (dim_ == 0) dim_ = v.size();
        if (v.size() != dim_)
            throw ValidationError("vector has " + std::to_string(v.size()) +
                                  " components, expected " + std::to_string(dim_));
        for (double x : v)
            if (!std::isfinite(x)) throw ValidationError("non-finite component in embedding vector");
        data_.insert(data_.end(), v.begin(), v.end());
        ++rows_;
    }

    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * dim_, dim_};
    }

    std::size_t size() const { return rows_; }
    std::size_t dim() const { return dim_; }
    bool empty() const { return rows_ == 0; }
    const std::vector<double>& flat() const { return data_; }

    void reserve(std::size_t rows) { data_.reserve(rows * dim_); }

private:
    std::vector<double> data_;
    std::size_t dim_ = 0;
    std::size_t rows_ = 0;
};

/// Binary per-sample labels, 1 = anomaly.
using Labels = std::vector<std::uint8_t>;

/// Multiset concatenation: duplicates are kept, |a ∪ b| = |a| + |b|.
inline EmbeddingSet concat(const EmbeddingSet& a, const EmbeddingSet& b) {
    if (a.dim() != b.dim())
        throw ValidationError("cannot concatenate embedding sets of different dimension");
    EmbeddingSet out(a.dim());
    out.reserve(a.size() + b.size());
    for (std::size_t i = 0; i < a.size(); ++i) out.append(a.row(i));
    for (std::size_t i = 0; i < b.size(); ++i) out.append(b.row(i));
    return out;
}

/// Splits a labeled set into (normals, anomalies).
inline std::pair<EmbeddingSet, EmbeddingSet> split_by_labels(const EmbeddingSet& set,
                                                             const Labels& labels) {
    if (labels.size() != set.size())
        throw ValidationError("label count " + std::to_string(labels.size()) +
                              " does not match sample count " + std::to_string(set.size()));
    EmbeddingSet normals(set.dim()), anomalies(set.dim());
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (labels[i] > 1) throw ValidationError("labels must be 0 or 1");
        (labels[i] ? anomalies : normals).append(set.row(i));
    }
    return {std::move(normals), std::move(anomalies)};
}

} // namespace dsv
