#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dsv/embedding_set.hpp"
#include "dsv/errors.hpp"
#include "dsv/geometry.hpp"
#include "dsv/loss.hpp"
#include "dsv/rng.hpp"
#include "dsv/stats.hpp"

namespace dsv {

/// Candidates × test-samples anomaly scores, row per candidate. Row order
/// matches the candidate order of the run the matrix was built from.
class ScoreMatrix {
public:
    std::vector<std::string> candidate_ids; // optional, parallel to rows

    ScoreMatrix(std::size_t candidates, std::size_t samples)
        : rows_(candidates), cols_(samples), data_(candidates * samples, 0.0) {
        if (candidates == 0 || samples == 0)
            throw ValidationError("ScoreMatrix: empty dimensions");
    }

    static ScoreMatrix from_rows(const std::vector<std::vector<double>>& rows) {
        if (rows.empty() || rows.front().empty())
            throw ValidationError("ScoreMatrix: empty input");
        ScoreMatrix m(rows.size(), rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) m.set_row(i, rows[i]);
        return m;
    }

    void set_row(std::size_t i, std::span<const double> row) {
        if (row.size() != cols_) throw ValidationError("ScoreMatrix: ragged row");
        for (double v : row)
            if (!std::isfinite(v)) throw ValidationError("ScoreMatrix: non-finite score");
        std::copy(row.begin(), row.end(), data_.begin() + static_cast<std::ptrdiff_t>(i * cols_));
    }

    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
    std::size_t candidates() const { return rows_; }
    std::size_t samples() const { return cols_; }

private:
    std::size_t rows_, cols_;
    std::vector<double> data_;
};

/// Which candidate a selector chose and the per-candidate quantity the
/// extreme was taken over. Ties always break toward the lowest index.
struct SelectorResult {
    enum class Direction { minimize, maximize };
    std::string method;
    std::optional<std::size_t> chosen_index;
    std::vector<double> criterion;       // NaN marks an invalid candidate
    Direction direction = Direction::minimize;
};

/// Stable selector identifiers, in canonical report order.
inline const std::vector<std::string>& selector_names() {
    static const std::vector<std::string> names = {"avg",  "rand", "base", "mmd", "std",
                                                   "mc",   "sel",  "hits", "dsv"};
    return names;
}

/// Lowest-index extreme over the valid (finite) entries.
inline std::optional<std::size_t> argbest(std::span<const double> criterion,
                                          SelectorResult::Direction dir) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < criterion.size(); ++i) {
        if (!std::isfinite(criterion[i])) continue;
        if (!best) {
            best = i;
            continue;
        }
        const bool better = dir == SelectorResult::Direction::minimize
                                ? criterion[i] < criterion[*best]
                                : criterion[i] > criterion[*best];
        if (better) best = i;
    }
    return best;
}

/// Square root of the biased (V-statistic) squared-MMD estimate with a
/// Gaussian kernel. Bandwidth is the median pairwise distance over the
/// pooled points (self-pairs excluded).
inline double mmd(const EmbeddingSet& a, const EmbeddingSet& b) {
    if (a.empty() || b.empty()) throw ValidationError("mmd: empty embedding set");
    if (a.dim() != b.dim()) throw ValidationError("mmd: dimension mismatch");
    const EmbeddingSet pool = concat(a, b);
    std::vector<double> dists;
    dists.reserve(pool.size() * (pool.size() - 1) / 2);
    for (std::size_t i = 0; i < pool.size(); ++i)
        for (std::size_t j = i + 1; j < pool.size(); ++j)
            dists.push_back(vec_distance(pool.row(i), pool.row(j)));
    double h = 0.0;
    if (!dists.empty()) {
        std::sort(dists.begin(), dists.end());
        h = dists.size() % 2 == 1 ? dists[dists.size() / 2]
                                  : 0.5 * (dists[dists.size() / 2 - 1] + dists[dists.size() / 2]);
    }
    if (h == 0.0) throw NumericError("mmd: zero bandwidth (all points identical)");
    const double gamma = 1.0 / (2.0 * h * h);
    auto kernel_mean = [gamma](const EmbeddingSet& x, const EmbeddingSet& y) {
        double s = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i)
            for (std::size_t j = 0; j < y.size(); ++j) {
                const double d = vec_distance(x.row(i), y.row(j));
                s += std::exp(-gamma * d * d);
            }
        return s / (static_cast<double>(x.size()) * static_cast<double>(y.size()));
    };
    const double sq = kernel_mean(a, a) + kernel_mean(b, b) - 2.0 * kernel_mean(a, b);
    return std::sqrt(std::max(sq, 0.0));
}

/// Criterion behind the Base selector: the discordance surrogate.
inline double base_criterion(const EmbeddingSet& trn, const EmbeddingSet& aug,
                             const EmbeddingSet& test) {
    return l_dis_hat(trn, aug, test);
}

/// Criterion behind the MMD selector: Base with both set distances replaced.
inline double mmd_criterion(const EmbeddingSet& trn, const EmbeddingSet& aug,
                            const EmbeddingSet& test) {
    const double denom = mmd(trn, aug);
    if (denom == 0.0) throw NumericError("mmd_criterion: zero denominator");
    return mmd(concat(trn, aug), test) / denom;
}

/// Criterion behind the STD selector: spread of all train-test distances.
/// Selected by argmax (wider spread separates normals from anomalies).
inline double std_criterion(const EmbeddingSet& trn, const EmbeddingSet& test) {
    if (trn.empty() || test.empty()) throw ValidationError("std_criterion: empty set");
    std::vector<double> dists;
    dists.reserve(trn.size() * test.size());
    for (std::size_t i = 0; i < trn.size(); ++i)
        for (std::size_t j = 0; j < test.size(); ++j)
            dists.push_back(vec_distance(trn.row(i), test.row(j)));
    return population_std(dists);
}

/// Uniformly random candidate from a seeded deterministic generator.
inline SelectorResult select_random(std::size_t n_candidates, std::uint64_t seed) {
    if (n_candidates == 0) throw ValidationError("select_random: no candidates");
    Rng rng(seed);
    SelectorResult res;
    res.method = "rand";
    res.direction = SelectorResult::Direction::maximize;
    res.criterion.assign(n_candidates, 0.0);
    const std::size_t pick = rng.index(n_candidates);
    res.criterion[pick] = 1.0;
    res.chosen_index = pick;
    return res;
}

namespace detail {

// Rows standardized to zero mean, unit population std; a zero-variance row
// becomes all zeros so its correlation with anything is 0.
inline std::vector<std::vector<double>> zscore_rows(const ScoreMatrix& m) {
    std::vector<std::vector<double>> out(m.candidates());
    for (std::size_t i = 0; i < m.candidates(); ++i) {
        auto row = m.row(i);
        const double n = static_cast<double>(row.size());
        double mean = 0.0;
        for (double v : row) mean += v;
        mean /= n;
        double ss = 0.0;
        for (double v : row) ss += (v - mean) * (v - mean);
        const double sd = std::sqrt(ss / n);
        out[i].resize(row.size(), 0.0);
        if (sd > 0.0)
            for (std::size_t j = 0; j < row.size(); ++j) out[i][j] = (row[j] - mean) / sd;
    }
    return out;
}

// z-scored rows have unit norm structure: corr = dot / n; zero rows give 0.
inline double zrow_corr(std::span<const double> a, std::span<const double> b) {
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    return dot / static_cast<double>(a.size());
}

} // namespace detail

/// Model-centrality selector: the candidate whose scores correlate best, on
/// average, with every other candidate's scores.
inline SelectorResult select_mc(const ScoreMatrix& scores) {
    if (scores.candidates() < 2) throw ValidationError("select_mc: needs at least 2 candidates");
    const auto z = detail::zscore_rows(scores);
    SelectorResult res;
    res.method = "mc";
    res.direction = SelectorResult::Direction::maximize;
    res.criterion.resize(scores.candidates());
    for (std::size_t i = 0; i < z.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < z.size(); ++j)
            if (j != i) s += detail::zrow_corr(z[i], z[j]);
        res.criterion[i] = s / static_cast<double>(z.size() - 1);
    }
    res.chosen_index = argbest(res.criterion, res.direction);
    return res;
}

/// Pseudo-ground-truth selector: correlate each candidate with the average
/// of all normalized candidate scores (single pass, no pruning).
inline SelectorResult select_sel(const ScoreMatrix& scores) {
    if (scores.candidates() < 2) throw ValidationError("select_sel: needs at least 2 candidates");
    const auto z = detail::zscore_rows(scores);
    std::vector<double> pseudo(scores.samples(), 0.0);
    for (const auto& row : z)
        for (std::size_t j = 0; j < row.size(); ++j) pseudo[j] += row[j];
    for (double& v : pseudo) v /= static_cast<double>(z.size());
    SelectorResult res;
    res.method = "sel";
    res.direction = SelectorResult::Direction::maximize;
    res.criterion.resize(scores.candidates());
    for (std::size_t i = 0; i < z.size(); ++i) res.criterion[i] = pearson(z[i], pseudo);
    res.chosen_index = argbest(res.criterion, res.direction);
    return res;
}

struct HitsResult {
    SelectorResult selection;
    std::vector<double> hub_scores;
    std::vector<double> deltas; // max-abs change per iteration
    std::size_t iterations = 0;
};

/// Hub/authority importance on the bipartite model-sample graph. Edge
/// weights are the per-row min-max normalized scores; a constant row keeps
/// its raw value clamped to [0,1] so a uniformly strong model still
/// outweighs a silent one.
inline HitsResult select_hits(const ScoreMatrix& scores) {
    const std::size_t m = scores.candidates(), s = scores.samples();
    std::vector<double> w(m * s, 0.0);
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        auto row = scores.row(i);
        const auto [mn_it, mx_it] = std::minmax_element(row.begin(), row.end());
        const double mn = *mn_it, mx = *mx_it;
        for (std::size_t j = 0; j < s; ++j) {
            const double v = mx > mn ? (row[j] - mn) / (mx - mn) : std::clamp(row[j], 0.0, 1.0);
            w[i * s + j] = v;
            total += v;
        }
    }
    if (total == 0.0) throw NumericError("select_hits: all-zero weight matrix");

    std::vector<double> hub(m, 1.0 / std::sqrt(static_cast<double>(m)));
    std::vector<double> auth(s, 1.0 / std::sqrt(static_cast<double>(s)));
    auto l2_normalize = [](std::vector<double>& v) {
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (norm > 0.0)
            for (double& x : v) x /= norm;
    };

    HitsResult out;
    for (std::size_t iter = 0; iter < 100; ++iter) {
        const std::vector<double> prev_hub = hub;
        const std::vector<double> prev_auth = auth;
        for (std::size_t i = 0; i < m; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < s; ++j) acc += w[i * s + j] * auth[j];
            hub[i] = acc;
        }
        l2_normalize(hub);
        for (std::size_t j = 0; j < s; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < m; ++i) acc += w[i * s + j] * hub[i];
            auth[j] = acc;
        }
        l2_normalize(auth);
        double delta = 0.0;
        for (std::size_t i = 0; i < m; ++i) delta = std::max(delta, std::fabs(hub[i] - prev_hub[i]));
        for (std::size_t j = 0; j < s; ++j)
            delta = std::max(delta, std::fabs(auth[j] - prev_auth[j]));
        out.deltas.push_back(delta);
        out.iterations = iter + 1;
        if (delta < 1e-9) break;
    }

    out.hub_scores = hub;
    out.selection.method = "hits";
    out.selection.direction = SelectorResult::Direction::maximize;
    out.selection.criterion = hub;
    out.selection.chosen_index = argbest(out.selection.criterion, out.selection.direction);
    return out;
}

} // namespace dsv
