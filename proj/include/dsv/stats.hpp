#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "dsv/embedding_set.hpp"
#include "dsv/errors.hpp"

namespace dsv {

/// 1-based ranks with ties receiving the average of their positions.
inline std::vector<double> ranks_average(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0; // average of positions i..j
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

/// Rank-based AUC: tied score pairs contribute 1/2. Labels: 1 = anomaly
/// (positive class). Requires at least one sample of each class.
inline double auc(std::span<const double> scores, const Labels& labels) {
    if (scores.size() != labels.size()) throw ValidationError("auc: scores/labels length mismatch");
    std::size_t n_pos = 0;
    for (auto l : labels) {
        if (l > 1) throw ValidationError("auc: labels must be 0 or 1");
        n_pos += l;
    }
    const std::size_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) throw ValidationError("auc: needs both classes present");
    const std::vector<double> r = ranks_average(scores);
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i]) rank_sum += r[i];
    const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
    return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

/// Pearson correlation; 0 when either side has zero variance.
inline double pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.empty()) throw ValidationError("pearson: bad input lengths");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

/// Spearman rank correlation with average ranks for ties.
inline double spearman(std::span<const double> x, std::span<const double> y) {
    const std::vector<double> rx = ranks_average(x);
    const std::vector<double> ry = ranks_average(y);
    return pearson(rx, ry);
}

struct WilcoxonResult {
    double p_value = 1.0;
    double w_plus = 0.0;  // sum of ranks of positive differences
    std::size_t n = 0;    // pairs remaining after dropping zero differences
    bool exact = false;
};

namespace detail {

// Exact one-sided tail P(W+ >= observed) by dynamic programming over the
// distribution of the rank sum under random signs. Average ranks of ties are
// half-integers, so doubling every rank keeps the support integral.
inline double wilcoxon_exact_tail(const std::vector<double>& ranks, double w_plus) {
    std::vector<long> doubled(ranks.size());
    long total = 0;
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        doubled[i] = std::lround(2.0 * ranks[i]);
        total += doubled[i];
    }
    std::vector<double> count(static_cast<std::size_t>(total) + 1, 0.0);
    count[0] = 1.0;
    long reach = 0;
    for (long d : doubled) {
        reach += d;
        for (long s = reach; s >= d; --s) count[s] += count[s - d];
    }
    const long observed = std::lround(2.0 * w_plus);
    double tail = 0.0;
    for (long s = observed; s <= total; ++s) tail += count[s];
    return tail / std::pow(2.0, static_cast<double>(ranks.size()));
}

} // namespace detail

/// One-sided signed-rank test of "x stochastically exceeds y". Zero
/// differences are dropped; |differences| are ranked with tie averaging.
/// Exact enumeration for n <= 25, otherwise a normal approximation with
/// continuity correction and tie-corrected variance.
inline WilcoxonResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ValidationError("wilcoxon: paired inputs differ in length");
    std::vector<double> diffs;
    diffs.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] != y[i]) diffs.push_back(x[i] - y[i]);
    if (diffs.empty()) throw ValidationError("wilcoxon: all differences are zero");
    if (diffs.size() < 5)
        throw ValidationError("wilcoxon: needs at least 5 nonzero differences");

    std::vector<double> abs_diffs(diffs.size());
    for (std::size_t i = 0; i < diffs.size(); ++i) abs_diffs[i] = std::fabs(diffs[i]);
    const std::vector<double> ranks = ranks_average(abs_diffs);

    WilcoxonResult res;
    res.n = diffs.size();
    for (std::size_t i = 0; i < diffs.size(); ++i)
        if (diffs[i] > 0) res.w_plus += ranks[i];

    if (res.n <= 25) {
        res.exact = true;
        res.p_value = detail::wilcoxon_exact_tail(ranks, res.w_plus);
        return res;
    }

    const double n = static_cast<double>(res.n);
    const double mean = n * (n + 1.0) / 4.0;
    double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0;
    // tie correction: subtract sum(t^3 - t)/48 over tie groups
    std::vector<double> sorted(abs_diffs);
    std::sort(sorted.begin(), sorted.end());
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        var -= (t * t * t - t) / 48.0;
        i = j + 1;
    }
    const double z = (res.w_plus - mean - 0.5) / std::sqrt(var);
    res.p_value = 0.5 * std::erfc(z / std::sqrt(2.0));
    return res;
}

} // namespace dsv
