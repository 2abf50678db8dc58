#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dsv/embedding_set.hpp"
#include "dsv/errors.hpp"
#include "dsv/geometry.hpp"
#include "dsv/loss.hpp"
#include "dsv/rng.hpp"

namespace dsv {

/// Measured within-train spread and train-to-test-normal excess distance.
/// Both are measured from data; the "satisfied" flag is reported, never
/// enforced, since real data may violate it.
struct AssumptionStats {
    double sigma = 0.0;   // d(trn, trn)
    double epsilon = 0.0; // d(trn, test normals) - sigma
    bool satisfied = false;
};

inline AssumptionStats assumption_stats(const EmbeddingSet& trn, const EmbeddingSet& test_n) {
    if (trn.empty() || test_n.empty())
        throw ValidationError("assumption_stats: empty embedding set");
    AssumptionStats s;
    s.sigma = set_distance(trn, trn);
    s.epsilon = set_distance(trn, test_n) - s.sigma;
    s.satisfied = s.epsilon < s.sigma;
    return s;
}

/// Certified sandwich for the discordance surrogate when |trn| = |aug|:
///   c2*h_d + c2 + c3  <=  value  <=  lower + (c1+c3)(sigma+eps)/d(trn,aug)
struct DisBoundsReport {
    double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;
    double h_d = 0.0;
    double sigma = 0.0, epsilon = 0.0;
    double trn_aug_dist = 0.0;
    double lower = 0.0, upper = 0.0;
    double value = 0.0; // the surrogate itself
    bool holds = false;
};

inline constexpr double kTheorySlack = 1e-9;

inline DisBoundsReport dis_bounds(const EmbeddingSet& trn, const EmbeddingSet& aug,
                                    const EmbeddingSet& test, const Labels& labels) {
    if (trn.size() != aug.size())
        throw ValidationError("dis_bounds: |trn| must equal |aug| (bound hypothesis)");
    auto [test_n, test_a] = split_by_labels(test, labels);
    if (test_n.empty() || test_a.empty())
        throw ValidationError("dis_bounds: test set needs both classes");

    DisBoundsReport r;
    const double nt = static_cast<double>(trn.size());
    const double na = static_cast<double>(aug.size());
    const double nn = static_cast<double>(test_n.size());
    const double nA = static_cast<double>(test_a.size());
    const double total = (nt + na) * (nn + nA);
    r.c1 = nt * nn / total;
    r.c2 = nt * nA / total;
    r.c3 = na * nn / total;
    r.c4 = na * nA / total;

    const AssumptionStats stats = assumption_stats(trn, test_n);
    r.sigma = stats.sigma;
    r.epsilon = stats.epsilon;
    r.trn_aug_dist = set_distance(trn, aug);
    if (r.trn_aug_dist == 0.0) throw NumericError("dis_bounds: d(trn, aug) is zero");

    r.h_d = discordance(trn, aug, test_a);
    r.value = l_dis_hat(trn, aug, test);
    r.lower = r.c2 * r.h_d + r.c2 + r.c3;
    r.upper = r.lower + (r.c1 + r.c3) * (r.sigma + r.epsilon) / r.trn_aug_dist;
    r.holds = r.lower - kTheorySlack <= r.value && r.value <= r.upper + kTheorySlack;
    return r;
}

/// Exact rewriting of the separability surrogate under the singleton
/// hypotheses: lhs is the surrogate, rhs the closed form in gamma, h_s and
/// the anomaly projection spread.
struct SepIdentityReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double gamma = 0.0;
    double h_s = 0.0;       // separability of the anomalies, 0 when gamma = 0
    double sigma_bar = 0.0; // spread of anomaly projections, 0 when gamma = 0
    bool holds = false;
};

inline SepIdentityReport sep_identity(std::span<const double> z_trn,
                                      std::span<const double> z_aug, const EmbeddingSet& test,
                                      const Labels& labels) {
    if (vec_distance(z_trn, z_aug) == 0.0)
        throw ValidationError("sep_identity: hypothesis violated: z_aug equals z_trn");
    auto [test_n, test_a] = split_by_labels(test, labels);
    for (std::size_t i = 0; i < test_n.size(); ++i)
        if (vec_distance(test_n.row(i), z_trn) != 0.0)
            throw ValidationError("sep_identity: hypothesis violated: test normal " +
                                  std::to_string(i) + " differs from z_trn");

    EmbeddingSet trn(z_trn.size()), aug(z_aug.size());
    trn.append(z_trn);
    aug.append(z_aug);

    SepIdentityReport r;
    r.gamma = static_cast<double>(test_a.size()) / static_cast<double>(test.size());
    r.lhs = l_sep_hat(trn, aug, test);
    if (!test_a.empty()) {
        std::vector<double> projections(test_a.size());
        for (std::size_t i = 0; i < test_a.size(); ++i)
            projections[i] = projected_norm(z_trn, z_aug, test_a.row(i));
        r.sigma_bar = population_std(projections);
        r.h_s = separability(trn, aug, test_a);
    }
    r.rhs = std::sqrt(r.gamma * (1.0 - r.gamma)) * r.h_s +
            std::sqrt(r.gamma) * r.sigma_bar / vec_distance(z_trn, z_aug);
    r.holds = std::fabs(r.lhs - r.rhs) < kTheorySlack;
    return r;
}

// ---------------------------------------------------------------------------
// Randomized certification sweeps. Any counterexample is logged verbatim.
// ---------------------------------------------------------------------------

struct SweepReport {
    std::string family;
    std::size_t instances = 0;
    std::size_t failures = 0;
    double max_violation = 0.0;
    double tolerance = kTheorySlack;
    std::string hypothesis;
    std::vector<std::string> counterexamples;
    bool pass() const { return failures == 0; }
};

namespace detail {

inline std::vector<double> random_unit(Rng& rng, std::size_t dim) {
    std::vector<double> u(dim);
    double norm = 0.0;
    while (norm == 0.0) {
        for (double& x : u) x = rng.normal();
        norm = 0.0;
        for (double x : u) norm += x * x;
        norm = std::sqrt(norm);
    }
    for (double& x : u) x /= norm;
    return u;
}

// Component of g orthogonal to the unit vector u.
inline std::vector<double> orthogonalize(std::span<const double> g, std::span<const double> u) {
    double dot = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * u[i];
    std::vector<double> w(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) w[i] = g[i] - dot * u[i];
    return w;
}

} // namespace detail

/// Random instances with |trn| = |aug| (sizes 1..32, dims 2..16), normals
/// near the train distribution, anomalies anywhere around the segment.
inline SweepReport dis_bounds_sweep(std::size_t instances, std::uint64_t seed) {
    SweepReport rep;
    rep.family = "dis_bounds";
    rep.instances = instances;
    rep.hypothesis = "|trn|=|aug| in 1..32, |test_n|,|test_a| in 1..32, dim in 2..16";
    Rng rng(seed);
    for (std::size_t it = 0; it < instances; ++it) {
        const std::size_t dim = 2 + rng.index(15);
        const std::size_t n_ta = 1 + rng.index(32);
        const std::size_t n_n = 1 + rng.index(32);
        const std::size_t n_a = 1 + rng.index(32);
        const std::vector<double> u = detail::random_unit(rng, dim);
        std::vector<double> origin(dim, 0.0);

        std::vector<double> c_n(dim), c_aug(dim), c_anom(dim);
        const double shift = rng.uniform01();
        const double delta = 0.5 + 7.5 * rng.uniform01();
        const double along = 1.5 * rng.uniform01() * delta;
        const std::vector<double> g = rng.normal_vector(dim);
        const std::vector<double> w = detail::orthogonalize(g, u);
        for (std::size_t k = 0; k < dim; ++k) {
            c_n[k] = shift * u[k];
            c_aug[k] = delta * u[k];
            c_anom[k] = along * u[k] + 2.0 * rng.uniform01() * w[k];
        }
        EmbeddingSet trn = rng.gaussian_set(n_ta, origin, 1.0);
        EmbeddingSet aug = rng.gaussian_set(n_ta, c_aug, 1.0);
        EmbeddingSet test_n = rng.gaussian_set(n_n, c_n, 1.0);
        EmbeddingSet test_a = rng.gaussian_set(n_a, c_anom, 1.0);
        EmbeddingSet test = concat(test_n, test_a);
        Labels labels(test.size(), 0);
        for (std::size_t i = test_n.size(); i < test.size(); ++i) labels[i] = 1;

        const DisBoundsReport r = dis_bounds(trn, aug, test, labels);
        const double violation = std::max(r.lower - r.value, r.value - r.upper);
        rep.max_violation = std::max(rep.max_violation, violation);
        if (!r.holds) {
            ++rep.failures;
            if (rep.counterexamples.size() < 16)
                rep.counterexamples.push_back(
                    "instance " + std::to_string(it) + ": lower=" + std::to_string(r.lower) +
                    " value=" + std::to_string(r.value) + " upper=" + std::to_string(r.upper));
        }
    }
    return rep;
}

/// Hypothesis-conforming singleton instances. The closed form's final split
/// is exact when the anomaly projections have zero spread or zero mean, so
/// instances are drawn from those families (plus all-normal ones).
inline SweepReport sep_identity_sweep(std::size_t instances, std::uint64_t seed) {
    SweepReport rep;
    rep.family = "sep_identity";
    rep.instances = instances;
    rep.hypothesis =
        "singleton trn/aug, test normals at z_trn, anomaly projections with zero spread or zero mean";
    Rng rng(seed);
    for (std::size_t it = 0; it < instances; ++it) {
        const std::size_t dim = 2 + rng.index(15);
        std::vector<double> z_trn = rng.normal_vector(dim);
        for (double& x : z_trn) x *= 2.0;
        std::vector<double> z_aug(dim);
        const std::vector<double> u = detail::random_unit(rng, dim);
        const double dist = 0.5 + 4.0 * rng.uniform01();
        for (std::size_t k = 0; k < dim; ++k) z_aug[k] = z_trn[k] + dist * u[k];

        const std::size_t kind = rng.index(10);
        std::size_t n_n = 1 + rng.index(20);
        EmbeddingSet test(dim);
        Labels labels;
        for (std::size_t i = 0; i < n_n; ++i) {
            test.append(z_trn);
            labels.push_back(0);
        }
        auto push_anomaly = [&](double along) {
            const std::vector<double> g = rng.normal_vector(dim);
            const std::vector<double> w = detail::orthogonalize(g, u);
            std::vector<double> z(dim);
            for (std::size_t k = 0; k < dim; ++k) z[k] = z_trn[k] + along * u[k] + w[k];
            test.append(z);
            labels.push_back(1);
        };
        if (kind < 6) {
            // shared positive projection, spread only orthogonally
            const double p = 3.0 * rng.uniform01() * dist;
            const std::size_t n_a = 1 + rng.index(20);
            for (std::size_t i = 0; i < n_a; ++i) push_anomaly(p);
        } else if (kind < 9) {
            // mirrored projections with zero mean
            const double p = (0.2 + 2.8 * rng.uniform01()) * dist;
            const std::size_t pairs = 1 + rng.index(10);
            for (std::size_t i = 0; i < pairs; ++i) {
                push_anomaly(p);
                push_anomaly(-p);
            }
        }
        // kind == 9: all test points normal (gamma = 0)

        const SepIdentityReport r = sep_identity(z_trn, z_aug, test, labels);
        rep.max_violation = std::max(rep.max_violation, std::fabs(r.lhs - r.rhs));
        if (!r.holds) {
            ++rep.failures;
            if (rep.counterexamples.size() < 16)
                rep.counterexamples.push_back("instance " + std::to_string(it) +
                                              ": lhs=" + std::to_string(r.lhs) +
                                              " rhs=" + std::to_string(r.rhs));
        }
    }
    return rep;
}

/// One point of the far-field sweep: as d(trn,aug) grows with sigma and
/// epsilon fixed, the surrogate approaches its linear lower bound.
struct FarFieldPoint {
    double scale = 0.0; // multiple of the base distance
    double trn_aug_dist = 0.0;
    double value = 0.0;
    double linear = 0.0; // c2*h_d + c2 + c3
    double rel_gap = 0.0;
};

struct FarFieldReport {
    std::vector<FarFieldPoint> points;
    bool monotone = false;
    double final_gap = 1.0;
    bool pass() const { return monotone && final_gap < 0.01; }
};

inline FarFieldReport far_field_sweep(std::uint64_t seed) {
    const std::size_t dim = 8;
    Rng rng(seed);
    const std::vector<double> u = detail::random_unit(rng, dim);
    std::vector<double> origin(dim, 0.0), c_n(dim), c_anom(dim);
    const std::vector<double> w = detail::orthogonalize(rng.normal_vector(dim), u);
    for (std::size_t k = 0; k < dim; ++k) {
        c_n[k] = 0.3 * u[k];
        c_anom[k] = 1.2 * u[k] + 0.5 * w[k];
    }
    const EmbeddingSet trn = rng.gaussian_set(64, origin, 1.0);
    const EmbeddingSet test_n = rng.gaussian_set(64, c_n, 1.0);
    const EmbeddingSet test_a = rng.gaussian_set(32, c_anom, 1.0);
    const EmbeddingSet aug_base = rng.gaussian_set(64, origin, 1.0);
    EmbeddingSet test = concat(test_n, test_a);
    Labels labels(test.size(), 0);
    for (std::size_t i = test_n.size(); i < test.size(); ++i) labels[i] = 1;

    auto translated = [&](double c) {
        EmbeddingSet out(dim);
        std::vector<double> row(dim);
        for (std::size_t i = 0; i < aug_base.size(); ++i) {
            auto r = aug_base.row(i);
            for (std::size_t k = 0; k < dim; ++k) row[k] = r[k] + c * u[k];
            out.append(row);
        }
        return out;
    };
    // d(trn, translated(c)) is monotone in c; bisect to hit each target.
    auto place_at = [&](double target) {
        double lo = 0.0, hi = target + 16.0;
        for (int i = 0; i < 80; ++i) {
            const double mid = 0.5 * (lo + hi);
            if (set_distance(trn, translated(mid)) < target)
                lo = mid;
            else
                hi = mid;
        }
        return translated(0.5 * (lo + hi));
    };

    const double sigma_hat = set_distance(trn, test_n);
    const double base = 2.0 * sigma_hat;
    FarFieldReport rep;
    for (double scale : {1.0, 10.0, 100.0, 1000.0}) {
        const EmbeddingSet aug = place_at(base * scale);
        const DisBoundsReport r = dis_bounds(trn, aug, test, labels);
        FarFieldPoint p;
        p.scale = scale;
        p.trn_aug_dist = r.trn_aug_dist;
        p.value = r.value;
        p.linear = r.lower;
        p.rel_gap = std::fabs(r.value - r.lower) / r.value;
        rep.points.push_back(p);
    }
    rep.monotone = true;
    for (std::size_t i = 1; i < rep.points.size(); ++i)
        rep.monotone &= rep.points[i].rel_gap < rep.points[i - 1].rel_gap;
    rep.final_gap = rep.points.back().rel_gap;
    return rep;
}

struct VerificationReport {
    SweepReport dis_bounds;
    SweepReport sep_identity;
    FarFieldReport far_field;
    bool all_pass() const { return dis_bounds.pass() && sep_identity.pass() && far_field.pass(); }
};

/// Full certification: `instances` bound cases, half as many identity
/// cases, and the far-field sweep.
inline VerificationReport run_verification(std::size_t instances, std::uint64_t seed) {
    VerificationReport rep;
    rep.dis_bounds = dis_bounds_sweep(instances, seed);
    rep.sep_identity = sep_identity_sweep(instances / 2, seed + 1);
    rep.far_field = far_field_sweep(seed + 2);
    return rep;
}

} // namespace dsv
