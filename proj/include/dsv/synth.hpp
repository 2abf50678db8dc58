#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dsv/baselines.hpp"
#include "dsv/errors.hpp"
#include "dsv/harness.hpp"
#include "dsv/rng.hpp"
#include "dsv/run.hpp"
#include "dsv/theory.hpp"

namespace dsv {

/// 17 log-spaced augmentation strengths over one decade, ending exactly at
/// the true displacement.
inline std::vector<double> default_hp_grid(double d_star) {
    std::vector<double> grid(17);
    for (int k = 0; k < 17; ++k)
        grid[static_cast<std::size_t>(k)] = d_star * std::pow(10.0, -1.0 + k / 16.0);
    return grid;
}

/// Parameters of the synthetic embedding world. The defaults are the frozen
/// calibration under which the selection-vs-AUC relationship is reliably
/// visible at desk scale.
struct SynthConfig {
    std::size_t dim = 16;
    std::size_t n_trn = 200;
    std::size_t n_test_n = 50;
    std::size_t n_test_a = 50;
    double sigma = 1.0;          // isotropic spread of every cloud
    double epsilon_shift = 1.0;  // test-normal mean offset along u
    double d_star = 8.0;         // true anomaly displacement
    double alignment_width = 1.0; // log-width of the alignment kernel
    double ortho_noise = 1.0;    // off-axis displacement of misaligned views
    std::vector<double> hp_grid = default_hp_grid(8.0);
    std::uint64_t seed = 1;
};

inline void validate_config(const SynthConfig& config) {
    if (config.dim < 2) throw ValidationError("synth: dim must be at least 2");
    if (config.n_trn == 0 || config.n_test_n == 0 || config.n_test_a == 0)
        throw ValidationError("synth: sample counts must be positive");
    if (!(config.sigma > 0.0)) throw ValidationError("synth: sigma must be positive");
    if (config.epsilon_shift < 0.0) throw ValidationError("synth: epsilon_shift must be >= 0");
    if (!(config.d_star > 0.0)) throw ValidationError("synth: d_star must be positive");
    if (!(config.alignment_width > 0.0))
        throw ValidationError("synth: alignment_width must be positive");
    if (config.ortho_noise < 0.0) throw ValidationError("synth: ortho_noise must be >= 0");
    if (config.hp_grid.empty()) throw ValidationError("synth: hp_grid must not be empty");
    double prev = 0.0;
    for (double d : config.hp_grid) {
        if (!(d > prev)) throw ValidationError("synth: hp_grid must be strictly ascending and positive");
        prev = d;
    }
}

/// How well augmentation strength d matches the true displacement, in log
/// space; 1 at d = d_star, falling off with the configured width.
inline double alignment_kernel(double d, double d_star, double width) {
    const double x = std::log(d) - std::log(d_star);
    return std::exp(-x * x / (width * width));
}

/// Generates a labeled run. Anomaly base noise and test normals are shared
/// across candidates - each candidate sees the same test samples, displaced
/// according to its own alignment: on-axis at kappa*d_star for aligned
/// candidates, drifting toward the off-axis direction as kappa drops. The
/// run-level test set holds the canonical (ideal-encoder) view; candidates
/// carry their own views.
inline SelectionRun generate_run(const SynthConfig& config) {
    validate_config(config);
    Rng rng(config.seed);

    const std::vector<double> u = detail::random_unit(rng, config.dim);
    std::vector<double> v = detail::orthogonalize(rng.normal_vector(config.dim), u);
    {
        double norm = 0.0;
        for (double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (norm == 0.0) throw NumericError("synth: degenerate orthogonal direction");
        for (double& x : v) x /= norm;
    }

    std::vector<double> origin(config.dim, 0.0);
    std::vector<double> normal_center(config.dim);
    for (std::size_t k = 0; k < config.dim; ++k) normal_center[k] = config.epsilon_shift * u[k];

    SelectionRun run;
    run.task_id = "synth-" + std::to_string(config.seed);
    run.trn = rng.gaussian_set(config.n_trn, origin, config.sigma);
    const EmbeddingSet test_normals = rng.gaussian_set(config.n_test_n, normal_center, config.sigma);
    const EmbeddingSet anomaly_noise = rng.gaussian_set(config.n_test_a, origin, config.sigma);

    auto anomalies_at = [&](double kappa) {
        EmbeddingSet out(config.dim);
        out.reserve(config.n_test_a);
        std::vector<double> row(config.dim);
        for (std::size_t i = 0; i < config.n_test_a; ++i) {
            auto noise = anomaly_noise.row(i);
            for (std::size_t k = 0; k < config.dim; ++k)
                row[k] = noise[k] + kappa * config.d_star * u[k] +
                         (1.0 - kappa) * config.ortho_noise * v[k];
            out.append(row);
        }
        return out;
    };

    run.test = concat(test_normals, anomalies_at(1.0));
    Labels labels(run.test.size(), 0);
    for (std::size_t i = test_normals.size(); i < run.test.size(); ++i) labels[i] = 1;
    run.labels = labels;

    std::vector<double> aug_center(config.dim);
    for (double d : config.hp_grid) {
        CandidateModel candidate;
        candidate.hp_value = d;
        for (std::size_t k = 0; k < config.dim; ++k) aug_center[k] = d * u[k];
        candidate.aug = rng.gaussian_set(config.n_trn, aug_center, config.sigma);
        const double kappa = alignment_kernel(d, config.d_star, config.alignment_width);
        candidate.test = concat(test_normals, anomalies_at(kappa));
        run.candidates.push_back(std::move(candidate));
    }

    // Post-generation check of the train/test-normal geometry. A single
    // train point has no measurable spread, so the check is vacuous there.
    if (run.trn.size() >= 2) {
        const AssumptionStats stats = assumption_stats(run.trn, test_normals);
        if (!stats.satisfied)
            throw ValidationError("synth: epsilon_shift too large, measured epsilon " +
                                  std::to_string(stats.epsilon) + " >= sigma " +
                                  std::to_string(stats.sigma));
    }
    return run;
}

/// Scores every candidate's test view with a Gaussian fit of the train set.
inline ScoreMatrix score_candidates(const SelectionRun& run, std::size_t components = 1) {
    return score_matrix(run, components);
}

} // namespace dsv
