#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "dsv/embedding_set.hpp"
#include "dsv/errors.hpp"
#include "dsv/geometry.hpp"

namespace dsv {

/// How the separability surrogate enters the validation loss. The printed
/// form uses max(l_sep, 1/2); the min variant caps overshoot above the
/// optimum and is exposed for study only.
enum class SepClamp { max_with_half, min_with_half };

struct LossBreakdown {
    double l_dis = 0.0;
    double l_sep = 0.0;
    double l_val = 0.0;
    std::optional<double> alignment; // only present when test labels exist
};

/// Oracle-only alignment: distance between augmented embeddings and the true
/// test anomalies. Smaller means the augmentation tracks the anomalies better.
inline double alignment_loss(const EmbeddingSet& aug, const EmbeddingSet& test_anomalies) {
    if (test_anomalies.empty()) throw ValidationError("alignment_loss: empty anomaly set");
    return set_distance(aug, test_anomalies);
}

/// Coarse misalignment of test anomalies relative to the train->aug segment.
/// Zero when (for singletons) the anomaly lies on the segment; lower is better.
inline double discordance(const EmbeddingSet& trn, const EmbeddingSet& aug,
                          const EmbeddingSet& test_anomalies) {
    const double base = set_distance(trn, aug);
    if (base == 0.0) throw NumericError("discordance: d(trn, aug) is zero");
    return (set_distance(trn, test_anomalies) + set_distance(aug, test_anomalies)) / base - 1.0;
}

/// Fine-grained alignment: mean projection of anomalies along each
/// train->aug direction, in units of d(trn, aug). 1 is ideal.
inline double separability(const EmbeddingSet& trn, const EmbeddingSet& aug,
                           const EmbeddingSet& test_anomalies) {
    const double base = set_distance(trn, aug);
    if (base == 0.0) throw NumericError("separability: d(trn, aug) is zero");
    double sum = 0.0;
    for (std::size_t i = 0; i < trn.size(); ++i)
        for (std::size_t j = 0; j < aug.size(); ++j) {
            if (vec_distance(trn.row(i), aug.row(j)) == 0.0)
                throw NumericError("separability: degenerate direction for triple (trn " +
                                   std::to_string(i) + ", aug " + std::to_string(j) + ")");
            for (std::size_t k = 0; k < test_anomalies.size(); ++k)
                sum += projected_norm(trn.row(i), aug.row(j), test_anomalies.row(k));
        }
    const double count = static_cast<double>(trn.size()) * static_cast<double>(aug.size()) *
                         static_cast<double>(test_anomalies.size());
    return sum / (base * count);
}

/// Label-free surrogate for discordance: d(trn ∪ aug, test) / d(trn, aug).
/// The union keeps duplicates.
inline double l_dis_hat(const EmbeddingSet& trn, const EmbeddingSet& aug,
                        const EmbeddingSet& test) {
    const double base = set_distance(trn, aug);
    if (base == 0.0) throw NumericError("l_dis_hat: d(trn, aug) is zero");
    return set_distance(concat(trn, aug), test) / base;
}

/// Projections of every test point onto every (anchor -> aug point) direction.
/// Returned in (aug-major, test-minor) order.
inline std::vector<double> anchored_projections(std::span<const double> anchor,
                                                const EmbeddingSet& aug,
                                                const EmbeddingSet& test) {
    std::vector<double> projections;
    projections.reserve(aug.size() * test.size());
    for (std::size_t j = 0; j < aug.size(); ++j) {
        if (vec_distance(anchor, aug.row(j)) == 0.0)
            throw NumericError("l_sep_hat: aug point " + std::to_string(j) +
                               " coincides with the train mean");
        for (std::size_t k = 0; k < test.size(); ++k)
            projections.push_back(projected_norm(anchor, aug.row(j), test.row(k)));
    }
    return projections;
}

/// Label-free surrogate for separability: spread of test projections along
/// the (train mean -> aug) directions, in units of d(trn, aug). Only the
/// train mean anchors the projections.
inline double l_sep_hat(const EmbeddingSet& trn, const EmbeddingSet& aug,
                        const EmbeddingSet& test) {
    const double base = set_distance(trn, aug);
    if (base == 0.0) throw NumericError("l_sep_hat: d(trn, aug) is zero");
    const std::vector<double> mu = mean_vector(trn);
    const std::vector<double> projections = anchored_projections(mu, aug, test);
    return population_std(projections) / base;
}

inline double combine_losses(double l_dis, double l_sep, SepClamp clamp) {
    const double s = clamp == SepClamp::max_with_half ? std::max(l_sep, 0.5)
                                                      : std::min(l_sep, 0.5);
    return l_dis - s / l_dis;
}

/// The validation loss: l_dis - clamp(l_sep, 1/2)/l_dis. Lower is better;
/// candidates are selected by argmin.
inline LossBreakdown l_val(const EmbeddingSet& trn, const EmbeddingSet& aug,
                           const EmbeddingSet& test,
                           SepClamp clamp = SepClamp::max_with_half) {
    LossBreakdown out;
    out.l_dis = l_dis_hat(trn, aug, test);
    out.l_sep = l_sep_hat(trn, aug, test);
    out.l_val = combine_losses(out.l_dis, out.l_sep, clamp);
    return out;
}

} // namespace dsv
