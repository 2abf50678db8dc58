#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dsv/embedding_set.hpp"
#include "dsv/errors.hpp"

namespace dsv {

/// One augmentation-hyperparameter setting: its strength, the augmented
/// embeddings, optional per-sample anomaly scores, and optionally its own
/// view of the test samples (the same samples re-embedded by this
/// candidate's encoder). When `test` is absent the run-level test set
/// applies.
struct CandidateModel {
    double hp_value = 0.0;
    EmbeddingSet aug;
    std::optional<std::vector<double>> scores;
    std::optional<EmbeddingSet> test;
};

/// A selection task: train embeddings, test embeddings (optionally labeled,
/// 1 = anomaly), and the ordered candidates to rank.
struct SelectionRun {
    std::string task_id;
    EmbeddingSet trn;
    EmbeddingSet test;
    std::optional<Labels> labels;
    std::vector<CandidateModel> candidates;
};

/// The test embeddings candidate `i` sees.
inline const EmbeddingSet& candidate_test_view(const SelectionRun& run, std::size_t i) {
    return run.candidates[i].test ? *run.candidates[i].test : run.test;
}

inline void validate_run(const SelectionRun& run) {
    if (run.candidates.empty()) throw ValidationError("run has no candidates");
    if (run.trn.empty()) throw ValidationError("run has an empty train set");
    if (run.test.empty()) throw ValidationError("run has an empty test set");
    if (run.labels && run.labels->size() != run.test.size())
        throw ValidationError("label count does not match test sample count");
    for (std::size_t i = 0; i < run.candidates.size(); ++i) {
        const auto& c = run.candidates[i];
        if (!(c.hp_value > 0.0))
            throw ValidationError("candidate " + std::to_string(i) + " has non-positive hp");
        if (c.aug.dim() != run.trn.dim())
            throw ValidationError("candidate " + std::to_string(i) + " aug dimension mismatch");
        if (c.test) {
            if (c.test->dim() != run.trn.dim())
                throw ValidationError("candidate " + std::to_string(i) + " test dimension mismatch");
            if (c.test->size() != run.test.size())
                throw ValidationError("candidate " + std::to_string(i) +
                                      " test sample count differs from the run test set");
        }
        if (c.scores && c.scores->size() != run.test.size())
            throw ValidationError("candidate " + std::to_string(i) + " score count mismatch");
    }
}

} // namespace dsv
