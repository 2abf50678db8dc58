#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dsv/baselines.hpp"
#include "dsv/embedding_set.hpp"
#include "dsv/errors.hpp"
#include "dsv/loss.hpp"
#include "dsv/parallel.hpp"
#include "dsv/run.hpp"
#include "dsv/scoring.hpp"
#include "dsv/stats.hpp"

namespace dsv {

// ---------------------------------------------------------------------------
// Methods × tasks AUC tables and their aggregates.
// ---------------------------------------------------------------------------

struct EvaluationTable {
    std::vector<std::string> methods;
    std::vector<std::string> tasks;
    std::vector<double> auc; // methods-major

    double at(std::size_t method, std::size_t task) const {
        return auc[method * tasks.size() + task];
    }

    void validate() const {
        if (methods.empty() || tasks.empty())
            throw ValidationError("evaluation table is empty");
        if (auc.size() != methods.size() * tasks.size())
            throw ValidationError("evaluation table is not rectangular");
        for (double v : auc)
            if (!(v >= 0.0 && v <= 1.0))
                throw ValidationError("evaluation table entry outside [0, 1]");
    }
};

/// Per-method arithmetic mean AUC across tasks.
inline std::vector<double> aggregate_results(const EvaluationTable& table) {
    table.validate();
    std::vector<double> means(table.methods.size(), 0.0);
    for (std::size_t m = 0; m < table.methods.size(); ++m) {
        for (std::size_t t = 0; t < table.tasks.size(); ++t) means[m] += table.at(m, t);
        means[m] /= static_cast<double>(table.tasks.size());
    }
    return means;
}

/// Per-method mean rank across tasks: within each task methods are ranked by
/// AUC descending (1 = best), ties averaged.
inline std::vector<double> average_rank(const EvaluationTable& table) {
    table.validate();
    std::vector<double> mean_ranks(table.methods.size(), 0.0);
    std::vector<double> negated(table.methods.size());
    for (std::size_t t = 0; t < table.tasks.size(); ++t) {
        for (std::size_t m = 0; m < table.methods.size(); ++m) negated[m] = -table.at(m, t);
        const std::vector<double> r = ranks_average(negated);
        for (std::size_t m = 0; m < table.methods.size(); ++m) mean_ranks[m] += r[m];
    }
    for (double& v : mean_ranks) v /= static_cast<double>(table.tasks.size());
    return mean_ranks;
}

/// One-sided p-values p[i][j] for "method i beats method j", pooling task
/// columns across all given tables (which must share the method list).
/// Diagonal entries are NaN.
inline std::vector<std::vector<double>> wilcoxon_matrix(
    const std::vector<EvaluationTable>& tables) {
    if (tables.empty()) throw ValidationError("wilcoxon_matrix: no tables");
    const auto& methods = tables.front().methods;
    std::vector<std::vector<double>> pooled(methods.size());
    for (const auto& table : tables) {
        table.validate();
        if (table.methods != methods)
            throw ValidationError("wilcoxon_matrix: tables disagree on methods");
        for (std::size_t m = 0; m < methods.size(); ++m)
            for (std::size_t t = 0; t < table.tasks.size(); ++t)
                pooled[m].push_back(table.at(m, t));
    }
    std::vector<std::vector<double>> p(methods.size(),
                                       std::vector<double>(methods.size(),
                                                           std::numeric_limits<double>::quiet_NaN()));
    for (std::size_t i = 0; i < methods.size(); ++i)
        for (std::size_t j = 0; j < methods.size(); ++j)
            if (i != j) p[i][j] = wilcoxon_signed_rank(pooled[i], pooled[j]).p_value;
    return p;
}

// ---------------------------------------------------------------------------
// Selection over a run.
// ---------------------------------------------------------------------------

struct CandidateEval {
    double hp = 0.0;
    bool valid = false;
    std::string error;            // reason when invalid
    LossBreakdown losses;         // meaningful only when valid
    std::optional<double> auc;    // realized AUC, labels only
};

struct MethodOutcome {
    SelectorResult result;
    std::optional<double> chosen_hp;
    std::optional<double> realized_auc; // labels only; evaluation, never selection
};

struct RunReport {
    std::string task_id;
    std::uint64_t seed = 0;
    SepClamp clamp = SepClamp::max_with_half;
    std::vector<CandidateEval> candidates;
    std::vector<MethodOutcome> methods;
    std::optional<double> average_auc; // the "avg" reference row
};

struct SelectionOptions {
    SepClamp clamp = SepClamp::max_with_half;
    std::size_t scorer_components = 1;
};

/// Candidates × samples score matrix for a run: provided scores are used
/// verbatim, missing rows are computed from a Gaussian fit of the train set
/// applied to each candidate's test view.
inline ScoreMatrix score_matrix(const SelectionRun& run, std::size_t components = 1) {
    validate_run(run);
    ScoreMatrix m(run.candidates.size(), run.test.size());
    std::optional<GaussianScorer> scorer;
    for (std::size_t i = 0; i < run.candidates.size(); ++i) {
        char id[40];
        std::snprintf(id, sizeof(id), "hp=%.17g", run.candidates[i].hp_value);
        m.candidate_ids.push_back(id);
        if (run.candidates[i].scores) {
            m.set_row(i, *run.candidates[i].scores);
        } else {
            if (!scorer) scorer.emplace(run.trn, components);
            m.set_row(i, scorer->score_all(candidate_test_view(run, i)));
        }
    }
    return m;
}

/// Mean AUC over all candidates (the paper's reference row, not a selector).
inline double evaluate_average(const SelectionRun& run, std::size_t components = 1) {
    if (!run.labels) throw ValidationError("evaluate_average: labels required");
    const ScoreMatrix m = score_matrix(run, components);
    double sum = 0.0;
    for (std::size_t i = 0; i < m.candidates(); ++i) sum += auc(m.row(i), *run.labels);
    return sum / static_cast<double>(m.candidates());
}

namespace detail {

inline bool wants(const std::vector<std::string>& methods, const std::string& name) {
    return std::find(methods.begin(), methods.end(), name) != methods.end();
}

} // namespace detail

/// Runs the requested selectors over a run. No selector reads labels; when
/// labels are present they are used afterwards, only to attach realized AUC
/// numbers for evaluation. Methods default to every applicable selector.
inline RunReport run_selection(const SelectionRun& run,
                               std::vector<std::string> methods = {},
                               std::uint64_t seed = 0,
                               const SelectionOptions& options = {}) {
    validate_run(run);
    if (methods.empty()) {
        for (const auto& name : selector_names())
            if (name != "avg" || run.labels) methods.push_back(name);
    }
    for (const auto& name : methods) {
        if (std::find(selector_names().begin(), selector_names().end(), name) ==
            selector_names().end())
            throw ValidationError("unknown selector: " + name);
        if (name == "avg" && !run.labels)
            throw ValidationError("selector 'avg' requires labels");
    }

    RunReport report;
    report.task_id = run.task_id;
    report.seed = seed;
    report.clamp = options.clamp;

    const std::size_t n = run.candidates.size();

    // Per-candidate losses; degenerate candidates become invalid, not fatal.
    // Nothing may escape the worker threads.
    report.candidates.resize(n);
    parallel_for(n, [&](std::size_t i) {
        CandidateEval& eval = report.candidates[i];
        eval.hp = run.candidates[i].hp_value;
        try {
            eval.losses = l_val(run.trn, run.candidates[i].aug, candidate_test_view(run, i),
                                options.clamp);
            eval.valid = true;
        } catch (const std::exception& e) {
            eval.valid = false;
            eval.error = e.what();
        }
    });

    const bool need_scores = run.labels.has_value() || detail::wants(methods, "mc") ||
                             detail::wants(methods, "sel") || detail::wants(methods, "hits") ||
                             detail::wants(methods, "avg");
    std::optional<ScoreMatrix> scores;
    if (need_scores) scores.emplace(score_matrix(run, options.scorer_components));

    std::optional<std::vector<double>> candidate_auc;
    if (run.labels) {
        candidate_auc.emplace(n);
        for (std::size_t i = 0; i < n; ++i) {
            (*candidate_auc)[i] = auc(scores->row(i), *run.labels);
            report.candidates[i].auc = (*candidate_auc)[i];
            if (report.candidates[i].valid) {
                auto [test_n, test_a] = split_by_labels(candidate_test_view(run, i), *run.labels);
                if (!test_a.empty())
                    report.candidates[i].losses.alignment =
                        alignment_loss(run.candidates[i].aug, test_a);
            }
        }
    }

    auto loss_criterion = [&](auto pick) {
        std::vector<double> criterion(n, std::numeric_limits<double>::quiet_NaN());
        for (std::size_t i = 0; i < n; ++i)
            if (report.candidates[i].valid) criterion[i] = pick(report.candidates[i].losses);
        return criterion;
    };
    auto failure_summary = [&]() {
        std::string msg;
        for (std::size_t i = 0; i < n; ++i)
            if (!report.candidates[i].valid)
                msg += "\n  candidate " + std::to_string(i) + ": " + report.candidates[i].error;
        return msg;
    };

    // Canonical order regardless of how the request was phrased.
    for (const auto& name : selector_names()) {
        if (!detail::wants(methods, name)) continue;
        if (name == "avg") {
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) sum += (*candidate_auc)[i];
            report.average_auc = sum / static_cast<double>(n);
            continue;
        }
        SelectorResult result;
        if (name == "dsv" || name == "base") {
            result.method = name;
            result.direction = SelectorResult::Direction::minimize;
            result.criterion =
                name == "dsv" ? loss_criterion([](const LossBreakdown& l) { return l.l_val; })
                              : loss_criterion([](const LossBreakdown& l) { return l.l_dis; });
            result.chosen_index = argbest(result.criterion, result.direction);
            if (!result.chosen_index)
                throw NumericError("selector '" + name + "': no valid candidate" +
                                   failure_summary());
        } else if (name == "mmd") {
            result.method = name;
            result.direction = SelectorResult::Direction::minimize;
            result.criterion.assign(n, std::numeric_limits<double>::quiet_NaN());
            for (std::size_t i = 0; i < n; ++i) {
                try {
                    result.criterion[i] = mmd_criterion(run.trn, run.candidates[i].aug,
                                                        candidate_test_view(run, i));
                } catch (const NumericError&) {
                    // degenerate kernel: candidate excluded
                }
            }
            result.chosen_index = argbest(result.criterion, result.direction);
            if (!result.chosen_index)
                throw NumericError("selector 'mmd': every candidate has a degenerate kernel");
        } else if (name == "std") {
            result.method = name;
            result.direction = SelectorResult::Direction::maximize;
            result.criterion.resize(n);
            for (std::size_t i = 0; i < n; ++i)
                result.criterion[i] = std_criterion(run.trn, candidate_test_view(run, i));
            result.chosen_index = argbest(result.criterion, result.direction);
        } else if (name == "rand") {
            result = select_random(n, seed);
        } else if (name == "mc" || name == "sel") {
            if (n == 1) {
                // a lone candidate is selected vacuously; the underlying
                // criteria need at least two score rows
                result.method = name;
                result.direction = SelectorResult::Direction::maximize;
                result.criterion = {0.0};
                result.chosen_index = 0;
            } else {
                result = name == "mc" ? select_mc(*scores) : select_sel(*scores);
            }
        } else if (name == "hits") {
            result = select_hits(*scores).selection;
        }

        MethodOutcome outcome;
        outcome.result = std::move(result);
        if (outcome.result.chosen_index) {
            outcome.chosen_hp = run.candidates[*outcome.result.chosen_index].hp_value;
            if (candidate_auc) outcome.realized_auc = (*candidate_auc)[*outcome.result.chosen_index];
        }
        report.methods.push_back(std::move(outcome));
    }

    return report;
}

/// The Base selector as a standalone entry point: argmin of the discordance
/// surrogate over valid candidates.
inline SelectorResult select_base(const SelectionRun& run) {
    RunReport r = run_selection(run, {"base"});
    return r.methods.front().result;
}

inline SelectorResult select_mmd(const SelectionRun& run) {
    RunReport r = run_selection(run, {"mmd"});
    return r.methods.front().result;
}

inline SelectorResult select_std(const SelectionRun& run) {
    RunReport r = run_selection(run, {"std"});
    return r.methods.front().result;
}

inline SelectorResult select_dsv(const SelectionRun& run,
                                 SepClamp clamp = SepClamp::max_with_half) {
    SelectionOptions options;
    options.clamp = clamp;
    RunReport r = run_selection(run, {"dsv"}, 0, options);
    return r.methods.front().result;
}

} // namespace dsv
