#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "dsv/harness.hpp"
#include "dsv/theory.hpp"

namespace dsv {

using OrderedJson = nlohmann::ordered_json;

inline constexpr const char* kReportSchema = "dsv-report/1";

namespace report {

inline OrderedJson opt_number(const std::optional<double>& v) {
    if (!v || !std::isfinite(*v)) return nullptr;
    return *v;
}

inline OrderedJson finite_or_null(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

/// Selection report. Field list (schema dsv-report/1, kind "selection"):
/// task_id, seed, sep_clamp, methods.<name>.{chosen_index, chosen_hp,
/// realized_auc, direction, criterion}, average_auc, candidates[].{hp,
/// valid, error, l_dis, l_sep, l_val, alignment, auc}, notes.
inline OrderedJson selection_report(const RunReport& run_report) {
    OrderedJson j;
    j["schema"] = kReportSchema;
    j["kind"] = "selection";
    j["task_id"] = run_report.task_id;
    j["seed"] = run_report.seed;
    j["sep_clamp"] = run_report.clamp == SepClamp::max_with_half ? "max" : "min";

    OrderedJson methods = OrderedJson::object();
    for (const auto& outcome : run_report.methods) {
        OrderedJson m;
        m["chosen_index"] = outcome.result.chosen_index
                                ? OrderedJson(*outcome.result.chosen_index)
                                : OrderedJson(nullptr);
        m["chosen_hp"] = opt_number(outcome.chosen_hp);
        m["realized_auc"] = opt_number(outcome.realized_auc);
        m["direction"] =
            outcome.result.direction == SelectorResult::Direction::minimize ? "min" : "max";
        OrderedJson criterion = OrderedJson::array();
        for (double c : outcome.result.criterion) criterion.push_back(finite_or_null(c));
        m["criterion"] = criterion;
        methods[outcome.result.method] = m;
    }
    j["methods"] = methods;
    j["average_auc"] = opt_number(run_report.average_auc);

    OrderedJson candidates = OrderedJson::array();
    for (const auto& c : run_report.candidates) {
        OrderedJson e;
        e["hp"] = c.hp;
        e["valid"] = c.valid;
        e["error"] = c.valid ? OrderedJson(nullptr) : OrderedJson(c.error);
        e["l_dis"] = c.valid ? finite_or_null(c.losses.l_dis) : OrderedJson(nullptr);
        e["l_sep"] = c.valid ? finite_or_null(c.losses.l_sep) : OrderedJson(nullptr);
        e["l_val"] = c.valid ? finite_or_null(c.losses.l_val) : OrderedJson(nullptr);
        e["alignment"] = c.valid ? opt_number(c.losses.alignment) : OrderedJson(nullptr);
        e["auc"] = opt_number(c.auc);
        candidates.push_back(e);
    }
    j["candidates"] = candidates;
    j["notes"]["rand"] =
        "seeded uniform draw over candidates; the original per-inference resampling needs retraining";
    return j;
}

/// Evaluation report over fixture tables. Field list (kind "evaluation"):
/// methods, augmentations.<name>.{mean_auc, average_rank}, wilcoxon.pooled
/// {methods, p_values}, wilcoxon.per_augmentation (object or null).
inline OrderedJson evaluation_report(const std::vector<std::string>& aug_names,
                                     const std::vector<EvaluationTable>& tables,
                                     bool per_augmentation) {
    if (aug_names.size() != tables.size())
        throw ValidationError("evaluation_report: name/table count mismatch");
    OrderedJson j;
    j["schema"] = kReportSchema;
    j["kind"] = "evaluation";
    j["methods"] = tables.front().methods;

    OrderedJson augs = OrderedJson::object();
    for (std::size_t a = 0; a < tables.size(); ++a) {
        const auto means = aggregate_results(tables[a]);
        const auto ranks = average_rank(tables[a]);
        OrderedJson entry;
        OrderedJson mean_auc = OrderedJson::object();
        OrderedJson rank = OrderedJson::object();
        for (std::size_t m = 0; m < tables[a].methods.size(); ++m) {
            mean_auc[tables[a].methods[m]] = means[m];
            rank[tables[a].methods[m]] = ranks[m];
        }
        entry["mean_auc"] = mean_auc;
        entry["average_rank"] = rank;
        augs[aug_names[a]] = entry;
    }
    j["augmentations"] = augs;

    auto matrix_json = [](const std::vector<std::string>& methods,
                          const std::vector<std::vector<double>>& p) {
        OrderedJson out;
        out["methods"] = methods;
        OrderedJson rows = OrderedJson::array();
        for (const auto& row : p) {
            OrderedJson r = OrderedJson::array();
            for (double v : row) r.push_back(finite_or_null(v));
            rows.push_back(r);
        }
        out["p_values"] = rows;
        return out;
    };

    j["wilcoxon"]["pooled"] = matrix_json(tables.front().methods, wilcoxon_matrix(tables));
    if (per_augmentation) {
        OrderedJson per = OrderedJson::object();
        for (std::size_t a = 0; a < tables.size(); ++a)
            per[aug_names[a]] = matrix_json(tables[a].methods, wilcoxon_matrix({tables[a]}));
        j["wilcoxon"]["per_augmentation"] = per;
    } else {
        j["wilcoxon"]["per_augmentation"] = nullptr;
    }
    return j;
}

/// Verification report (kind "verification"): one record per certified family
/// plus the far-field sweep.
inline OrderedJson verification_report(const VerificationReport& rep) {
    OrderedJson j;
    j["schema"] = kReportSchema;
    j["kind"] = "verification";
    auto sweep = [](const SweepReport& s) {
        OrderedJson out;
        out["instances"] = s.instances;
        out["failures"] = s.failures;
        out["max_violation"] = s.max_violation;
        out["tolerance"] = s.tolerance;
        out["hypothesis"] = s.hypothesis;
        out["counterexamples"] = s.counterexamples;
        out["pass"] = s.pass();
        return out;
    };
    j["dis_bounds"] = sweep(rep.dis_bounds);
    j["sep_identity"] = sweep(rep.sep_identity);
    OrderedJson points = OrderedJson::array();
    for (const auto& p : rep.far_field.points) {
        OrderedJson e;
        e["scale"] = p.scale;
        e["trn_aug_dist"] = p.trn_aug_dist;
        e["value"] = p.value;
        e["linear"] = p.linear;
        e["rel_gap"] = p.rel_gap;
        points.push_back(e);
    }
    j["far_field"]["points"] = points;
    j["far_field"]["monotone"] = rep.far_field.monotone;
    j["far_field"]["final_gap"] = rep.far_field.final_gap;
    j["far_field"]["pass"] = rep.far_field.pass();
    j["all_pass"] = rep.all_pass();
    return j;
}

/// Checks a report against the documented field list for its kind.
inline void validate_report(const OrderedJson& j) {
    auto need = [&](const OrderedJson& obj, const char* key, const std::string& where) {
        if (!obj.contains(key))
            throw ValidationError("report is missing field '" + std::string(key) + "' in " + where);
    };
    need(j, "schema", "root");
    need(j, "kind", "root");
    if (j["schema"] != kReportSchema)
        throw ValidationError("unsupported report schema");
    const std::string kind = j["kind"];
    if (kind == "selection") {
        for (const char* key : {"task_id", "seed", "sep_clamp", "methods", "average_auc",
                                "candidates", "notes"})
            need(j, key, "selection report");
        for (const auto& c : j["candidates"])
            for (const char* key : {"hp", "valid", "error", "l_dis", "l_sep", "l_val",
                                    "alignment", "auc"})
                need(c, key, "candidate entry");
    } else if (kind == "evaluation") {
        for (const char* key : {"methods", "augmentations", "wilcoxon"})
            need(j, key, "evaluation report");
        need(j["wilcoxon"], "pooled", "wilcoxon block");
    } else if (kind == "verification") {
        for (const char* key : {"dis_bounds", "sep_identity", "far_field", "all_pass"})
            need(j, key, "verification report");
    } else {
        throw ValidationError("unknown report kind '" + kind + "'");
    }
}

// ---------------------------------------------------------------------------
// Plain-text rendering.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fixed(double v, int precision = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

inline std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

/// Renders rows as aligned columns, first row being the header.
inline std::string table(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> widths;
    for (const auto& row : rows) {
        if (widths.size() < row.size()) widths.resize(row.size(), 0);
        for (std::size_t c = 0; c < row.size(); ++c)
            widths[c] = std::max(widths[c], row[c].size());
    }
    std::string out;
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += "  ";
            out += pad(row[c], widths[c]);
        }
        while (!out.empty() && out.back() == ' ') out.pop_back();
        out += '\n';
    }
    return out;
}

inline std::string cell(const OrderedJson& v, int precision = 6) {
    if (v.is_null()) return "-";
    if (v.is_number_float()) return fixed(v.get<double>(), precision);
    if (v.is_number()) return std::to_string(v.get<long long>());
    if (v.is_boolean()) return v.get<bool>() ? "yes" : "no";
    return v.get<std::string>();
}

} // namespace detail

inline std::string render_text(const OrderedJson& j) {
    validate_report(j);
    const std::string kind = j["kind"];
    std::string out;
    if (kind == "selection") {
        out += "task: " + j["task_id"].get<std::string>() +
               "  seed: " + std::to_string(j["seed"].get<std::uint64_t>()) +
               "  sep_clamp: " + j["sep_clamp"].get<std::string>() + "\n\n";
        std::vector<std::vector<std::string>> rows;
        rows.push_back({"method", "chosen_index", "chosen_hp", "realized_auc"});
        for (const auto& [name, m] : j["methods"].items())
            rows.push_back({name, detail::cell(m["chosen_index"]), detail::cell(m["chosen_hp"]),
                            detail::cell(m["realized_auc"], 4)});
        out += detail::table(rows);
        if (!j["average_auc"].is_null())
            out += "\naverage_auc: " + detail::cell(j["average_auc"], 4) + "\n";
        out += "\n";
        rows.clear();
        rows.push_back({"hp", "l_dis", "l_sep", "l_val", "alignment", "auc", "status"});
        for (const auto& c : j["candidates"])
            rows.push_back({detail::cell(c["hp"]), detail::cell(c["l_dis"]),
                            detail::cell(c["l_sep"]), detail::cell(c["l_val"]),
                            detail::cell(c["alignment"]), detail::cell(c["auc"], 4),
                            c["valid"].get<bool>() ? "ok" : c["error"].get<std::string>()});
        out += detail::table(rows);
    } else if (kind == "evaluation") {
        for (const auto& [aug, entry] : j["augmentations"].items()) {
            out += aug + "\n";
            std::vector<std::vector<std::string>> rows;
            rows.push_back({"method", "mean_auc", "average_rank"});
            for (const auto& name : j["methods"])
                rows.push_back({name.get<std::string>(),
                                detail::cell(entry["mean_auc"][name.get<std::string>()], 6),
                                detail::cell(entry["average_rank"][name.get<std::string>()], 3)});
            out += detail::table(rows) + "\n";
        }
        out += "wilcoxon one-sided p-values (row beats column), pooled\n";
        const auto& pooled = j["wilcoxon"]["pooled"];
        std::vector<std::vector<std::string>> rows;
        std::vector<std::string> header = {""};
        for (const auto& name : pooled["methods"]) header.push_back(name.get<std::string>());
        rows.push_back(header);
        for (std::size_t i = 0; i < pooled["methods"].size(); ++i) {
            std::vector<std::string> row = {pooled["methods"][i].get<std::string>()};
            for (const auto& v : pooled["p_values"][i]) {
                if (v.is_null()) {
                    row.push_back("-");
                } else {
                    char buf[32];
                    std::snprintf(buf, sizeof(buf), "%.2e", v.get<double>());
                    row.push_back(buf);
                }
            }
            rows.push_back(row);
        }
        out += detail::table(rows);
    } else { // verification
        for (const char* family : {"dis_bounds", "sep_identity"}) {
            const auto& s = j[family];
            out += std::string(family) + ": instances=" + std::to_string(s["instances"].get<std::size_t>()) +
                   " failures=" + std::to_string(s["failures"].get<std::size_t>()) +
                   " max_violation=" + detail::cell(s["max_violation"], 12) +
                   " pass=" + (s["pass"].get<bool>() ? "yes" : "no") + "\n";
            for (const auto& ce : s["counterexamples"])
                out += "  counterexample: " + ce.get<std::string>() + "\n";
        }
        out += "far_field: monotone=" + std::string(j["far_field"]["monotone"].get<bool>() ? "yes" : "no") +
               " final_gap=" + detail::cell(j["far_field"]["final_gap"], 8) +
               " pass=" + (j["far_field"]["pass"].get<bool>() ? "yes" : "no") + "\n";
        std::vector<std::vector<std::string>> rows;
        rows.push_back({"scale", "trn_aug_dist", "value", "linear", "rel_gap"});
        for (const auto& p : j["far_field"]["points"])
            rows.push_back({detail::cell(p["scale"], 0), detail::cell(p["trn_aug_dist"], 3),
                            detail::cell(p["value"], 6), detail::cell(p["linear"], 6),
                            detail::cell(p["rel_gap"], 8)});
        out += detail::table(rows);
        out += "all_pass: " + std::string(j["all_pass"].get<bool>() ? "yes" : "no") + "\n";
    }
    return out;
}

inline void write_json(const std::filesystem::path& path, const OrderedJson& j) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write report: " + path.string());
    out << j.dump(2) << '\n';
}

inline OrderedJson read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open report: " + path.string());
    OrderedJson j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError("malformed report " + path.string() + ": " + e.what());
    }
    return j;
}

} // namespace report

} // namespace dsv
