#pragma once

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dsv/embedding_set.hpp"
#include "dsv/errors.hpp"
#include "dsv/harness.hpp"
#include "dsv/run.hpp"

namespace dsv {

namespace io {

/// Shortest decimal text that parses back to exactly the same double.
inline std::string format_double(double x) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

/// Fixed 17-significant-digit form used inside data files.
inline std::string format_double_17(double x) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline double parse_double(const std::string& text, const std::string& where) {
    double value = 0.0;
    const char* begin = text.c_str();
    const auto res = std::from_chars(begin, begin + text.size(), value);
    if (res.ec != std::errc{} || res.ptr != begin + text.size())
        throw ValidationError(where + ": cannot parse number '" + text + "'");
    return value;
}

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::ifstream open_input(const std::filesystem::path& path, bool binary = false) {
    std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
    if (!in) throw ValidationError("cannot open file: " + path.string());
    return in;
}

constexpr char kRawMagic[8] = {'D', 'S', 'V', 'E', 'M', 'B', '6', '4'};

inline void put_u32_le(std::ostream& out, std::uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                 static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.write(b, 4);
}

inline std::uint32_t get_u32_le(std::istream& in, const std::string& where) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4)) throw ValidationError(where + ": truncated header");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Embedding files: comma-separated decimal text, one vector per row, or the
// raw little-endian container (16-byte header: magic, dim, count; float64).
// ---------------------------------------------------------------------------

inline void save_embeddings_csv(const std::filesystem::path& path, const EmbeddingSet& set) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write file: " + path.string());
    for (std::size_t i = 0; i < set.size(); ++i) {
        auto row = set.row(i);
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (k) out << ',';
            out << format_double_17(row[k]);
        }
        out << '\n';
    }
}

inline void save_embeddings_raw(const std::filesystem::path& path, const EmbeddingSet& set) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write file: " + path.string());
    out.write(detail::kRawMagic, 8);
    detail::put_u32_le(out, static_cast<std::uint32_t>(set.dim()));
    detail::put_u32_le(out, static_cast<std::uint32_t>(set.size()));
    for (double x : set.flat()) {
        const auto bits = std::bit_cast<std::uint64_t>(x);
        char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
        out.write(b, 8);
    }
}

/// Loads either format, sniffing the raw container's magic.
inline EmbeddingSet load_embeddings(const std::filesystem::path& path) {
    {
        std::ifstream probe = detail::open_input(path, true);
        char magic[8] = {};
        probe.read(magic, 8);
        if (probe.gcount() == 8 && std::memcmp(magic, detail::kRawMagic, 8) == 0) {
            const std::uint32_t dim = detail::get_u32_le(probe, path.string());
            const std::uint32_t count = detail::get_u32_le(probe, path.string());
            if (dim == 0 || count == 0)
                throw ValidationError(path.string() + ": empty raw embedding container");
            EmbeddingSet set(dim);
            set.reserve(count);
            std::vector<double> row(dim);
            for (std::uint32_t i = 0; i < count; ++i) {
                for (std::uint32_t k = 0; k < dim; ++k) {
                    unsigned char b[8];
                    if (!probe.read(reinterpret_cast<char*>(b), 8))
                        throw ValidationError(path.string() + ": truncated raw data at row " +
                                              std::to_string(i + 1));
                    std::uint64_t bits = 0;
                    for (int j = 0; j < 8; ++j) bits |= static_cast<std::uint64_t>(b[j]) << (8 * j);
                    row[k] = std::bit_cast<double>(bits);
                    if (!std::isfinite(row[k]))
                        throw ValidationError(path.string() + ": non-finite value at row " +
                                              std::to_string(i + 1));
                }
                set.append(row);
            }
            return set;
        }
    }
    std::ifstream in = detail::open_input(path);
    EmbeddingSet set;
    std::string line;
    std::size_t line_no = 0;
    std::vector<double> row;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string trimmed = detail::trim(line);
        if (trimmed.empty()) continue;
        row.clear();
        std::stringstream ss(trimmed);
        std::string cell;
        while (std::getline(ss, cell, ','))
            row.push_back(parse_double(detail::trim(cell),
                                       path.string() + ":" + std::to_string(line_no)));
        try {
            set.append(row);
        } catch (const ValidationError& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (set.empty()) throw ValidationError(path.string() + ": no embedding rows");
    return set;
}

inline void save_labels(const std::filesystem::path& path, const Labels& labels) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write file: " + path.string());
    for (auto l : labels) out << static_cast<int>(l) << '\n';
}

inline Labels load_labels(const std::filesystem::path& path, std::size_t expected) {
    std::ifstream in = detail::open_input(path);
    Labels labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        if (t != "0" && t != "1")
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": labels must be 0 or 1, got '" + t + "'");
        labels.push_back(t == "1" ? 1 : 0);
    }
    if (labels.size() != expected)
        throw ValidationError(path.string() + ": has " + std::to_string(labels.size()) +
                              " labels, expected " + std::to_string(expected));
    return labels;
}

inline void save_scores(const std::filesystem::path& path, const std::vector<double>& scores) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write file: " + path.string());
    for (double s : scores) out << format_double_17(s) << '\n';
}

inline std::vector<double> load_scores(const std::filesystem::path& path, std::size_t expected) {
    std::ifstream in = detail::open_input(path);
    std::vector<double> scores;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        const double v = parse_double(t, path.string() + ":" + std::to_string(line_no));
        if (!std::isfinite(v))
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": non-finite score");
        scores.push_back(v);
    }
    if (scores.size() != expected)
        throw ValidationError(path.string() + ": has " + std::to_string(scores.size()) +
                              " scores, expected " + std::to_string(expected));
    return scores;
}

// ---------------------------------------------------------------------------
// Run directories: flat key-value manifest naming every file.
// ---------------------------------------------------------------------------

inline constexpr const char* kManifestFormat = "dsv-run/1";
inline constexpr const char* kManifestName = "manifest.txt";

inline void save_run(const std::filesystem::path& dir, const SelectionRun& run,
                     bool binary = false) {
    validate_run(run);
    std::filesystem::create_directories(dir);
    const char* ext = binary ? ".f64" : ".csv";
    auto save_set = [&](const std::filesystem::path& p, const EmbeddingSet& set) {
        if (binary)
            save_embeddings_raw(p, set);
        else
            save_embeddings_csv(p, set);
    };

    std::ofstream manifest(dir / kManifestName);
    if (!manifest) throw ValidationError("cannot write manifest in " + dir.string());
    manifest << "format = " << kManifestFormat << '\n';
    manifest << "task_id = " << run.task_id << '\n';
    manifest << "dim = " << run.trn.dim() << '\n';
    manifest << "trn = trn" << ext << '\n';
    manifest << "test = test" << ext << '\n';
    save_set(dir / (std::string("trn") + ext), run.trn);
    save_set(dir / (std::string("test") + ext), run.test);
    if (run.labels) {
        manifest << "labels = labels.txt\n";
        save_labels(dir / "labels.txt", *run.labels);
    }
    manifest << "candidate_count = " << run.candidates.size() << '\n';
    for (std::size_t i = 0; i < run.candidates.size(); ++i) {
        const auto& c = run.candidates[i];
        const std::string hp = format_double(c.hp_value);
        const std::string prefix = "candidate." + std::to_string(i) + ".";
        manifest << prefix << "hp = " << hp << '\n';
        manifest << prefix << "aug = aug_" << hp << ext << '\n';
        save_set(dir / ("aug_" + hp + ext), c.aug);
        if (c.test) {
            manifest << prefix << "test = test_" << hp << ext << '\n';
            save_set(dir / ("test_" + hp + ext), *c.test);
        }
        if (c.scores) {
            manifest << prefix << "scores = scores_" << hp << ".txt\n";
            save_scores(dir / ("scores_" + hp + ".txt"), *c.scores);
        }
    }
}

inline SelectionRun load_run(const std::filesystem::path& dir) {
    const std::filesystem::path manifest_path = dir / kManifestName;
    std::ifstream in = detail::open_input(manifest_path);
    std::map<std::string, std::string> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ValidationError(manifest_path.string() + ":" + std::to_string(line_no) +
                                  ": expected 'key = value'");
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string value = detail::trim(t.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ValidationError(manifest_path.string() + ":" + std::to_string(line_no) +
                                  ": empty key or value");
        if (!entries.emplace(key, value).second)
            throw ValidationError(manifest_path.string() + ": duplicate key '" + key + "'");
    }
    auto require = [&](const std::string& key) {
        const auto it = entries.find(key);
        if (it == entries.end())
            throw ValidationError(manifest_path.string() + ": missing key '" + key + "'");
        return it->second;
    };
    auto take = [&](const std::string& key) -> std::optional<std::string> {
        const auto it = entries.find(key);
        if (it == entries.end()) return std::nullopt;
        std::string v = it->second;
        entries.erase(it);
        return v;
    };

    if (require("format") != kManifestFormat)
        throw ValidationError(manifest_path.string() + ": unsupported format '" +
                              entries["format"] + "'");
    entries.erase("format");

    SelectionRun run;
    run.task_id = require("task_id");
    entries.erase("task_id");
    const auto dim = static_cast<std::size_t>(
        parse_double(require("dim"), manifest_path.string() + " dim"));
    entries.erase("dim");

    run.trn = load_embeddings(dir / require("trn"));
    entries.erase("trn");
    run.test = load_embeddings(dir / require("test"));
    entries.erase("test");
    if (run.trn.dim() != dim)
        throw ValidationError(manifest_path.string() + ": trn dimension " +
                              std::to_string(run.trn.dim()) + " does not match declared " +
                              std::to_string(dim));
    if (run.test.dim() != dim)
        throw ValidationError(manifest_path.string() + ": test dimension mismatch");
    if (const auto labels_file = take("labels"))
        run.labels = load_labels(dir / *labels_file, run.test.size());

    const auto count = static_cast<std::size_t>(
        parse_double(require("candidate_count"), manifest_path.string() + " candidate_count"));
    entries.erase("candidate_count");
    if (count == 0) throw ValidationError(manifest_path.string() + ": no candidates declared");
    for (std::size_t i = 0; i < count; ++i) {
        const std::string prefix = "candidate." + std::to_string(i) + ".";
        CandidateModel c;
        c.hp_value = parse_double(require(prefix + "hp"), manifest_path.string());
        entries.erase(prefix + "hp");
        c.aug = load_embeddings(dir / require(prefix + "aug"));
        entries.erase(prefix + "aug");
        if (const auto f = take(prefix + "test")) c.test = load_embeddings(dir / *f);
        if (const auto f = take(prefix + "scores")) c.scores = load_scores(dir / *f, run.test.size());
        run.candidates.push_back(std::move(c));
    }
    if (!entries.empty())
        throw ValidationError(manifest_path.string() + ": unknown key '" +
                              entries.begin()->first + "'");

    std::stable_sort(run.candidates.begin(), run.candidates.end(),
                     [](const CandidateModel& a, const CandidateModel& b) {
                         return a.hp_value < b.hp_value;
                     });
    validate_run(run);
    return run;
}

// ---------------------------------------------------------------------------
// Fixture tables: whitespace-separated, method header row, one row per task.
// ---------------------------------------------------------------------------

inline EvaluationTable load_fixture_table(const std::filesystem::path& path) {
    std::ifstream in = detail::open_input(path);
    std::string line;
    if (!std::getline(in, line))
        throw ValidationError(path.string() + ": empty fixture file");
    EvaluationTable table;
    {
        std::stringstream ss(line);
        std::string tok;
        ss >> tok; // corner label for the task column
        while (ss >> tok) table.methods.push_back(tok);
    }
    if (table.methods.empty())
        throw ValidationError(path.string() + ":1: header names no methods");
    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = detail::trim(line);
        if (t.empty()) continue;
        std::stringstream ss(t);
        std::string task;
        ss >> task;
        std::vector<double> row;
        std::string tok;
        while (ss >> tok)
            row.push_back(parse_double(tok, path.string() + ":" + std::to_string(line_no)));
        if (row.size() != table.methods.size())
            throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                                  std::to_string(table.methods.size()) + " values, got " +
                                  std::to_string(row.size()));
        table.tasks.push_back(task);
        rows.push_back(std::move(row));
    }
    if (table.tasks.empty()) throw ValidationError(path.string() + ": no task rows");
    table.auc.resize(table.methods.size() * table.tasks.size());
    for (std::size_t m = 0; m < table.methods.size(); ++m)
        for (std::size_t t = 0; t < table.tasks.size(); ++t)
            table.auc[m * table.tasks.size() + t] = rows[t][m];
    table.validate();
    return table;
}

} // namespace io

} // namespace dsv
