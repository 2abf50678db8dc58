#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "dsv/io.hpp"
#include "dsv/report.hpp"
#include "dsv/synth.hpp"
#include "helpers.hpp"

namespace fs = std::filesystem;
using dsv::EmbeddingSet;
using dsv::SelectionRun;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("dsv_test_" + std::to_string(testutil::rng()()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

SelectionRun small_synth_run(std::uint64_t seed) {
    dsv::SynthConfig config;
    config.dim = 4;
    config.n_trn = 6;
    config.n_test_n = 3;
    config.n_test_a = 3;
    config.d_star = 5.0;
    config.hp_grid = {0.5, 1.7, 5.0};
    config.seed = seed;
    return dsv::generate_run(config);
}

} // namespace

TEST_CASE("embedding csv round trip is exact") {
    TempDir tmp;
    const EmbeddingSet set = testutil::to_set(testutil::random_mat(13, 5, 100.0));
    dsv::io::save_embeddings_csv(tmp.path / "e.csv", set);
    const EmbeddingSet loaded = dsv::io::load_embeddings(tmp.path / "e.csv");
    REQUIRE(loaded.size() == set.size());
    CHECK(loaded.flat() == set.flat());
}

TEST_CASE("embedding raw container round trip is exact") {
    TempDir tmp;
    const EmbeddingSet set = testutil::to_set(testutil::random_mat(9, 7, 1e9));
    dsv::io::save_embeddings_raw(tmp.path / "e.f64", set);
    const EmbeddingSet loaded = dsv::io::load_embeddings(tmp.path / "e.f64");
    CHECK(loaded.dim() == 7);
    CHECK(loaded.flat() == set.flat());
}

TEST_CASE("embedding file diagnostics name file and line") {
    TempDir tmp;
    {
        std::ofstream out(tmp.path / "ragged.csv");
        out << "1,2,3\n1,2\n";
    }
    CHECK_THROWS_WITH(dsv::io::load_embeddings(tmp.path / "ragged.csv"),
                      Catch::Matchers::ContainsSubstring("ragged.csv:2"));
    {
        std::ofstream out(tmp.path / "nan.csv");
        out << "1,2\nnan,4\n";
    }
    CHECK_THROWS_WITH(dsv::io::load_embeddings(tmp.path / "nan.csv"),
                      Catch::Matchers::ContainsSubstring("nan.csv:2"));
    {
        std::ofstream out(tmp.path / "junk.csv");
        out << "1,2\n3,x\n";
    }
    CHECK_THROWS_WITH(dsv::io::load_embeddings(tmp.path / "junk.csv"),
                      Catch::Matchers::ContainsSubstring("junk.csv:2"));
    CHECK_THROWS_AS(dsv::io::load_embeddings(tmp.path / "missing.csv"), dsv::ValidationError);
}

TEST_CASE("labels validation") {
    TempDir tmp;
    {
        std::ofstream out(tmp.path / "labels.txt");
        out << "0\n1\n2\n";
    }
    CHECK_THROWS_WITH(dsv::io::load_labels(tmp.path / "labels.txt", 3),
                      Catch::Matchers::ContainsSubstring("labels.txt:3"));
    {
        std::ofstream out(tmp.path / "short.txt");
        out << "0\n1\n";
    }
    CHECK_THROWS_WITH(dsv::io::load_labels(tmp.path / "short.txt", 3),
                      Catch::Matchers::ContainsSubstring("short.txt"));
}

TEST_CASE("run directory round trip preserves every vector") {
    for (bool binary : {false, true}) {
        TempDir tmp;
        const SelectionRun run = small_synth_run(binary ? 5 : 6);
        dsv::io::save_run(tmp.path / "run", run, binary);
        const SelectionRun loaded = dsv::io::load_run(tmp.path / "run");

        CHECK(loaded.task_id == run.task_id);
        CHECK(loaded.trn.flat() == run.trn.flat());
        CHECK(loaded.test.flat() == run.test.flat());
        REQUIRE(loaded.labels.has_value());
        CHECK(*loaded.labels == *run.labels);
        REQUIRE(loaded.candidates.size() == run.candidates.size());
        for (std::size_t i = 0; i < run.candidates.size(); ++i) {
            CHECK(loaded.candidates[i].hp_value == run.candidates[i].hp_value);
            CHECK(loaded.candidates[i].aug.flat() == run.candidates[i].aug.flat());
            REQUIRE(loaded.candidates[i].test.has_value());
            CHECK(loaded.candidates[i].test->flat() == run.candidates[i].test->flat());
        }
    }
}

TEST_CASE("candidates are ordered by ascending hp on load") {
    TempDir tmp;
    SelectionRun run = small_synth_run(8);
    std::swap(run.candidates[0], run.candidates[2]);
    dsv::io::save_run(tmp.path / "run", run);
    const SelectionRun loaded = dsv::io::load_run(tmp.path / "run");
    for (std::size_t i = 1; i < loaded.candidates.size(); ++i)
        CHECK(loaded.candidates[i].hp_value > loaded.candidates[i - 1].hp_value);
}

TEST_CASE("manifest validation failures carry the offending detail") {
    TempDir tmp;
    const SelectionRun run = small_synth_run(9);
    dsv::io::save_run(tmp.path / "run", run);

    SECTION("missing file") {
        fs::remove(tmp.path / "run" / "trn.csv");
        CHECK_THROWS_WITH(dsv::io::load_run(tmp.path / "run"),
                          Catch::Matchers::ContainsSubstring("trn.csv"));
    }
    SECTION("labels one line short") {
        std::ofstream out(tmp.path / "run" / "labels.txt");
        out << "0\n1\n";
        out.close();
        CHECK_THROWS_WITH(dsv::io::load_run(tmp.path / "run"),
                          Catch::Matchers::ContainsSubstring("labels.txt"));
    }
    SECTION("unknown manifest key") {
        std::ofstream out(tmp.path / "run" / dsv::io::kManifestName, std::ios::app);
        out << "mystery = value\n";
        out.close();
        CHECK_THROWS_WITH(dsv::io::load_run(tmp.path / "run"),
                          Catch::Matchers::ContainsSubstring("mystery"));
    }
    SECTION("dimension mismatch against the declared dim") {
        // rewrite the manifest with a wrong dim
        const fs::path manifest = tmp.path / "run" / dsv::io::kManifestName;
        std::ifstream in(manifest);
        std::string content((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
        in.close();
        const auto pos = content.find("dim = 4");
        REQUIRE(pos != std::string::npos);
        content.replace(pos, 7, "dim = 9");
        std::ofstream out(manifest);
        out << content;
        out.close();
        CHECK_THROWS_WITH(dsv::io::load_run(tmp.path / "run"),
                          Catch::Matchers::ContainsSubstring("dimension"));
    }
}

TEST_CASE("fixture table loading") {
    TempDir tmp;
    {
        std::ofstream out(tmp.path / "table.txt");
        out << "task avg dsv\n";
        out << "bottle 0.9 0.95\n";
        out << "cable 0.5 0.7\n";
    }
    const dsv::EvaluationTable table = dsv::io::load_fixture_table(tmp.path / "table.txt");
    CHECK(table.methods == std::vector<std::string>{"avg", "dsv"});
    CHECK(table.tasks == std::vector<std::string>{"bottle", "cable"});
    CHECK(table.at(1, 0) == 0.95);
    CHECK(table.at(0, 1) == 0.5);

    {
        std::ofstream out(tmp.path / "empty.txt");
    }
    CHECK_THROWS_AS(dsv::io::load_fixture_table(tmp.path / "empty.txt"), dsv::ValidationError);
    {
        std::ofstream out(tmp.path / "ragged.txt");
        out << "task a b\nrow 0.5\n";
    }
    CHECK_THROWS_WITH(dsv::io::load_fixture_table(tmp.path / "ragged.txt"),
                      Catch::Matchers::ContainsSubstring("ragged.txt:2"));
}

TEST_CASE("number formatting round trips") {
    for (int i = 0; i < 500; ++i) {
        const double x = testutil::uniform(-1e6, 1e6) * std::pow(10.0, testutil::uniform(-12, 12));
        CHECK(dsv::io::parse_double(dsv::io::format_double(x), "t") == x);
        CHECK(dsv::io::parse_double(dsv::io::format_double_17(x), "t") == x);
    }
}

TEST_CASE("report json validation and rendering") {
    const SelectionRun run = small_synth_run(10);
    const dsv::RunReport result = dsv::run_selection(run, {}, 7);
    const dsv::OrderedJson j = dsv::report::selection_report(result);
    CHECK_NOTHROW(dsv::report::validate_report(j));
    const std::string text = dsv::report::render_text(j);
    CHECK(text.find("dsv") != std::string::npos);
    CHECK(text.find("l_val") != std::string::npos);

    dsv::OrderedJson broken = j;
    broken.erase("candidates");
    CHECK_THROWS_AS(dsv::report::validate_report(broken), dsv::ValidationError);

    TempDir tmp;
    dsv::report::write_json(tmp.path / "r.json", j);
    const dsv::OrderedJson back = dsv::report::read_json(tmp.path / "r.json");
    CHECK(back == j);
}
