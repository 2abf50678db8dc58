// Command-line surface: selection over run directories, fixture evaluation,
// bound and identity certification, synthetic run generation, and report rendering.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dsv/harness.hpp"
#include "dsv/io.hpp"
#include "dsv/report.hpp"
#include "dsv/synth.hpp"
#include "dsv/theory.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitUsage = 64;

std::vector<std::string> split_methods(const std::string& list) {
    std::vector<std::string> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

void emit(const dsv::OrderedJson& report, const std::string& out_path, bool also_text = true) {
    if (!out_path.empty()) dsv::report::write_json(out_path, report);
    if (also_text)
        std::cout << dsv::report::render_text(report);
    else
        std::cout << report.dump(2) << '\n';
}

dsv::SynthConfig load_synth_config(const std::string& path) {
    dsv::SynthConfig config;
    if (path.empty()) return config;
    const dsv::OrderedJson j = dsv::report::read_json(path);
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "dim") config.dim = value.get<std::size_t>();
            else if (key == "n_trn") config.n_trn = value.get<std::size_t>();
            else if (key == "n_test_n") config.n_test_n = value.get<std::size_t>();
            else if (key == "n_test_a") config.n_test_a = value.get<std::size_t>();
            else if (key == "sigma") config.sigma = value.get<double>();
            else if (key == "epsilon_shift") config.epsilon_shift = value.get<double>();
            else if (key == "d_star") config.d_star = value.get<double>();
            else if (key == "alignment_width") config.alignment_width = value.get<double>();
            else if (key == "ortho_noise") config.ortho_noise = value.get<double>();
            else if (key == "hp_grid") config.hp_grid = value.get<std::vector<double>>();
            else if (key == "seed") config.seed = value.get<std::uint64_t>();
            else throw dsv::ValidationError("unknown synth config key '" + key + "'");
        } catch (const nlohmann::json::exception& e) {
            throw dsv::ValidationError("bad synth config value for '" + key + "': " + e.what());
        }
    }
    // hp_grid defaults follow d_star unless the file pinned a grid itself
    if (!j.contains("hp_grid") && j.contains("d_star"))
        config.hp_grid = dsv::default_hp_grid(config.d_star);
    return config;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unsupervised selection of augmentation candidates by validation loss"};
    app.require_subcommand(1);

    // select
    auto* select = app.add_subcommand("select", "Rank candidates in a run directory");
    std::string select_run_dir, select_methods, select_out, select_clamp = "max";
    std::uint64_t select_seed = 0;
    std::size_t select_components = 1;
    select->add_option("--run", select_run_dir, "Run directory")->required();
    select->add_option("--methods", select_methods, "Comma-separated selector subset");
    select->add_option("--seed", select_seed, "Seed for the random selector");
    select->add_option("--out", select_out, "Write the JSON report here");
    select->add_option("--sep-clamp", select_clamp, "Clamp variant: max (default) or min")
        ->check(CLI::IsMember({"max", "min"}));
    select->add_option("--components", select_components, "Gaussian mixture components for scoring");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Aggregate fixture AUC tables");
    std::string eval_fixtures, eval_out;
    bool eval_per_aug = false;
    evaluate->add_option("--fixtures", eval_fixtures, "Directory with fixture tables")->required();
    evaluate->add_flag("--per-aug", eval_per_aug, "Also run the significance test per augmentation");
    evaluate->add_option("--out", eval_out, "Write the JSON report here");

    // verify
    auto* verify = app.add_subcommand("verify", "Certify the bounds and identities numerically");
    std::size_t verify_instances = 1000;
    std::uint64_t verify_seed = 20240613;
    std::string verify_out;
    verify->add_option("--instances", verify_instances, "Instance count for the bound sweep");
    verify->add_option("--seed", verify_seed, "Sweep seed");
    verify->add_option("--out", verify_out, "Write the JSON report here");

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic run directory");
    std::string synth_config_path, synth_out_dir;
    std::uint64_t synth_seed = 0;
    bool synth_seed_given = false, synth_binary = false;
    synth->add_option("--config", synth_config_path, "JSON config; defaults when omitted");
    synth->add_option("--out", synth_out_dir, "Output run directory")->required();
    synth->add_option("--seed", synth_seed, "Override the config seed")
        ->each([&](const std::string&) { synth_seed_given = true; });
    synth->add_flag("--binary", synth_binary, "Write raw float64 embedding files");

    // report
    auto* render = app.add_subcommand("report", "Render a stored report");
    std::string report_in, report_format = "text";
    render->add_option("--in", report_in, "Report file")->required();
    render->add_option("--format", report_format, "json or text")
        ->check(CLI::IsMember({"json", "text"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) { // --help
            app.exit(e);
            return kExitOk;
        }
        std::cerr << e.what() << "\n\n" << app.help() << std::flush;
        return kExitUsage;
    }

    try {
        if (*select) {
            const dsv::SelectionRun run = dsv::io::load_run(select_run_dir);
            dsv::SelectionOptions options;
            options.clamp = select_clamp == "max" ? dsv::SepClamp::max_with_half
                                                  : dsv::SepClamp::min_with_half;
            options.scorer_components = select_components;
            const dsv::RunReport result =
                dsv::run_selection(run, split_methods(select_methods), select_seed, options);
            emit(dsv::report::selection_report(result), select_out);
            return kExitOk;
        }
        if (*evaluate) {
            const std::vector<std::string> augs = {"cutout", "cutavg", "cutdiff", "cutpaste"};
            std::vector<dsv::EvaluationTable> tables;
            for (const auto& aug : augs)
                tables.push_back(dsv::io::load_fixture_table(
                    std::filesystem::path(eval_fixtures) / (aug + ".txt")));
            emit(dsv::report::evaluation_report(augs, tables, eval_per_aug), eval_out);
            return kExitOk;
        }
        if (*verify) {
            const dsv::VerificationReport rep = dsv::run_verification(verify_instances, verify_seed);
            emit(dsv::report::verification_report(rep), verify_out);
            return rep.all_pass() ? kExitOk : kExitNumeric;
        }
        if (*synth) {
            dsv::SynthConfig config = load_synth_config(synth_config_path);
            if (synth_seed_given) config.seed = synth_seed;
            const dsv::SelectionRun run = dsv::generate_run(config);
            dsv::io::save_run(synth_out_dir, run, synth_binary);
            std::cout << "wrote run '" << run.task_id << "' with " << run.candidates.size()
                      << " candidates to " << synth_out_dir << "\n";
            return kExitOk;
        }
        if (*render) {
            const dsv::OrderedJson j = dsv::report::read_json(report_in);
            dsv::report::validate_report(j);
            if (report_format == "json")
                std::cout << j.dump(2) << '\n';
            else
                std::cout << dsv::report::render_text(j);
            return kExitOk;
        }
    } catch (const dsv::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const dsv::NumericError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumeric;
    }
    return kExitUsage;
}
