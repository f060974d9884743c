// Command-line front end: run, sweep, report, confusion, import-dataset,
// gen-dataset.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime failure.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "jh/app.hpp"
#include "jh/dataset_import.hpp"
#include "jh/errors.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

void print_run(const jh::RunResult& r) {
    std::cout << "run directory: " << r.directory << "\n"
              << "executed: " << r.executed << ", skipped: " << r.skipped << ", errors: " << r.errors
              << ", http attempts: " << r.http_attempts << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Jekyll & Hyde persona/neutral ensemble harness"};
    app.require_subcommand(1);

    std::string config_path;
    std::string method;
    std::vector<std::string> datasets;
    std::string output_dir;
    std::string cassette_mode;
    std::string cassette_path;

    auto* run = app.add_subcommand("run", "Run a method over the configured datasets (resumable)");
    run->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    run->add_option("--method", method, "Override the method");
    run->add_option("--dataset", datasets, "Override the dataset list (repeatable)");
    run->add_option("--output", output_dir, "Override the output directory");
    run->add_option("--cassette-mode", cassette_mode, "replay | record | passthrough");
    run->add_option("--cassette", cassette_path, "Cassette file");

    std::string sweep_param;
    std::string sweep_values;
    auto* sweep = app.add_subcommand("sweep", "One run per value of k or tau");
    sweep->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--param", sweep_param, "k | tau")->required();
    sweep->add_option("--values", sweep_values, "Comma-separated values")->required();
    sweep->add_option("--dataset", datasets, "Override the dataset list (repeatable)");
    sweep->add_option("--output", output_dir, "Override the output directory");
    sweep->add_option("--cassette-mode", cassette_mode, "replay | record | passthrough");
    sweep->add_option("--cassette", cassette_path, "Cassette file");

    std::vector<std::string> report_dirs;
    bool report_json = false;
    std::string csv_dir;
    auto* report = app.add_subcommand("report", "Accuracy, confusion and win-rate tables");
    report->add_option("dirs", report_dirs, "Run directories")->required();
    report->add_flag("--json", report_json, "Emit JSON instead of text tables");
    report->add_option("--csv", csv_dir, "Also write per-(model, dataset, method) CSV files here");

    std::string dir_a;
    std::string dir_b;
    auto* confusion = app.add_subcommand("confusion", "Confusion matrix between two runs");
    confusion->add_option("dir_a", dir_a, "Rows (e.g. the neutral run)")->required();
    confusion->add_option("dir_b", dir_b, "Columns (e.g. the persona run)")->required();

    std::string import_name;
    std::string import_src;
    std::string import_dst;
    auto* import = app.add_subcommand("import-dataset", "Convert an upstream dataset file to JSONL");
    import->add_option("name", import_name, "Dataset id")->required();
    import->add_option("src", import_src, "Upstream file")->required()->check(CLI::ExistingFile);
    import->add_option("dst", import_dst, "Normalized JSONL output")->required();

    std::string gen_name;
    std::string gen_dst;
    std::size_t gen_n = 500;
    std::uint64_t gen_seed = 0;
    auto* gen = app.add_subcommand("gen-dataset", "Generate coin_flip or last_letters");
    gen->add_option("name", gen_name, "coin_flip | last_letters")
        ->required()
        ->check(CLI::IsMember({"coin_flip", "last_letters"}));
    gen->add_option("dst", gen_dst, "Normalized JSONL output")->required();
    gen->add_option("--n", gen_n, "Number of questions")->capture_default_str();
    gen->add_option("--seed", gen_seed, "Generator seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    auto load_overridden = [&]() {
        auto config = jh::load_config(config_path);
        if (!method.empty()) config.method = jh::method_from_string(method);
        if (!datasets.empty()) config.datasets = datasets;
        if (!output_dir.empty()) config.output_dir = output_dir;
        if (!cassette_mode.empty()) config.cassette_mode = jh::cassette_mode_from_string(cassette_mode);
        if (!cassette_path.empty()) config.cassette_path = cassette_path;
        config.validate();
        return config;
    };

    try {
        if (*run) {
            print_run(jh::run(load_overridden()));
        } else if (*sweep) {
            const auto param = jh::sweep_param_from_string(sweep_param);
            const auto values = jh::parse_sweep_values(param, sweep_values);
            std::cout << jh::format_sweep(param, jh::sweep(load_overridden(), param, values));
        } else if (*report) {
            std::cout << jh::report(report_dirs, {report_json, csv_dir});
        } else if (*confusion) {
            std::cout << jh::confusion_report(dir_a, dir_b);
        } else if (*import) {
            const auto n = jh::import_dataset(import_name, import_src, import_dst);
            std::cout << "wrote " << n << " records to " << import_dst << "\n";
        } else if (*gen) {
            const auto records = gen_name == "coin_flip" ? jh::gen_coin_flip(gen_n, gen_seed)
                                                         : jh::gen_last_letters(gen_n, gen_seed);
            jh::save(records, gen_dst);
            std::cout << "wrote " << records.size() << " records to " << gen_dst << "\n";
        }
    } catch (const jh::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const jh::UnknownDataset& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
