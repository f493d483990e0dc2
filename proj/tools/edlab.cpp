#include "edlab/error.hpp"
#include "edlab/experiments.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

enum Exit { kPass = 0, kCheckFailure = 1, kConfigError = 2, kNumericAbort = 3 };

void print_verdicts(const edlab::RunArtifacts& run) {
    for (const auto& v : run.verdicts) {
        char line[512];
        if (v.relation == "within") {
            std::snprintf(line, sizeof line, "%s %-40s measured=%.6e target=%.6e tol=%.1e", v.passed ? "PASS" : "FAIL",
                          v.id.c_str(), v.measured, v.target, v.threshold);
        } else {
            std::snprintf(line, sizeof line, "%s %-40s measured=%.6e %s %.1e", v.passed ? "PASS" : "FAIL", v.id.c_str(),
                          v.measured, v.relation.c_str(), v.threshold);
        }
        std::cout << line;
        if (v.criterion > 0) std::cout << "  [criterion " << v.criterion << "]";
        std::cout << '\n';
    }
    for (const auto& d : run.diagnostics) {
        char line[512];
        std::snprintf(line, sizeof line, "NOTE %-40s value=%.6e", d.id.c_str(), d.value);
        std::cout << line << '\n';
    }
}

int run_command(const std::string& path, std::optional<std::uint64_t> seed, std::optional<std::string> out,
                unsigned threads) {
    edlab::ExperimentConfig config = edlab::load_config(path);
    if (seed) config.seed = *seed;
    config.threads = threads;
    const edlab::RunArtifacts run = edlab::run_experiment(config);
    const std::filesystem::path dir = out ? std::filesystem::path{*out} : std::filesystem::path{"runs"} / run.run_id;
    const auto paths = edlab::write_artifacts(run, dir);

    std::cout << "run " << run.run_id << '\n';
    print_verdicts(run);
    std::cout << "artifacts: " << dir.string() << " (" << paths.size() << " files)\n";
    if (run.aborted) {
        std::cerr << "numeric abort: " << run.abort_message << '\n';
        return kNumericAbort;
    }
    return run.passed() ? kPass : kCheckFailure;
}

int list_command() {
    for (int k = 0; k < 8; ++k) {
        const auto kind = static_cast<edlab::ExperimentKind>(k);
        std::cout << edlab::experiment_name(kind) << "\n  " << edlab::experiment_summary(kind) << "\n  keys:";
        for (const auto& key : edlab::experiment_keys(kind)) std::cout << ' ' << key;
        std::cout << '\n';
    }
    return kPass;
}

int check_command(const std::string& path) {
    const edlab::ExperimentConfig config = edlab::load_config(path);
    edlab::check_config(config);
    for (const auto& [key, value] : edlab::config_echo(config)) std::cout << key << " = " << value << '\n';
    std::cout << "ok\n";
    return kPass;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"edlab: entropic-dynamics experiments on a periodic grid"};
    app.require_subcommand(1);

    std::string run_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    unsigned threads = 0;
    auto* run = app.add_subcommand("run", "run an experiment and write its artifacts");
    run->add_option("config", run_path, "config file")->required();
    run->add_option("--seed", seed, "override run.seed");
    run->add_option("--out", out, "output directory (default runs/<run_id>)");
    run->add_option("--threads", threads, "worker threads, 0 = hardware count");

    auto* list = app.add_subcommand("list", "list experiments and the keys they read");

    std::string check_path;
    auto* check = app.add_subcommand("check", "validate a config file without running it");
    check->add_option("config", check_path, "config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kConfigError;
    }

    try {
        if (*run) return run_command(run_path, seed, out, threads);
        if (*list) return list_command();
        if (*check) return check_command(check_path);
    } catch (const edlab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const edlab::NumericAbort& e) {
        std::cerr << "numeric abort: " << e.what() << '\n';
        return kNumericAbort;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kCheckFailure;
    }
    return kPass;
}
