#pragma once

// Named experiment runs: configuration, execution, verdicts and artifact files.

#include "edlab/grid_state.hpp"
#include "edlab/stats.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace edlab {

enum class ExperimentKind {
    free_packet,
    harmonic,
    hybrid_static,
    ensemble_consistency,
    classical_limit_scan,
    regraduation_check,
    drift_ur_scan,
    ur_corpus,
};

std::string_view experiment_name(ExperimentKind kind);
std::optional<ExperimentKind> experiment_from_name(std::string_view name);

/// Every value an experiment may read. Keys that an experiment does not read are rejected by
/// parse_config, so a field only matters for the experiments that list its key.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::free_packet;

    // [grid]
    std::size_t n = 1024;
    double x_min = -20.0;
    double x_max = 20.0;

    // [physics]
    PhysicalParams params;
    double sigma0 = 1.0;
    double x0 = 0.0;
    double p0 = 0.0;
    double omega = 1.0;
    double kappa = 2.0;
    double curvature = 1.0;
    std::vector<double> hbar_scan{1.0, 0.1, 0.01};
    std::vector<double> sigmas{1.0, 0.5, 0.25, 0.1, 0.05};

    // [run]
    double dt = 1e-3;
    double t_final = 2.0;
    std::size_t output_stride = 100;
    std::size_t walkers = 100000;
    std::uint64_t seed = 1;
    std::size_t corpus_size = 50;
    std::uint64_t corpus_seed = 20240611;

    /// Worker threads for the sampler and the corpus loop; 0 picks the hardware count.
    /// Results do not depend on it, so it is not part of the echo.
    unsigned threads = 0;
};

/// Defaults for one experiment, including its per-experiment overrides (t_final, μ, grid).
ExperimentConfig default_config(ExperimentKind kind);

/// Fully qualified keys ("section.key") that the experiment reads, in echo order.
const std::vector<std::string>& experiment_keys(ExperimentKind kind);

/// One-line description used by `edlab list`.
std::string_view experiment_summary(ExperimentKind kind);

/// Parses the sectioned `key = value` format. `#` and `;` start comments; lists are comma
/// separated, optionally in brackets. Throws ConfigError naming the key path for unknown
/// sections, unknown or inapplicable keys, duplicate keys, malformed or out-of-range values.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Range checks plus a dry construction of the initial states and the time-step bound.
/// Throws ConfigError.
void check_config(const ExperimentConfig& config);

/// Resolved values of every key the experiment reads, formatted for reproducible echo.
std::vector<std::pair<std::string, std::string>> config_echo(const ExperimentConfig& config);

struct Verdict {
    std::string id;
    int criterion = 0; ///< acceptance criterion number, 0 for supporting checks
    std::string description;
    bool passed = false;
    double measured = 0.0;
    std::string relation; ///< "<", "<=", ">", ">=", "within"
    double threshold = 0.0;
    double target = 0.0;  ///< reference value for "within" checks
};

struct Diagnostic {
    std::string id;
    std::string description;
    double value = 0.0;
};

struct EnergySample {
    double t = 0.0;
    double E = 0.0;
};

struct EnsembleSample {
    double t = 0.0;
    double ks = 0.0;
    double tv = 0.0;
    double sample_mean = 0.0;
    double sample_var = 0.0;
};

/// Extra tabular output, written as <name>.csv.
struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

struct RunArtifacts {
    std::string run_id;
    ExperimentKind kind = ExperimentKind::free_packet;
    std::vector<std::pair<std::string, std::string>> config;
    std::vector<MomentReport> moments;
    std::vector<URReport> uncertainty;
    std::vector<EnergySample> energy;
    std::vector<EnsembleSample> ensemble;
    std::vector<Table> tables;
    std::vector<Verdict> verdicts;
    std::vector<Diagnostic> diagnostics;
    std::uint64_t excised_walker_steps = 0;
    bool aborted = false;
    std::string abort_message;

    bool passed() const;
};

/// Runs the experiment. A NumericAbort during the run is caught: the artifacts collected so
/// far are returned with `aborted` set. Configuration problems throw ConfigError.
RunArtifacts run_experiment(const ExperimentConfig& config);

/// Writes summary.json, moments.csv, ur.csv, energy.csv, ensemble.csv (sampler experiments)
/// and one CSV per extra table into out_dir, creating it if needed. Returns the paths.
std::vector<std::filesystem::path> write_artifacts(const RunArtifacts& run, const std::filesystem::path& out_dir);

} // namespace edlab
