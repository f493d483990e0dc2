#include "edlab/error.hpp"
#include "edlab/experiments.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace edlab;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in{p, std::ios::binary};
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("edlab_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

const Verdict* find(const RunArtifacts& run, const std::string& id) {
    for (const auto& v : run.verdicts) {
        if (v.id == id) return &v;
    }
    return nullptr;
}

ExperimentConfig small_ensemble(std::uint64_t seed) {
    ExperimentConfig c = default_config(ExperimentKind::ensemble_consistency);
    c.walkers = 2000;
    c.t_final = 0.05;
    c.output_stride = 10;
    c.seed = seed;
    return c;
}

} // namespace

TEST_CASE("free_packet verdicts", "[experiments]") {
    const RunArtifacts run = run_experiment(default_config(ExperimentKind::free_packet));
    CHECK_FALSE(run.aborted);
    const Verdict* var = find(run, "free.var_x_final");
    REQUIRE(var != nullptr);
    CHECK(var->passed);
    CHECK(var->criterion == 6);
    CHECK(std::abs(var->measured - 2.0) < 1e-3);
    REQUIRE(find(run, "free.slack_schrodinger_final") != nullptr);
    CHECK(find(run, "free.slack_schrodinger_final")->passed);
    CHECK(run.passed());
    CHECK(run.moments.size() == 21);
    CHECK(run.moments.back().t == Catch::Approx(2.0));
}

TEST_CASE("hybrid_static verdicts", "[experiments]") {
    ExperimentConfig c = default_config(ExperimentKind::hybrid_static);
    c.walkers = 20000;
    const RunArtifacts run = run_experiment(c);
    CHECK(find(run, "hybrid.var_x_static")->passed);
    CHECK(find(run, "hybrid.paired_linear_var_x")->passed);
    CHECK(std::abs(find(run, "hybrid.paired_linear_var_x")->measured - 2.0) < 1e-3);
}

TEST_CASE("regraduation_check reports the density disagreement", "[experiments]") {
    const RunArtifacts run = run_experiment(default_config(ExperimentKind::regraduation_check));
    const Verdict* v = find(run, "regraduation.density_agreement");
    REQUIRE(v != nullptr);
    CHECK(v->criterion == 13);
    CHECK(find(run, "regraduation.map")->passed);
    CHECK(find(run, "regraduation.linear_delegation")->passed);
}

TEST_CASE("every experiment emits verdicts for its criteria", "[experiments]") {
    const std::vector<std::pair<ExperimentKind, std::vector<int>>> expected{
        {ExperimentKind::free_packet, {5, 6, 8, 9}},
        {ExperimentKind::harmonic, {8}},
        {ExperimentKind::drift_ur_scan, {7}},
        {ExperimentKind::ur_corpus, {1, 2, 3, 4, 5, 6}},
    };
    for (const auto& [kind, criteria] : expected) {
        const RunArtifacts run = run_experiment(default_config(kind));
        for (int c : criteria) {
            const bool present = std::any_of(run.verdicts.begin(), run.verdicts.end(), [&](const Verdict& v) { return v.criterion == c; });
            CHECK(present);
        }
        CHECK(run.passed());
    }
}

TEST_CASE("artifacts are written with the documented columns", "[artifacts]") {
    const RunArtifacts run = run_experiment(small_ensemble(1));
    const auto dir = scratch("columns");
    const auto paths = write_artifacts(run, dir);
    CHECK(std::filesystem::exists(dir / "summary.json"));
    const std::string moments = slurp(dir / "moments.csv");
    CHECK(moments.rfind("t,mean_x,var_x,mean_pd,mean_po,mean_pc,mean_pq,var_pd,var_po,var_pc,var_pq,cov_x_pd,cov_x_po,cov_x_pc,cov_x_pq\n", 0) == 0);
    CHECK(slurp(dir / "ur.csv").rfind("t,slack_osmotic,slack_drift,slack_schrodinger,slack_heisenberg,decomposition_residual\n", 0) == 0);
    CHECK(slurp(dir / "energy.csv").rfind("t,E\n", 0) == 0);
    CHECK(slurp(dir / "ensemble.csv").rfind("t,ks,tv,sample_mean,sample_var\n", 0) == 0);

    const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
    CHECK(summary["run_id"] == run.run_id);
    CHECK(summary["experiment"] == "ensemble_consistency");
    CHECK(summary["verdicts"].size() == run.verdicts.size());
    for (const auto& v : summary["verdicts"]) {
        CHECK(v.contains("id"));
        CHECK(v.contains("measured"));
    }
    CHECK(summary["config"]["run.walkers"] == "2000");
    std::filesystem::remove_all(dir);
}

TEST_CASE("reruns reproduce CSV bodies; seeds only change the ensemble", "[artifacts][determinism]") {
    const auto a = scratch("a"), b = scratch("b"), c = scratch("c");
    write_artifacts(run_experiment(small_ensemble(1)), a);
    ExperimentConfig threaded = small_ensemble(1);
    threaded.threads = 3;
    write_artifacts(run_experiment(threaded), b);
    write_artifacts(run_experiment(small_ensemble(2)), c);
    for (const char* f : {"moments.csv", "ur.csv", "energy.csv", "ensemble.csv", "fokker_planck.csv", "summary.json"}) {
        CHECK(slurp(a / f) == slurp(b / f));
    }
    for (const char* f : {"moments.csv", "ur.csv", "energy.csv", "fokker_planck.csv"}) CHECK(slurp(a / f) == slurp(c / f));
    CHECK(slurp(a / "ensemble.csv") != slurp(c / "ensemble.csv"));
    for (const auto& d : {a, b, c}) std::filesystem::remove_all(d);
}

TEST_CASE("invalid configs are rejected before running", "[experiments][errors]") {
    ExperimentConfig c = default_config(ExperimentKind::free_packet);
    c.n = 100;
    CHECK_THROWS_AS(run_experiment(c), ConfigError);
}
