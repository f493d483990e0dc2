#include "edlab/error.hpp"
#include "edlab/experiments.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <string>

using namespace edlab;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::StartsWith;

namespace {

std::string error_of(std::string_view text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("minimal free_packet stanza uses defaults", "[config]") {
    const ExperimentConfig c = parse_config("[experiment]\nname = free_packet\n");
    CHECK(c.kind == ExperimentKind::free_packet);
    CHECK(c.n == 1024);
    CHECK(c.x_min == -20.0);
    CHECK(c.x_max == 20.0);
    CHECK(c.dt == 1e-3);
    CHECK(c.params.hbar == 1.0);
    CHECK(c.params.m == 1.0);
    CHECK(c.params.mu == 1.0);
}

TEST_CASE("values, comments, lists and quoting", "[config]") {
    const ExperimentConfig c = parse_config(R"(
# comment
[experiment]
name = "classical_limit_scan"   ; trailing comment
[grid]
n = 2048
[physics]
hbar_scan = [0.5, 0.05 , 0.005]
m = 2
[run]
dt = 5e-4
t_final = 0.5
walkers = 1000
seed = 7
)");
    CHECK(c.kind == ExperimentKind::classical_limit_scan);
    CHECK(c.n == 2048);
    CHECK(c.hbar_scan == std::vector<double>{0.5, 0.05, 0.005});
    CHECK(c.params.m == 2.0);
    CHECK(c.walkers == 1000);
    CHECK(c.seed == 7);
}

TEST_CASE("mu defaults to m for the linear experiments", "[config]") {
    CHECK(parse_config("[experiment]\nname = harmonic\n[physics]\nm = 3\n").params.mu == 3.0);
    CHECK(parse_config("[experiment]\nname = free_packet\n[physics]\nm = 2\nmu = 0\n").params.mu == 0.0);
    CHECK(parse_config("[experiment]\nname = hybrid_static\n").params.mu == 0.0);
    CHECK(parse_config("[experiment]\nname = regraduation_check\n").params.mu == 0.25);
}

TEST_CASE("range errors name the key", "[config][errors]") {
    CHECK_THAT(error_of("[experiment]\nname = free_packet\n[physics]\nmu = -1\n"), StartsWith("physics.mu"));
    CHECK_THAT(error_of("[experiment]\nname = free_packet\n[grid]\nn = 100\n"), StartsWith("grid.n"));
    CHECK_THAT(error_of("[experiment]\nname = free_packet\n[run]\ndt = 0\n"), StartsWith("run.dt"));
    CHECK_THAT(error_of("[experiment]\nname = free_packet\n[run]\nt_final = 0.0015\n"), StartsWith("run.t_final"));
    CHECK_THAT(error_of("[experiment]\nname = free_packet\n[physics]\nsigma0 = abc\n"), StartsWith("physics.sigma0"));
    CHECK_THAT(error_of("[experiment]\nname = free_packet\n[physics]\nsigma0 = inf\n"), StartsWith("physics.sigma0"));
    CHECK_THAT(error_of("[experiment]\nname = ensemble_consistency\n[run]\nwalkers = -5\n"), StartsWith("run.walkers"));
    CHECK_THAT(error_of("[experiment]\nname = classical_limit_scan\n[physics]\nhbar_scan = 1\n"),
               StartsWith("physics.hbar_scan"));
    CHECK_THAT(error_of("[experiment]\nname = classical_limit_scan\n[physics]\nhbar_scan = 1, 1\n"),
               StartsWith("physics.hbar_scan"));
}

TEST_CASE("structural errors", "[config][errors]") {
    CHECK_THAT(error_of("[experiment]\nname = free_packet\n[run]\ndt = 1e-3\ndt = 2e-3\n"),
               StartsWith("run.dt") && ContainsSubstring("duplicate"));
    CHECK_THAT(error_of("[experiment]\nname = free_packet\n[physics]\nspin = 1\n"),
               StartsWith("physics.spin") && ContainsSubstring("unknown key"));
    CHECK_THAT(error_of("[experiment]\nname = free_packet\n[run]\nwalkers = 10\n"),
               StartsWith("run.walkers") && ContainsSubstring("not used"));
    CHECK_THAT(error_of("[experiment]\nname = warp_drive\n"), StartsWith("experiment.name"));
    CHECK_THAT(error_of("[grid]\nn = 64\n"), StartsWith("experiment.name"));
    CHECK_THAT(error_of("[experiment]\nname = free_packet\n[output]\n"), ContainsSubstring("unknown section"));
    CHECK_THAT(error_of("name = free_packet\n"), ContainsSubstring("outside"));
    CHECK_THAT(error_of("[experiment]\nname free_packet\n"), StartsWith("line 2"));
    CHECK_THROWS_AS(load_config("/nonexistent/cfg.ini"), ConfigError);
}

TEST_CASE("echo round trips through the parser", "[config]") {
    for (int k = 0; k < 8; ++k) {
        const auto kind = static_cast<ExperimentKind>(k);
        ExperimentConfig c = default_config(kind);
        std::string text = "[experiment]\nname = " + std::string{experiment_name(kind)} + "\n";
        std::string section;
        for (const auto& [key, value] : config_echo(c)) {
            if (key == "experiment.name") continue;
            const auto dot = key.find('.');
            if (key.substr(0, dot) != section) {
                section = key.substr(0, dot);
                text += "[" + section + "]\n";
            }
            text += key.substr(dot + 1) + " = " + value + "\n";
        }
        const ExperimentConfig back = parse_config(text);
        CHECK(config_echo(back) == config_echo(c));
        CHECK(experiment_from_name(experiment_name(kind)) == kind);
        CHECK(experiment_keys(kind).front() == "experiment.name");
    }
}

TEST_CASE("check_config catches problems beyond plain ranges", "[config][errors]") {
    CHECK_NOTHROW(check_config(default_config(ExperimentKind::free_packet)));
    ExperimentConfig wide = default_config(ExperimentKind::free_packet);
    wide.sigma0 = 5.0;
    CHECK_THROWS_AS(check_config(wide), ConfigError);
    ExperimentConfig coarse = default_config(ExperimentKind::drift_ur_scan);
    coarse.n = 1024;
    CHECK_THAT([&] {
        try {
            check_config(coarse);
        } catch (const ConfigError& e) {
            return std::string{e.what()};
        }
        return std::string{};
    }(), StartsWith("physics.sigmas"));
    ExperimentConfig collapse = parse_config("[experiment]\nname = harmonic\n[physics]\nmu = 0\n[run]\nt_final = 2\n");
    CHECK_THROWS_AS(check_config(collapse), ConfigError);
    ExperimentConfig big_step = default_config(ExperimentKind::free_packet);
    big_step.dt = 0.5;
    CHECK_THROWS_AS(check_config(big_step), ConfigError);
}
