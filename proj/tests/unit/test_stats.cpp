#include "edlab/error.hpp"
#include "edlab/oracles.hpp"
#include "edlab/stats.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace edlab;
using Catch::Matchers::WithinAbs;

namespace {

const Grid1D kGrid = make_grid(1024, -20.0, 20.0);

WaveState packet_at(double t, double p0 = 0.0) {
    return oracles::gaussian_packet(1.0, 0.0, p0, t, kGrid, PhysicalParams{}).state;
}

std::vector<WaveState> corpus_with_oracles() {
    const PhysicalParams p{};
    auto states = random_state_corpus(kGrid, p, 50, 20240611);
    states.push_back(packet_at(0.0));
    states.push_back(packet_at(2.0));
    states.push_back(oracles::gaussian_packet(0.5, -3.0, -2.0, 0.5, kGrid, p).state);
    states.push_back(oracles::harmonic_ground(1.0, kGrid, p).state);
    states.push_back(oracles::harmonic_ground(2.0, kGrid, p).state);
    return states;
}

} // namespace

TEST_CASE("rho_expectation examples", "[stats]") {
    const Field rho = packet_at(0.0).density();
    const Field x = kGrid.coordinates();
    CHECK_THAT(rho_expectation(kGrid, Field(kGrid.n(), 3.0), rho), WithinAbs(3.0, 1e-13));
    CHECK(std::abs(rho_expectation(kGrid, x, rho)) < 1e-14);
    Field x2(kGrid.n());
    for (std::size_t j = 0; j < kGrid.n(); ++j) x2[j] = x[j] * x[j];
    CHECK_THAT(rho_expectation(kGrid, x2, rho), WithinAbs(1.0, 1e-10));
    CHECK_THROWS_AS(rho_expectation(kGrid, Field(3, 0.0), rho), ContractError);
}

TEST_CASE("moments of the free packet at t = 2", "[stats]") {
    const MomentReport m = momentum_moments(packet_at(2.0));
    CHECK_THAT(m.var_pq, WithinAbs(0.25, 1e-10));
    CHECK_THAT(m.var_po, WithinAbs(0.125, 1e-10));
    CHECK_THAT(m.var_pc, WithinAbs(0.125, 1e-10));
    CHECK_THAT(m.var_x, WithinAbs(2.0, 1e-10));
    CHECK_THAT(m.t, WithinAbs(2.0, 0.0));
}

TEST_CASE("covariance examples", "[stats]") {
    CHECK_THAT(covariance_x_p(packet_at(0.7, 0.4), Momentum::osmotic), WithinAbs(0.5, 1e-9));
    CHECK(std::abs(covariance_x_p(packet_at(0.0), Momentum::quantum)) < 1e-12);
    CHECK_THAT(covariance_x_p(packet_at(2.0), Momentum::quantum), WithinAbs(0.5, 1e-10));
    CHECK_THAT(covariance_x_p(packet_at(2.0), Momentum::current), WithinAbs(0.5, 1e-10));
}

TEST_CASE("uncertainty report examples", "[stats]") {
    for (double t : {0.0, 0.5, 2.0}) {
        const URReport u = uncertainty_report(packet_at(t));
        CHECK(std::abs(u.slack_osmotic) < 1e-6);
        CHECK(u.osmotic_saturated);
        CHECK(std::abs(u.slack_schrodinger) < 1e-6);
    }
    const URReport g = uncertainty_report(oracles::harmonic_ground(1.0, kGrid, PhysicalParams{}).state);
    CHECK(std::abs(g.slack_heisenberg) < 1e-6);
    CHECK(std::abs(g.slack_schrodinger) < 1e-6);
    CHECK(g.heisenberg_saturated);
}

TEST_CASE("drift covariance scan", "[stats][drift]") {
    const Grid1D fine = make_grid(4096, -20.0, 20.0);
    const std::vector<double> sigmas{1.0, 0.1, 0.05};
    const auto rows = drift_cov_scan(sigmas, 1.0, fine, PhysicalParams{});
    CHECK_THAT(rows[0].cov_x_pd, WithinAbs(1.0, 1e-8));
    CHECK_THAT(rows[1].cov_x_pd, WithinAbs(0.01, 1e-8));
    CHECK_THAT(rows[2].cov_x_pd / rows[0].cov_x_pd, WithinAbs(2.5e-3, 1e-5));
    for (const auto& r : rows) CHECK(r.slack_drift >= -1e-9);

    for (const auto& r : drift_cov_scan(sigmas, 0.0, fine, PhysicalParams{})) CHECK(std::abs(r.cov_x_pd) < 1e-15);
    const std::vector<double> narrow{0.05};
    CHECK_THROWS_AS(drift_cov_scan(narrow, 1.0, kGrid, PhysicalParams{}), ContractError);
}

TEST_CASE("state-independent identities over the corpus", "[stats][property]") {
    for (const auto& s : corpus_with_oracles()) {
        const MomentReport m = momentum_moments(s);
        const URReport u = uncertainty_report(m, s.params.hbar);
        CHECK(std::abs(m.mean_po) < 1e-9);
        CHECK(std::abs(m.mean_pq - m.mean_pc) < 1e-9);
        CHECK(std::abs(m.mean_pq - m.mean_pd) < 1e-9);
        CHECK(std::abs(m.cov_x_po - 0.5) < 1e-9);
        CHECK(std::abs(u.decomposition_residual) / m.var_pq < 1e-8);
        CHECK(u.slack_osmotic >= -1e-9);
        CHECK(u.slack_schrodinger >= -1e-9);
        CHECK(u.slack_heisenberg >= -1e-9);
        CHECK(u.slack_drift >= -1e-9);
        CHECK(u.slack_schrodinger <= u.slack_heisenberg);
        CHECK(m.var_x * m.var_pd - m.cov_x_pd * m.cov_x_pd >= -1e-12);
        CHECK(m.var_x * m.var_po - m.cov_x_po * m.cov_x_po >= -1e-12);
        CHECK(m.var_x * m.var_pc - m.cov_x_pc * m.cov_x_pc >= -1e-12);
        CHECK(std::abs(m.cov_x_pq - m.cov_x_pc) < 1e-9);
        CHECK(m.var_pd >= -1e-12);
        CHECK(m.var_po >= -1e-12);
        CHECK(m.var_pc >= -1e-12);
    }
}

TEST_CASE("corpus is deterministic and well formed", "[stats][corpus]") {
    const auto a = random_state_corpus(kGrid, PhysicalParams{}, 10, 5);
    const auto b = random_state_corpus(kGrid, PhysicalParams{}, 10, 5);
    const auto c = random_state_corpus(kGrid, PhysicalParams{}, 10, 6);
    REQUIRE(a.size() == 10);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].psi == b[i].psi);
        CHECK_THAT(a[i].norm(), WithinAbs(1.0, 1e-12));
        CHECK_NOTHROW(check_boundary_negligible(a[i]));
    }
    CHECK(a[0].psi != c[0].psi);
}

TEST_CASE("osmotic covariance scales with hbar", "[stats][property]") {
    const PhysicalParams p{0.3, 2.0, 2.0};
    for (const auto& s : random_state_corpus(kGrid, p, 5, 77)) {
        CHECK_THAT(covariance_x_p(s, Momentum::osmotic), WithinAbs(0.15, 1e-9));
    }
}
