#include "edlab/error.hpp"
#include "edlab/evolve.hpp"
#include "edlab/oracles.hpp"
#include "edlab/stats.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace edlab;
using Catch::Matchers::WithinAbs;

namespace {

const Grid1D kGrid = make_grid(1024, -20.0, 20.0);

WaveState packet(double sigma0, double x0, double p0, const PhysicalParams& p = {}) {
    return oracles::gaussian_packet(sigma0, x0, p0, 0.0, kGrid, p).state;
}

template <class Step>
WaveState evolve(WaveState s, const Potential& V, double dt, std::size_t steps, Step step) {
    for (std::size_t i = 0; i < steps; ++i) s = step(s, V, dt);
    return s;
}

double max_diff(std::span<const double> a, std::span<const double> b) {
    double worst = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) worst = std::max(worst, std::abs(a[j] - b[j]));
    return worst;
}

} // namespace

TEST_CASE("potentials", "[potential]") {
    const Potential free = free_potential(kGrid);
    CHECK(free.v_samples.size() == kGrid.n());
    CHECK(*std::max_element(free.v_samples.begin(), free.v_samples.end()) == 0.0);
    const Potential h = harmonic_potential(kGrid, 2.0, 0.5);
    CHECK_THAT(h.v_samples[0], WithinAbs(0.5 * 2.0 * 0.25 * 400.0, 1e-12));
    CHECK_THROWS_AS(custom_potential(kGrid, Field(10, 0.0)), ContractError);
    Field bad(kGrid.n(), 0.0);
    bad[5] = std::nan("");
    CHECK_THROWS_AS(custom_potential(kGrid, bad), ContractError);
}

TEST_CASE("time-step validation", "[evolve][contract]") {
    const WaveState s = packet(1.0, 0.0, 0.0);
    CHECK_NOTHROW(validate(EvolveConfig{1e-3, 100}, s));
    CHECK_THROWS_AS(validate(EvolveConfig{0.0, 100}, s), ContractError);
    CHECK_THROWS_AS(validate(EvolveConfig{1e-3, 0}, s), ContractError);
    CHECK_THROWS_AS(validate(EvolveConfig{10.0, 1}, s), ContractError);
    CHECK(accuracy_dt_limit(s) > 1e-3);
}

TEST_CASE("free packet spreads to Var x = 2 at t = 2", "[schrodinger]") {
    const WaveState s = evolve(packet(1.0, 0.0, 0.0), free_potential(kGrid), 1e-3, 2000, step_schrodinger);
    CHECK_THAT(s.t, WithinAbs(2.0, 1e-12));
    CHECK_THAT(momentum_moments(s).var_x, WithinAbs(2.0, 1e-4));
    CHECK_THAT(s.norm(), WithinAbs(1.0, 1e-12));
}

TEST_CASE("harmonic ground state is stationary", "[schrodinger]") {
    // splitting error is O(dt^2): 5e-8 at dt = 1e-3, 3e-9 at dt = 2.5e-4
    const auto ground = oracles::harmonic_ground(1.0, kGrid, PhysicalParams{});
    const Potential V = harmonic_potential(kGrid, 1.0, 1.0);
    WaveState s = ground.state;
    const Field rho0 = s.density();
    double worst = 0.0;
    for (int i = 0; i < 4000; ++i) {
        s = step_schrodinger(s, V, 2.5e-4);
        if (i % 100 == 99) worst = std::max(worst, max_diff(s.density(), rho0));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("boosted packet moves at p0/m", "[schrodinger]") {
    const WaveState s = evolve(packet(1.0, 0.0, 1.0), free_potential(kGrid), 1e-3, 1000, step_schrodinger);
    CHECK_THAT(momentum_moments(s).mean_x, WithinAbs(1.0, 1e-6));
}

TEST_CASE("general-mu step with mu = m is the linear step", "[general_mu]") {
    const WaveState s0 = packet(1.0, -1.0, 0.5);
    const Potential V = harmonic_potential(kGrid, 1.0, 0.7);
    const WaveState a = evolve(s0, V, 1e-3, 50, step_general_mu);
    const WaveState b = evolve(s0, V, 1e-3, 50, step_schrodinger);
    for (std::size_t j = 0; j < kGrid.n(); ++j) CHECK(a.psi[j] == b.psi[j]);
    CHECK(osmotic_correction_coefficient(PhysicalParams{}) == 0.0);
    CHECK(osmotic_correction_coefficient(PhysicalParams{1.0, 1.0, 0.0}) == 0.5);
}

TEST_CASE("mu = 0 free Gaussian does not spread", "[general_mu]") {
    const PhysicalParams p{1.0, 1.0, 0.0};
    const WaveState s = evolve(packet(1.0, 0.0, 0.0, p), free_potential(kGrid), 1e-3, 2000, step_general_mu);
    CHECK_THAT(momentum_moments(s).var_x, WithinAbs(1.0, 1e-3));
}

TEST_CASE("mu = 0 harmonic ground-shaped density collapses and conserves energy", "[general_mu][energy]") {
    const PhysicalParams p{1.0, 1.0, 0.0};
    const auto ground = oracles::harmonic_ground(1.0, kGrid, p);
    const Potential V = harmonic_potential(kGrid, 1.0, 1.0);
    WaveState s = ground.state;
    const Field rho0 = s.density();
    const double e0 = energy(s, V, 0.0);
    double drift = 0.0;
    for (int i = 0; i < 1000; ++i) {
        s = step_general_mu(s, V, 1e-3);
        drift = std::max(drift, std::abs(energy(s, V, 0.0) - e0) / e0);
    }
    CHECK(max_diff(s.density(), rho0) > 1e-2);
    CHECK(drift < 1e-6);
    CHECK_THAT(momentum_moments(s).var_x, WithinAbs(0.5 * std::cos(1.0) * std::cos(1.0), 1e-6));
}

TEST_CASE("general-mu boosted packets stay bounded at small steps", "[general_mu]") {
    for (double mu : {0.0, 0.25, 0.5}) {
        const PhysicalParams p{1.0, 1.0, mu};
        WaveState s = packet(1.0, -3.0, 3.0, p);
        const Potential V = free_potential(kGrid);
        const double e0 = energy(s, V, mu);
        for (int i = 0; i < 2000; ++i) s = step_general_mu(s, V, 2.5e-4);
        CHECK(std::abs(energy(s, V, mu) - e0) / e0 < 1e-6);
    }
}

TEST_CASE("Fokker-Planck step examples", "[fokker_planck]") {
    const Grid1D g = make_grid(64, 0.0, 64.0);
    Field rho(64, 0.0);
    rho[10] = 0.5;
    rho[11] = 0.5;
    const Field still = step_fokker_planck(g, rho, Field(64, 0.0), 0.1);
    CHECK(still == rho);

    // upwind transport of 0.9 of a cell, wrapping across the boundary
    Field edge(64, 0.0);
    edge[63] = 1.0;
    const Field shifted = step_fokker_planck(g, edge, Field(64, 1.0), 0.9);
    CHECK_THAT(shifted[0], WithinAbs(0.9, 1e-15));
    CHECK_THAT(shifted[63], WithinAbs(0.1, 1e-15));

    CHECK_THROWS_AS(step_fokker_planck(g, rho, Field(64, 1.0), 1.0), NumericAbort);
}

TEST_CASE("Fokker-Planck co-stepping tracks |psi|^2", "[fokker_planck]") {
    WaveState s = packet(1.0, 0.0, 0.0);
    const Potential V = free_potential(kGrid);
    Field rho = s.density();
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        rho = step_fokker_planck(kGrid, rho, decompose(s).v, 1e-3);
        s = step_schrodinger(s, V, 1e-3);
        worst = std::max(worst, max_diff(rho, s.density()));
    }
    CHECK(worst < 5e-3);
}

TEST_CASE("energy functional examples", "[energy]") {
    CHECK_THAT(energy(packet(1.0, 0.0, 0.0), free_potential(kGrid), 1.0), WithinAbs(0.125, 1e-10));
    const auto ground = oracles::harmonic_ground(1.0, kGrid, PhysicalParams{});
    CHECK_THAT(energy(ground.state, harmonic_potential(kGrid, 1.0, 1.0), 1.0), WithinAbs(0.5, 1e-10));

    const PhysicalParams hybrid{1.0, 1.0, 0.0};
    WaveState s = packet(1.0, 0.0, 0.0, hybrid);
    for (int i = 0; i < 200; ++i) {
        s = step_general_mu(s, free_potential(kGrid), 1e-3);
        CHECK(std::abs(energy(s, free_potential(kGrid), 0.0)) < 1e-12);
    }
}

TEST_CASE("QHJ residual of the harmonic ground state", "[qhj]") {
    const auto ground = oracles::harmonic_ground(1.0, kGrid, PhysicalParams{});
    const Potential V = harmonic_potential(kGrid, 1.0, 1.0);
    const WaveState next = step_schrodinger(ground.state, V, 1e-3);
    CHECK(qhj_residual(ground.state, next, V, 1.0).centered_norm < 1e-6);
}

TEST_CASE("QHJ residual of the free packet converges at second order", "[qhj]") {
    const WaveState s = packet(1.0, 0.0, 0.0);
    const Potential V = free_potential(kGrid);
    const double r1 = qhj_residual(s, step_schrodinger(s, V, 1e-3), V, 1.0).centered_norm;
    const double r2 = qhj_residual(s, step_schrodinger(s, V, 5e-4), V, 1.0).centered_norm;
    CHECK(r1 < 1e-4);
    CHECK_THAT(r1 / r2, WithinAbs(4.0, 0.5));
}

TEST_CASE("QHJ residual of the static hybrid Gaussian", "[qhj]") {
    // O(dt^2) splitting residual: 1.1e-8 at dt = 1e-3, 2.8e-9 at 5e-4
    const PhysicalParams p{1.0, 1.0, 0.0};
    const WaveState s = packet(1.0, 0.0, 0.0, p);
    const Potential V = free_potential(kGrid);
    CHECK(qhj_residual(s, step_general_mu(s, V, 5e-4), V, 0.0).centered_norm < 1e-8);
}

TEST_CASE("QHJ residual contract", "[qhj][contract]") {
    const WaveState s = packet(1.0, 0.0, 0.0);
    const Potential V = free_potential(kGrid);
    CHECK_THROWS_AS(qhj_residual(s, s, V, 1.0), ContractError);
    WaveState other = step_schrodinger(s, V, 1e-3);
    other.params.hbar = 2.0;
    CHECK_THROWS_AS(qhj_residual(s, other, V, 1.0), ContractError);
}

TEST_CASE("regraduation map", "[regraduate]") {
    const PhysicalParams p{1.0, 1.0, 0.25};
    const WaveState s = packet(1.0, 0.5, 0.3, p);
    const auto [same, same_params] = regraduate(s, 1.0);
    CHECK(same_params == p);
    for (std::size_t j = 0; j < kGrid.n(); ++j) CHECK(std::abs(same.psi[j] - s.psi[j]) < 1e-14);

    const auto [mapped, mapped_params] = regraduate(s, 2.0);
    CHECK(mapped_params.hbar == 2.0);
    CHECK(mapped_params.mu == 1.0);
    CHECK(mapped_params.m == 1.0);
    CHECK(max_diff(mapped.density(), s.density()) < 1e-15);
    CHECK_THROWS_AS(regraduate(s, 0.0), ContractError);
}

TEST_CASE("regraduated mu = m run matches the linear integrator", "[regraduate]") {
    const PhysicalParams p{1.0, 1.0, 0.25};
    const auto [mapped, params] = regraduate(packet(1.0, 0.0, 0.0, p), 2.0);
    REQUIRE(params.mu == params.m);
    const Potential V = free_potential(kGrid);
    const WaveState a = evolve(mapped, V, 1e-3, 200, step_general_mu);
    const WaveState b = evolve(mapped, V, 1e-3, 200, step_schrodinger);
    CHECK(max_diff(a.density(), b.density()) < 1e-12);
}
