#pragma once

// Moments of position and the four momenta, and slack values of the uncertainty relations.

#include "edlab/grid_state.hpp"

#include <cstdint>
#include <vector>

namespace edlab {

struct MomentReport {
    double t = 0.0;
    double mean_x = 0.0;
    double var_x = 0.0;
    double mean_pd = 0.0;
    double mean_po = 0.0;
    double mean_pc = 0.0;
    double mean_pq = 0.0;
    double var_pd = 0.0;
    double var_po = 0.0;
    double var_pc = 0.0;
    double second_moment_pq = 0.0;
    double var_pq = 0.0;
    double cov_x_pd = 0.0;
    double cov_x_po = 0.0;
    double cov_x_pc = 0.0;
    double cov_x_pq = 0.0; ///< symmetrized ½⟨x p_q + p_q x⟩ - ⟨x⟩⟨p_q⟩
};

struct URReport {
    double t = 0.0;
    double hbar = 1.0;
    double slack_osmotic = 0.0;
    double slack_drift = 0.0;
    double slack_current = 0.0;
    double slack_schrodinger = 0.0;
    double slack_heisenberg = 0.0;
    double decomposition_residual = 0.0;
    bool osmotic_saturated = false;
    bool schrodinger_saturated = false;
    bool heisenberg_saturated = false;
};

inline constexpr double kSaturationTolerance = 1e-6;

/// Σ ρ f dx. Throws ContractError when the field sizes differ from the grid.
double rho_expectation(const Grid1D& grid, std::span<const double> f, std::span<const double> rho);

/// Local momenta are ρ-weighted; p_q moments apply -iħ∂ spectrally to Ψ. Throws
/// ContractError if the density at the domain edge is not negligible, and NumericAbort if the
/// imaginary part of ⟨p_q⟩ exceeds 1e-10.
MomentReport momentum_moments(const WaveState& state);

enum class Momentum { drift, osmotic, current, quantum };

/// For Momentum::quantum this also verifies Cov(x, p_q) = Cov(x, p_c) within 1e-9 and throws
/// NumericAbort otherwise.
double covariance_x_p(const WaveState& state, Momentum which);

URReport uncertainty_report(const MomentReport& moments, double hbar);
URReport uncertainty_report(const WaveState& state);

struct DriftCovRow {
    double sigma = 0.0;
    double cov_x_pd = 0.0;
    double analytic = 0.0; ///< ħkσ²
    double var_x = 0.0;
    double var_pd = 0.0;
    double slack_drift = 0.0;
};

/// Gaussian ρ of width σ carrying an independent entropy field S = kx²/2, for each σ.
/// Throws ContractError when σ < 4 dx.
std::vector<DriftCovRow> drift_cov_scan(std::span<const double> sigmas, double k, const Grid1D& grid,
                                        const PhysicalParams& params);

/// Random smooth test states: ρ is the square of a sum of 3 to 6 positive Gaussian bumps,
/// φ a linear term plus a low-order Fourier polynomial. Deterministic in seed.
std::vector<WaveState> random_state_corpus(const Grid1D& grid, const PhysicalParams& params,
                                           std::size_t count, std::uint64_t seed);

} // namespace edlab
