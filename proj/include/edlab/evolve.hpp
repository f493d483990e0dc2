#pragma once

// Time stepping for the linear Schrödinger equation, the osmotic-mass (μ) family of
// nonlinear equations, and the Fokker-Planck continuity equation.

#include "edlab/grid_state.hpp"

#include <string>
#include <utility>

namespace edlab {

struct Potential {
    Field v_samples;
    std::string label;
};

Potential free_potential(const Grid1D& grid);
/// V = ½ m ω² x²
Potential harmonic_potential(const Grid1D& grid, double m, double omega);
/// Throws ContractError if the table size differs from the grid or holds a non-finite value.
Potential custom_potential(const Grid1D& grid, Field table, std::string label = "custom");

struct EvolveConfig {
    double dt = 1e-3;
    std::size_t steps_per_output = 100;
};

/// Largest step that keeps the kinetic phase advance of the occupied spectrum under
/// `safety` radians: safety * 2m / (ħ k_occ²). k_occ is the largest |k| whose mode holds at
/// least 1e-14 of the spectral power (the grid Nyquist wavenumber if the spectrum is full).
double accuracy_dt_limit(const WaveState& state, double safety = 0.5);

/// Throws ContractError if dt <= 0, steps_per_output == 0, or dt exceeds accuracy_dt_limit.
void validate(const EvolveConfig& config, const WaveState& state);

/// One Strang step: half kinetic, full potential, half kinetic.
WaveState step_schrodinger(const WaveState& state, const Potential& V, double dt);

/// Quantum-potential coefficient (ħ²/2m)(1 - μ/m) of the μ-family equation.
double osmotic_correction_coefficient(const PhysicalParams& params);

/// Relative density below which the quantum potential is set to zero. It sits well under
/// kDensityFloor: excising at the decomposition floor leaves the kinetic spreading of the
/// near-floor tail uncancelled, and that phase error reaches the weighted residuals.
inline constexpr double kQuantumPotentialFloor = 1e-20;

/// ∇²ρ^{1/2}/ρ^{1/2} evaluated spectrally where ρ >= kQuantumPotentialFloor * max ρ, zero
/// elsewhere.
Field quantum_potential_shape(const Grid1D& grid, std::span<const double> rho);

/// Band limit of the μ-family kinetic substep: the smaller of the wavenumber where
/// ħk²dt/(2m) = π and the grid Nyquist wavenumber.
double nonlinear_band_limit(const Grid1D& grid, const PhysicalParams& params, double dt);

/// Kinetic substep exp(-i coeff k²) followed by the low-pass exp(-36 ((k - k̄)/K)^16), where
/// k̄ is the power-weighted mean wavenumber of psi and K = band_limit - |k̄| (modes beyond K
/// from k̄ are zeroed). Centering on k̄ keeps the mode pairs k̄ ± q of a moving packet
/// equally damped.
CField filtered_kinetic_phase(const Grid1D& grid, std::span<const cplx> psi, double coeff, double band_limit);

/// One Strang step of the μ-family equation: potential half step, full kinetic step, potential
/// half step. Each potential half step uses V + (ħ²/2m)(1 - μ/m) ∇²ρ^{1/2}/ρ^{1/2} from the
/// density it starts from; a potential substep leaves ρ unchanged, so this is exact within the
/// substep. The kinetic step is filtered_kinetic_phase. With μ = m the correction vanishes
/// and the result is step_schrodinger.
/// Throws NumericAbort when the correction advances the phase of a node above kDensityFloor
/// by more than π in one substep.
WaveState step_general_mu(const WaveState& state, const Potential& V, double dt);

/// Conservative first-order upwind update of ∂ρ/∂t = -∂(ρv). Throws NumericAbort when
/// max|v| dt/dx > 0.9.
Field step_fokker_planck(const Grid1D& grid, std::span<const double> rho, std::span<const double> v,
                         double dt);

/// E = Σ ρ(½mv² + ½μu² + V) dx
double energy(const WaveState& state, const Potential& V, double mu);

struct QhjResidual {
    Field residual;         ///< zero where either state is below the density floor
    double mean = 0.0;      ///< ρ-weighted mean
    double norm = 0.0;      ///< ρ-weighted L2 norm
    double centered_norm = 0.0; ///< ρ-weighted L2 norm of residual - mean
};

/// Residual of the quantum Hamilton-Jacobi equation between a state and its successor one step
/// later. Spatial terms are averaged over the two endpoints, the time derivative is
/// Im log(Ψ_b/Ψ_a)/dt. Throws ContractError on grid or parameter mismatch or t_b <= t_a.
QhjResidual qhj_residual(const WaveState& a, const WaveState& b, const Potential& V, double mu);

/// Maps (Ψ = ρ^{1/2}e^{iφ}, η, μ) to (ρ^{1/2}e^{iφ/κ}, κη, κ²μ).
std::pair<WaveState, PhysicalParams> regraduate(const WaveState& state, double kappa);

} // namespace edlab
