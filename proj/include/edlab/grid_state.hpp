#pragma once

// Discretized states and the hydrodynamic decomposition Ψ <-> (ρ, φ).

#include "edlab/spectral.hpp"

#include <cstddef>
#include <span>

namespace edlab {

/// Uniform periodic lattice x_j = x_min + j*dx, j in [0, n).
class Grid1D {
public:
    /// Throws ContractError unless n is a power of two >= 64 and x_max > x_min.
    static Grid1D make(std::size_t n, double x_min, double x_max);

    std::size_t n() const noexcept { return n_; }
    double x_min() const noexcept { return x_min_; }
    double x_max() const noexcept { return x_max_; }
    double dx() const noexcept { return dx_; }
    double length() const noexcept { return x_max_ - x_min_; }
    double x(std::size_t j) const noexcept { return x_min_ + static_cast<double>(j) * dx_; }

    /// Grid coordinates as a field.
    Field coordinates() const;

    friend bool operator==(const Grid1D&, const Grid1D&) = default;

private:
    Grid1D(std::size_t n, double x_min, double x_max)
        : n_{n}, x_min_{x_min}, x_max_{x_max}, dx_{(x_max - x_min) / static_cast<double>(n)} {}

    std::size_t n_;
    double x_min_;
    double x_max_;
    double dx_;
};

inline Grid1D make_grid(std::size_t n, double x_min, double x_max) {
    return Grid1D::make(n, x_min, x_max);
}

/// Physical constants. After regraduation the action unit η = mσ²/τ is ħ, so σ²/τ = ħ/m
/// is derived rather than stored independently.
struct PhysicalParams {
    double hbar = 1.0;
    double m = 1.0;
    double mu = 1.0; ///< osmotic mass

    double sigma2_over_tau() const noexcept { return hbar / m; }
    /// Throws ContractError unless hbar > 0, m > 0, mu >= 0 (all finite).
    void validate() const;

    friend bool operator==(const PhysicalParams&, const PhysicalParams&) = default;
};

PhysicalParams make_params(double hbar, double m, double mu);

struct WaveState {
    Grid1D grid;
    CField psi;
    double t = 0.0;
    PhysicalParams params;

    /// Σ|Ψ|² dx
    double norm() const;
    Field density() const;
};

/// Relative density floor below which velocity and momentum fields are set to zero.
inline constexpr double kDensityFloor = 1e-12;
inline constexpr double kNormTolerance = 1e-12;

/// Throws ContractError if Σ|Ψ|²dx deviates from 1 by more than kNormTolerance or the
/// sample count does not match the grid.
void check_normalized(const WaveState& state);

/// Throws ContractError if |Ψ|² at either domain edge exceeds kDensityFloor * max|Ψ|².
void check_boundary_negligible(const WaveState& state);

/// Ψ = ρ^{1/2} e^{iφ}, renormalized exactly. rho must be normalized within 1e-9.
WaveState compose(const Grid1D& grid, std::span<const double> rho, std::span<const double> phi,
                  double t, const PhysicalParams& params);

struct HydroFields {
    Field rho;
    Field v; ///< current velocity
    Field u; ///< osmotic velocity
    Field b; ///< drift velocity
    Field S; ///< entropy field; anchored so S = log ρ^{1/2} at the density maximum
    Field p_c;
    Field p_o;
    Field p_d;
    /// 1 where ρ >= floor; fields are zero elsewhere.
    std::vector<unsigned char> resolved;
    double floor = 0.0;
};

/// Spectral hydrodynamic decomposition. v comes from Im(Ψ*∂Ψ)/ρ, so no phase is unwrapped.
HydroFields decompose(const WaveState& state);

struct MomentumFields {
    Field p_d;
    Field p_o;
    Field p_c;
};

MomentumFields momentum_fields(const HydroFields& h, const PhysicalParams& params);

/// Continuous phase reconstructed from v by trapezoidal integration outward from the density
/// maximum, where it equals arg Ψ. Constant across excised regions.
Field reconstruct_phase(const WaveState& state, const HydroFields& h);

} // namespace edlab
