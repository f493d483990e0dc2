#pragma once

// Closed-form reference states. Nothing here calls an integrator.

#include "edlab/grid_state.hpp"
#include "edlab/stats.hpp"

namespace edlab::oracles {

/// Freely evolving minimum-uncertainty Gaussian packet (Var x = σ0² at t = 0).
struct AnalyticPacket {
    double sigma0 = 1.0;
    double x0 = 0.0;
    double p0 = 0.0;
    PhysicalParams params;

    /// Dimensionless spreading time ħt/(2mσ0²).
    double spread(double t) const;
    double mean_x(double t) const;
    double var_x(double t) const;
    double var_pq(double t) const;
    double cov_x_pq(double t) const;
    double var_po(double t) const;
    double var_pc(double t) const;
    double var_pd(double t) const;

    cplx psi(double x, double t) const;
    double rho(double x, double t) const;
    /// Phase of psi, continuous in x.
    double phi(double x, double t) const;

    MomentReport moments(double t) const;
};

struct ReferenceState {
    WaveState state;
    MomentReport analytic;
};

/// Samples the analytic packet at time t. Throws ContractError if the packet width exceeds a
/// tenth of the domain or the packet is not boundary-negligible.
ReferenceState gaussian_packet(double sigma0, double x0, double p0, double t, const Grid1D& grid,
                               const PhysicalParams& params);

/// Ground state of V = ½mω²x².
ReferenceState harmonic_ground(double omega, const Grid1D& grid, const PhysicalParams& params);

} // namespace edlab::oracles
