#pragma once

// Walker ensembles taking maximum-entropy Gaussian steps: Δx = b(x)Δt + Δw with
// ⟨Δw⟩ = 0 and ⟨Δw²⟩ = (ħ/m)Δt.

#include "edlab/grid_state.hpp"

#include <cstdint>
#include <vector>

namespace edlab {

struct Ensemble {
    std::vector<double> positions;
    double t = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> stream_ids;
    std::uint64_t steps_taken = 0;
    /// Walker-steps that landed next to an excised grid node and moved with zero drift.
    std::uint64_t excised_walker_steps = 0;

    std::size_t size() const noexcept { return positions.size(); }
};

/// Stream identifier of a walker; distinct for distinct indices under one seed.
std::uint64_t walker_stream_id(std::uint64_t seed, std::uint64_t walker);

/// Worker count used when a function is called with threads == 0.
unsigned default_threads();

/// M i.i.d. draws from rho0 by inverse CDF. Cell j carries mass rho0[j]*dx spread uniformly
/// over [x_j - dx/2, x_j + dx/2). Throws ContractError for M == 0 or a malformed rho0.
Ensemble init_ensemble(const Grid1D& grid, std::span<const double> rho0, std::size_t M, std::uint64_t seed,
                       unsigned threads = 0);

struct DriftField {
    Field b;
    std::vector<unsigned char> resolved; ///< 0 where the density is below the floor
};

/// b = v - u = (ħ/m)∂S from the hydrodynamic decomposition.
DriftField drift_field(const WaveState& state);
/// b ≡ 0 on every node.
DriftField zero_drift(const Grid1D& grid);

/// One Euler-Maruyama step for every walker, with b interpolated linearly between nodes and
/// positions wrapped to the periodic cell range. Results do not depend on `threads`.
Ensemble step_ensemble(const Ensemble& e, const Grid1D& grid, const DriftField& drift, double dt,
                       const PhysicalParams& params, unsigned threads = 0);

/// Normalized histogram on the cells centered at the grid nodes.
Field ensemble_density(const Ensemble& e, const Grid1D& grid, unsigned threads = 0);

struct DistributionDistance {
    double ks = 0.0; ///< max |CDF difference| over cell boundaries
    double tv = 0.0; ///< ½ Σ|difference| dx
};

DistributionDistance distribution_distance(const Grid1D& grid, std::span<const double> empirical,
                                           std::span<const double> rho);

struct SampleMoments {
    double mean = 0.0;
    double var = 0.0;
};

/// Mean and unbiased variance of walker positions.
SampleMoments sample_moments(const Ensemble& e);

} // namespace edlab
