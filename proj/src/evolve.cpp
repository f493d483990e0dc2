#include "edlab/evolve.hpp"

#include "edlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace edlab {

namespace {

void require_finite(const CField& psi, const char* where) {
    for (const auto& c : psi) {
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
            throw NumericAbort{std::string{where} + ": non-finite wavefunction sample"};
        }
    }
}

void require_matching(const WaveState& state, const Potential& V, const char* where) {
    if (V.v_samples.size() != state.grid.n()) {
        throw ContractError{std::string{where} + ": potential size differs from grid"};
    }
}

CField apply_potential_phase(const CField& psi, std::span<const double> potential, double dt_over_hbar) {
    CField out(psi.size());
    for (std::size_t j = 0; j < psi.size(); ++j) {
        out[j] = psi[j] * std::polar(1.0, -potential[j] * dt_over_hbar);
    }
    return out;
}

} // namespace

Potential free_potential(const Grid1D& grid) { return Potential{Field(grid.n(), 0.0), "free"}; }

Potential harmonic_potential(const Grid1D& grid, double m, double omega) {
    if (!(omega > 0.0) || !(m > 0.0)) throw ContractError{"harmonic_potential: need m > 0 and omega > 0"};
    Field v(grid.n());
    for (std::size_t j = 0; j < grid.n(); ++j) v[j] = 0.5 * m * omega * omega * grid.x(j) * grid.x(j);
    std::ostringstream label;
    label << "harmonic(" << omega << ")";
    return Potential{std::move(v), label.str()};
}

Potential custom_potential(const Grid1D& grid, Field table, std::string label) {
    if (table.size() != grid.n()) throw ContractError{"custom_potential: table size differs from grid"};
    for (double value : table) {
        if (!std::isfinite(value)) throw ContractError{"custom_potential: non-finite sample"};
    }
    return Potential{std::move(table), std::move(label)};
}

double accuracy_dt_limit(const WaveState& state, double safety) {
    const CField modes = spectral::forward(state.psi);
    const auto k = spectral::wavenumbers(state.grid);
    double total = 0.0;
    for (const auto& c : modes) total += std::norm(c);
    double k_occ = 0.0;
    for (std::size_t j = 0; j < modes.size(); ++j) {
        if (std::norm(modes[j]) >= 1e-14 * total) k_occ = std::max(k_occ, std::abs(k[j]));
    }
    // The limit is conservative for a state whose only occupied mode is k = 0.
    k_occ = std::max(k_occ, 2.0 * std::numbers::pi / state.grid.length());
    return safety * 2.0 * state.params.m / (state.params.hbar * k_occ * k_occ);
}

void validate(const EvolveConfig& config, const WaveState& state) {
    if (!(config.dt > 0.0) || !std::isfinite(config.dt)) throw ContractError{"evolve: dt must be > 0"};
    if (config.steps_per_output == 0) throw ContractError{"evolve: steps_per_output must be >= 1"};
    const double limit = accuracy_dt_limit(state);
    if (config.dt > limit) {
        std::ostringstream msg;
        msg << "evolve: dt = " << config.dt << " exceeds the accuracy limit " << limit
            << " for the occupied spectrum";
        throw ContractError{msg.str()};
    }
}

WaveState step_schrodinger(const WaveState& state, const Potential& V, double dt) {
    require_matching(state, V, "step_schrodinger");
    const auto& p = state.params;
    const double half_kinetic = p.hbar * dt / (4.0 * p.m);
    CField psi = spectral::apply_kinetic_phase(state.grid, state.psi, half_kinetic);
    psi = apply_potential_phase(psi, V.v_samples, dt / p.hbar);
    psi = spectral::apply_kinetic_phase(state.grid, psi, half_kinetic);
    require_finite(psi, "step_schrodinger");
    return WaveState{state.grid, std::move(psi), state.t + dt, p};
}

double nonlinear_band_limit(const Grid1D& grid, const PhysicalParams& params, double dt) {
    const double resonance = std::sqrt(2.0 * std::numbers::pi * params.m / (params.hbar * dt));
    return std::min(resonance, std::numbers::pi / grid.dx());
}

double osmotic_correction_coefficient(const PhysicalParams& params) {
    return params.hbar * params.hbar / (2.0 * params.m) * (1.0 - params.mu / params.m);
}

Field quantum_potential_shape(const Grid1D& grid, std::span<const double> rho) {
    const std::size_t n = grid.n();
    const double floor = kQuantumPotentialFloor * *std::max_element(rho.begin(), rho.end());
    Field amplitude(n);
    for (std::size_t j = 0; j < n; ++j) amplitude[j] = std::sqrt(rho[j]);
    const Field laplacian = spectral::second_derivative(grid, amplitude);
    Field shape(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        if (rho[j] >= floor && amplitude[j] > 0.0) shape[j] = laplacian[j] / amplitude[j];
    }
    return shape;
}

CField filtered_kinetic_phase(const Grid1D& grid, std::span<const cplx> psi, double coeff, double band_limit) {
    CField modes = spectral::forward(psi);
    const auto k = spectral::wavenumbers(grid);
    double weighted = 0.0;
    double total = 0.0;
    for (std::size_t j = 0; j < modes.size(); ++j) {
        weighted += k[j] * std::norm(modes[j]);
        total += std::norm(modes[j]);
    }
    const double center = total > 0.0 ? weighted / total : 0.0;
    const double width = band_limit - std::abs(center);
    if (!(width > 0.0)) throw NumericAbort{"filtered_kinetic_phase: mean wavenumber beyond the band limit"};
    for (std::size_t j = 0; j < modes.size(); ++j) {
        const double eta = std::abs(k[j] - center) / width;
        const double gain = eta >= 1.0 ? 0.0 : std::exp(-36.0 * std::pow(eta, 16));
        modes[j] *= gain * std::polar(1.0, -coeff * k[j] * k[j]);
    }
    return spectral::backward(modes);
}

namespace {

// Applies exp(-i (V + c Q) h/ħ) in place; returns the largest correction phase on nodes above
// the decomposition floor.
double apply_effective_potential(const Grid1D& grid, CField& psi, const Potential& V, double coeff,
                                 double h_over_hbar) {
    Field rho(psi.size());
    for (std::size_t j = 0; j < psi.size(); ++j) rho[j] = std::norm(psi[j]);
    const Field shape = quantum_potential_shape(grid, rho);
    const double floor = kDensityFloor * *std::max_element(rho.begin(), rho.end());
    double worst = 0.0;
    for (std::size_t j = 0; j < psi.size(); ++j) {
        const double correction = coeff * shape[j];
        if (rho[j] >= floor) worst = std::max(worst, std::abs(correction) * h_over_hbar);
        psi[j] *= std::polar(1.0, -(V.v_samples[j] + correction) * h_over_hbar);
    }
    return worst;
}

void check_overflow(double phase) {
    if (!std::isfinite(phase) || phase > std::numbers::pi) {
        throw NumericAbort{"step_general_mu: quantum potential overflow at the density floor; grid too coarse"};
    }
}

} // namespace

WaveState step_general_mu(const WaveState& state, const Potential& V, double dt) {
    const double coeff = osmotic_correction_coefficient(state.params);
    if (coeff == 0.0) return step_schrodinger(state, V, dt);
    require_matching(state, V, "step_general_mu");

    const auto& p = state.params;
    const double half = 0.5 * dt / p.hbar;
    CField psi = state.psi;
    check_overflow(apply_effective_potential(state.grid, psi, V, coeff, half));
    psi = filtered_kinetic_phase(state.grid, psi, p.hbar * dt / (2.0 * p.m), nonlinear_band_limit(state.grid, p, dt));
    check_overflow(apply_effective_potential(state.grid, psi, V, coeff, half));
    require_finite(psi, "step_general_mu");
    return WaveState{state.grid, std::move(psi), state.t + dt, p};
}

Field step_fokker_planck(const Grid1D& grid, std::span<const double> rho, std::span<const double> v,
                         double dt) {
    const std::size_t n = grid.n();
    if (rho.size() != n || v.size() != n) throw ContractError{"step_fokker_planck: field sizes differ from grid"};
    if (!(dt > 0.0)) throw ContractError{"step_fokker_planck: dt must be > 0"};
    double vmax = 0.0;
    for (double value : v) {
        if (!std::isfinite(value)) throw NumericAbort{"step_fokker_planck: non-finite velocity"};
        vmax = std::max(vmax, std::abs(value));
    }
    const double courant = vmax * dt / grid.dx();
    if (courant > 0.9) {
        std::ostringstream msg;
        msg << "step_fokker_planck: CFL number " << courant << " > 0.9; dt too large";
        throw NumericAbort{msg.str()};
    }

    // flux[j] lives on the face between cells j and j+1
    Field flux(n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t right = (j + 1) % n;
        const double face_v = 0.5 * (v[j] + v[right]);
        flux[j] = face_v * (face_v > 0.0 ? rho[j] : rho[right]);
    }
    Field out(n);
    const double ratio = dt / grid.dx();
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t left = (j + n - 1) % n;
        out[j] = rho[j] - ratio * (flux[j] - flux[left]);
    }
    return out;
}

double energy(const WaveState& state, const Potential& V, double mu) {
    require_matching(state, V, "energy");
    const HydroFields h = decompose(state);
    const double m = state.params.m;
    double sum = 0.0;
    for (std::size_t j = 0; j < h.rho.size(); ++j) {
        sum += h.rho[j] * (0.5 * m * h.v[j] * h.v[j] + 0.5 * mu * h.u[j] * h.u[j] + V.v_samples[j]);
    }
    return sum * state.grid.dx();
}

QhjResidual qhj_residual(const WaveState& a, const WaveState& b, const Potential& V, double mu) {
    if (!(a.grid == b.grid)) throw ContractError{"qhj_residual: states live on different grids"};
    if (!(a.params == b.params)) throw ContractError{"qhj_residual: states carry different parameters"};
    require_matching(a, V, "qhj_residual");
    const double dt = b.t - a.t;
    if (!(dt > 0.0)) throw ContractError{"qhj_residual: state_b must be later than state_a"};

    const HydroFields ha = decompose(a);
    const HydroFields hb = decompose(b);
    const Field qa = quantum_potential_shape(a.grid, ha.rho);
    const Field qb = quantum_potential_shape(b.grid, hb.rho);

    const double eta = a.params.hbar;
    const double m = a.params.m;
    const double k_scale = m / eta; // ∂φ = (m/η) v
    const double quantum = mu * eta * eta / (2.0 * m * m);

    const std::size_t n = a.grid.n();
    QhjResidual out;
    out.residual.assign(n, 0.0);
    Field weight(n, 0.0);
    double total_weight = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (!ha.resolved[j] || !hb.resolved[j]) continue;
        const double dphi = std::arg(b.psi[j] * std::conj(a.psi[j]));
        const double ga = k_scale * ha.v[j];
        const double gb = k_scale * hb.v[j];
        const double grad_sq = 0.5 * (ga * ga + gb * gb);
        const double q = 0.5 * (qa[j] + qb[j]);
        out.residual[j] = eta * dphi / dt + eta * eta / (2.0 * m) * grad_sq + V.v_samples[j] - quantum * q;
        weight[j] = 0.5 * (ha.rho[j] + hb.rho[j]);
        total_weight += weight[j];
    }
    if (!(total_weight > 0.0)) throw NumericAbort{"qhj_residual: no resolved density"};

    double mean = 0.0;
    double square = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        mean += weight[j] * out.residual[j];
        square += weight[j] * out.residual[j] * out.residual[j];
    }
    mean /= total_weight;
    double centered = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double d = out.residual[j] - mean;
        if (weight[j] > 0.0) centered += weight[j] * d * d;
    }
    out.mean = mean;
    out.norm = std::sqrt(square / total_weight);
    out.centered_norm = std::sqrt(centered / total_weight);
    return out;
}

std::pair<WaveState, PhysicalParams> regraduate(const WaveState& state, double kappa) {
    if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ContractError{"regraduate: kappa must be > 0"};
    PhysicalParams mapped = state.params;
    mapped.hbar = kappa * state.params.hbar;
    mapped.mu = kappa * kappa * state.params.mu;
    mapped.validate();

    if (kappa == 1.0) return {WaveState{state.grid, state.psi, state.t, mapped}, mapped};

    const HydroFields h = decompose(state);
    const Field phase = reconstruct_phase(state, h);
    CField psi(state.grid.n());
    for (std::size_t j = 0; j < psi.size(); ++j) {
        psi[j] = std::polar(std::abs(state.psi[j]), phase[j] / kappa);
    }
    return {WaveState{state.grid, std::move(psi), state.t, mapped}, mapped};
}

} // namespace edlab
