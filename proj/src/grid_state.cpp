#include "edlab/grid_state.hpp"

#include "edlab/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

namespace edlab {

Grid1D Grid1D::make(std::size_t n, double x_min, double x_max) {
    if (n < 64 || !std::has_single_bit(n)) {
        std::ostringstream msg;
        msg << "grid: n = " << n << " must be a power of two >= 64";
        throw ContractError{msg.str()};
    }
    if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_max > x_min)) {
        throw ContractError{"grid: require finite bounds with x_max > x_min"};
    }
    return Grid1D{n, x_min, x_max};
}

Field Grid1D::coordinates() const {
    Field xs(n_);
    for (std::size_t j = 0; j < n_; ++j) xs[j] = x(j);
    return xs;
}

void PhysicalParams::validate() const {
    if (!std::isfinite(hbar) || hbar <= 0.0) throw ContractError{"params: hbar must be > 0"};
    if (!std::isfinite(m) || m <= 0.0) throw ContractError{"params: m must be > 0"};
    if (!std::isfinite(mu) || mu < 0.0) throw ContractError{"params: mu must be >= 0"};
}

PhysicalParams make_params(double hbar, double m, double mu) {
    PhysicalParams p{hbar, m, mu};
    p.validate();
    return p;
}

double WaveState::norm() const {
    double sum = 0.0;
    for (const auto& c : psi) sum += std::norm(c);
    return sum * grid.dx();
}

Field WaveState::density() const {
    Field rho(psi.size());
    for (std::size_t j = 0; j < psi.size(); ++j) rho[j] = std::norm(psi[j]);
    return rho;
}

void check_normalized(const WaveState& state) {
    if (state.psi.size() != state.grid.n()) throw ContractError{"state: sample count differs from grid"};
    const double nrm = state.norm();
    if (!std::isfinite(nrm)) throw NumericAbort{"state: non-finite wavefunction samples"};
    if (std::abs(nrm - 1.0) > kNormTolerance) {
        std::ostringstream msg;
        msg << "state: norm " << nrm << " differs from 1 by more than " << kNormTolerance;
        throw ContractError{msg.str()};
    }
}

void check_boundary_negligible(const WaveState& state) {
    double peak = 0.0;
    for (const auto& c : state.psi) peak = std::max(peak, std::norm(c));
    const double edge = std::max(std::norm(state.psi.front()), std::norm(state.psi.back()));
    if (edge >= kDensityFloor * peak) {
        throw ContractError{"state: density at the domain edge is not negligible"};
    }
}

WaveState compose(const Grid1D& grid, std::span<const double> rho, std::span<const double> phi,
                  double t, const PhysicalParams& params) {
    params.validate();
    if (rho.size() != grid.n() || phi.size() != grid.n()) {
        throw ContractError{"compose: field sizes differ from grid"};
    }
    double mass = 0.0;
    for (double r : rho) {
        if (!(r >= 0.0)) throw ContractError{"compose: negative or NaN density sample"};
        mass += r;
    }
    mass *= grid.dx();
    if (mass == 0.0) throw ContractError{"compose: density is zero everywhere"};
    if (std::abs(mass - 1.0) > 1e-9) throw ContractError{"compose: density not normalized within 1e-9"};

    CField psi(grid.n());
    const double scale = 1.0 / std::sqrt(mass);
    for (std::size_t j = 0; j < grid.n(); ++j) {
        psi[j] = std::polar(std::sqrt(rho[j]) * scale, phi[j]);
    }
    return WaveState{grid, std::move(psi), t, params};
}

HydroFields decompose(const WaveState& state) {
    const auto& grid = state.grid;
    const std::size_t n = grid.n();
    if (state.psi.size() != n) throw ContractError{"decompose: sample count differs from grid"};
    state.params.validate();

    HydroFields h;
    h.rho = state.density();
    const double peak = *std::max_element(h.rho.begin(), h.rho.end());
    if (!std::isfinite(peak)) throw NumericAbort{"decompose: non-finite density"};
    if (!(peak > 0.0)) throw ContractError{"decompose: density below floor everywhere"};
    h.floor = kDensityFloor * peak;

    const CField dpsi = spectral::derivative(grid, state.psi);
    const Field drho = spectral::derivative(grid, h.rho);
    const double hbar_over_m = state.params.sigma2_over_tau();

    h.v.assign(n, 0.0);
    h.u.assign(n, 0.0);
    h.b.assign(n, 0.0);
    h.resolved.assign(n, 0);
    for (std::size_t j = 0; j < n; ++j) {
        if (h.rho[j] < h.floor) continue;
        h.resolved[j] = 1;
        h.v[j] = hbar_over_m * (std::conj(state.psi[j]) * dpsi[j]).imag() / h.rho[j];
        h.u[j] = -0.5 * hbar_over_m * drho[j] / h.rho[j];
        h.b[j] = h.v[j] - h.u[j];
    }

    auto momenta = momentum_fields(h, state.params);
    h.p_c = std::move(momenta.p_c);
    h.p_o = std::move(momenta.p_o);
    h.p_d = std::move(momenta.p_d);

    const Field phase = reconstruct_phase(state, h);
    h.S.assign(n, 0.0);
    const auto anchor = static_cast<std::size_t>(
        std::distance(h.rho.begin(), std::max_element(h.rho.begin(), h.rho.end())));
    const double anchor_phase = phase[anchor];
    for (std::size_t j = 0; j < n; ++j) {
        if (h.resolved[j]) h.S[j] = (phase[j] - anchor_phase) + 0.5 * std::log(h.rho[j]);
    }
    return h;
}

MomentumFields momentum_fields(const HydroFields& h, const PhysicalParams& params) {
    MomentumFields p;
    p.p_c.resize(h.v.size());
    p.p_o.resize(h.u.size());
    p.p_d.resize(h.b.size());
    for (std::size_t j = 0; j < h.v.size(); ++j) {
        p.p_c[j] = params.m * h.v[j];
        p.p_o[j] = params.m * h.u[j];
        p.p_d[j] = params.m * h.b[j];
    }
    return p;
}

Field reconstruct_phase(const WaveState& state, const HydroFields& h) {
    const std::size_t n = state.grid.n();
    const auto anchor = static_cast<std::size_t>(
        std::distance(h.rho.begin(), std::max_element(h.rho.begin(), h.rho.end())));
    const double k_scale = state.params.m / state.params.hbar;
    const double half_dx = 0.5 * state.grid.dx();

    Field phase(n, 0.0);
    phase[anchor] = std::arg(state.psi[anchor]);
    for (std::size_t j = anchor + 1; j < n; ++j) {
        phase[j] = phase[j - 1] + half_dx * k_scale * (h.v[j - 1] + h.v[j]);
    }
    for (std::size_t j = anchor; j-- > 0;) {
        phase[j] = phase[j + 1] - half_dx * k_scale * (h.v[j + 1] + h.v[j]);
    }
    return phase;
}

} // namespace edlab
