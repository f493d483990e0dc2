#include "edlab/oracles.hpp"

#include "edlab/error.hpp"

#include <cmath>
#include <numbers>

namespace edlab::oracles {

double AnalyticPacket::spread(double t) const {
    return params.hbar * t / (2.0 * params.m * sigma0 * sigma0);
}

double AnalyticPacket::mean_x(double t) const { return x0 + p0 * t / params.m; }

double AnalyticPacket::var_x(double t) const {
    const double tau = spread(t);
    return sigma0 * sigma0 * (1.0 + tau * tau);
}

double AnalyticPacket::var_pq(double) const {
    return params.hbar * params.hbar / (4.0 * sigma0 * sigma0);
}

double AnalyticPacket::cov_x_pq(double t) const {
    return t * params.hbar * params.hbar / (4.0 * params.m * sigma0 * sigma0);
}

double AnalyticPacket::var_po(double t) const {
    return params.hbar * params.hbar / (4.0 * var_x(t));
}

double AnalyticPacket::var_pc(double t) const { return var_pq(t) - var_po(t); }

double AnalyticPacket::var_pd(double t) const {
    // p_d is linear in x, so its variance is Cov(x, p_d)² / Var x
    const double cov = cov_x_pq(t) - 0.5 * params.hbar;
    return cov * cov / var_x(t);
}

double AnalyticPacket::rho(double x, double t) const {
    const double var = var_x(t);
    const double d = x - mean_x(t);
    return std::exp(-d * d / (2.0 * var)) / std::sqrt(2.0 * std::numbers::pi * var);
}

double AnalyticPacket::phi(double x, double t) const {
    const double tau = spread(t);
    const double d = x - mean_x(t);
    const double hbar = params.hbar;
    return d * d * tau / (4.0 * sigma0 * sigma0 * (1.0 + tau * tau)) + p0 * (x - x0) / hbar
         - p0 * p0 * t / (2.0 * params.m * hbar) - 0.5 * std::atan(tau);
}

cplx AnalyticPacket::psi(double x, double t) const { return std::polar(std::sqrt(rho(x, t)), phi(x, t)); }

MomentReport AnalyticPacket::moments(double t) const {
    const double hbar = params.hbar;
    MomentReport r;
    r.t = t;
    r.mean_x = mean_x(t);
    r.var_x = var_x(t);
    r.mean_pq = p0;
    r.mean_pc = p0;
    r.mean_pd = p0;
    r.mean_po = 0.0;
    r.var_pq = var_pq(t);
    r.second_moment_pq = r.var_pq + p0 * p0;
    r.var_po = var_po(t);
    r.var_pc = var_pc(t);
    r.var_pd = var_pd(t);
    r.cov_x_pq = cov_x_pq(t);
    r.cov_x_pc = r.cov_x_pq;
    r.cov_x_po = 0.5 * hbar;
    r.cov_x_pd = r.cov_x_pc - 0.5 * hbar;
    return r;
}

ReferenceState gaussian_packet(double sigma0, double x0, double p0, double t, const Grid1D& grid,
                               const PhysicalParams& params) {
    params.validate();
    if (!(sigma0 > 0.0)) throw ContractError{"gaussian_packet: sigma0 must be > 0"};
    const AnalyticPacket packet{sigma0, x0, p0, params};
    if (!(std::sqrt(packet.var_x(t)) < grid.length() / 10.0)) {
        throw ContractError{"gaussian_packet: packet too wide for the domain"};
    }
    CField psi(grid.n());
    for (std::size_t j = 0; j < grid.n(); ++j) psi[j] = packet.psi(grid.x(j), t);
    WaveState state{grid, std::move(psi), t, params};
    const double scale = 1.0 / std::sqrt(state.norm());
    for (auto& c : state.psi) c *= scale;
    check_boundary_negligible(state);
    return {std::move(state), packet.moments(t)};
}

ReferenceState harmonic_ground(double omega, const Grid1D& grid, const PhysicalParams& params) {
    params.validate();
    if (!(omega > 0.0)) throw ContractError{"harmonic_ground: omega must be > 0"};
    const double hbar = params.hbar;
    const double m = params.m;
    const double var_x = hbar / (2.0 * m * omega);
    if (!(std::sqrt(var_x) < grid.length() / 10.0)) {
        throw ContractError{"harmonic_ground: ground state too wide for the domain"};
    }
    CField psi(grid.n());
    const double amp = std::pow(m * omega / (std::numbers::pi * hbar), 0.25);
    for (std::size_t j = 0; j < grid.n(); ++j) {
        const double x = grid.x(j);
        psi[j] = amp * std::exp(-m * omega * x * x / (2.0 * hbar));
    }
    WaveState state{grid, std::move(psi), 0.0, params};
    const double scale = 1.0 / std::sqrt(state.norm());
    for (auto& c : state.psi) c *= scale;
    check_boundary_negligible(state);

    MomentReport r;
    r.var_x = var_x;
    r.var_pq = 0.5 * hbar * m * omega;
    r.second_moment_pq = r.var_pq;
    r.var_po = r.var_pq;
    r.var_pd = r.var_pq;
    r.cov_x_po = 0.5 * hbar;
    r.cov_x_pd = -0.5 * hbar;
    return {std::move(state), r};
}

} // namespace edlab::oracles
