#include "edlab/stats.hpp"

#include "edlab/error.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace edlab {

namespace {

struct LocalMoments {
    double mean = 0.0;
    double var = 0.0;
    double cov_x = 0.0;
};

LocalMoments local_moments(const Field& rho, const Field& xs, const Field& p, double mean_x, double dx) {
    double mean = 0.0;
    double second = 0.0;
    double cross = 0.0;
    for (std::size_t j = 0; j < rho.size(); ++j) {
        mean += rho[j] * p[j];
        second += rho[j] * p[j] * p[j];
        cross += rho[j] * xs[j] * p[j];
    }
    mean *= dx;
    second *= dx;
    cross *= dx;
    return {mean, second - mean * mean, cross - mean_x * mean};
}

double uniform(std::mt19937_64& engine, double lo, double hi) {
    const double unit = static_cast<double>(engine() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * unit;
}

} // namespace

double rho_expectation(const Grid1D& grid, std::span<const double> f, std::span<const double> rho) {
    if (f.size() != grid.n() || rho.size() != grid.n()) {
        throw ContractError{"rho_expectation: field sizes differ from grid"};
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) sum += rho[j] * f[j];
    return sum * grid.dx();
}

MomentReport momentum_moments(const WaveState& state) {
    check_boundary_negligible(state);
    const auto& grid = state.grid;
    const double dx = grid.dx();
    const double hbar = state.params.hbar;
    const HydroFields h = decompose(state);
    const Field xs = grid.coordinates();

    MomentReport r;
    r.t = state.t;
    r.mean_x = rho_expectation(grid, xs, h.rho);
    double x2 = 0.0;
    for (std::size_t j = 0; j < xs.size(); ++j) x2 += h.rho[j] * xs[j] * xs[j];
    r.var_x = x2 * dx - r.mean_x * r.mean_x;

    const auto drift = local_moments(h.rho, xs, h.p_d, r.mean_x, dx);
    const auto osmotic = local_moments(h.rho, xs, h.p_o, r.mean_x, dx);
    const auto current = local_moments(h.rho, xs, h.p_c, r.mean_x, dx);
    r.mean_pd = drift.mean;
    r.var_pd = drift.var;
    r.cov_x_pd = drift.cov_x;
    r.mean_po = osmotic.mean;
    r.var_po = osmotic.var;
    r.cov_x_po = osmotic.cov_x;
    r.mean_pc = current.mean;
    r.var_pc = current.var;
    r.cov_x_pc = current.cov_x;

    // p_q Ψ = -iħ ∂Ψ
    const CField dpsi = spectral::derivative(grid, state.psi);
    cplx first{0.0, 0.0};
    cplx x_first{0.0, 0.0};
    for (std::size_t j = 0; j < xs.size(); ++j) {
        const cplx pq_psi = cplx{0.0, -hbar} * dpsi[j];
        first += std::conj(state.psi[j]) * pq_psi;
        x_first += std::conj(state.psi[j]) * xs[j] * pq_psi;
    }
    first *= dx;
    x_first *= dx;
    if (std::abs(first.imag()) > 1e-10) {
        std::ostringstream msg;
        msg << "momentum_moments: Im<p_q> = " << first.imag() << " exceeds 1e-10";
        throw NumericAbort{msg.str()};
    }
    r.mean_pq = first.real();

    // <p_q²> = ħ² Σ k²|Ψ_k|² dx/n by Parseval
    const CField modes = spectral::forward(state.psi);
    const auto k = spectral::wavenumbers(grid);
    double spectral_sum = 0.0;
    for (std::size_t j = 0; j < modes.size(); ++j) spectral_sum += k[j] * k[j] * std::norm(modes[j]);
    r.second_moment_pq = hbar * hbar * spectral_sum * dx / static_cast<double>(grid.n());
    r.var_pq = r.second_moment_pq - r.mean_pq * r.mean_pq;
    // (x p + p x)/2 = Re(x p) for Hermitian x and p
    r.cov_x_pq = x_first.real() - r.mean_x * r.mean_pq;
    return r;
}

double covariance_x_p(const WaveState& state, Momentum which) {
    const MomentReport r = momentum_moments(state);
    switch (which) {
    case Momentum::drift: return r.cov_x_pd;
    case Momentum::osmotic: return r.cov_x_po;
    case Momentum::current: return r.cov_x_pc;
    case Momentum::quantum:
        if (std::abs(r.cov_x_pq - r.cov_x_pc) > 1e-9) {
            std::ostringstream msg;
            msg << "covariance_x_p: Cov(x,p_q) = " << r.cov_x_pq << " but Cov(x,p_c) = " << r.cov_x_pc;
            throw NumericAbort{msg.str()};
        }
        return r.cov_x_pq;
    }
    throw ContractError{"covariance_x_p: unknown momentum"};
}

URReport uncertainty_report(const MomentReport& r, double hbar) {
    URReport u;
    u.t = r.t;
    u.hbar = hbar;
    const double bound = 0.25 * hbar * hbar;
    u.slack_osmotic = r.var_x * r.var_po - bound;
    u.slack_drift = r.var_x * r.var_pd - r.cov_x_pd * r.cov_x_pd;
    u.slack_current = r.var_x * r.var_pc - r.cov_x_pc * r.cov_x_pc;
    u.slack_schrodinger = r.var_x * r.var_pq - r.cov_x_pq * r.cov_x_pq - bound;
    u.slack_heisenberg = r.var_x * r.var_pq - bound;
    u.decomposition_residual = r.var_pq - r.var_pc - r.var_po;
    u.osmotic_saturated = std::abs(u.slack_osmotic) < kSaturationTolerance;
    u.schrodinger_saturated = std::abs(u.slack_schrodinger) < kSaturationTolerance;
    u.heisenberg_saturated = std::abs(u.slack_heisenberg) < kSaturationTolerance;
    return u;
}

URReport uncertainty_report(const WaveState& state) {
    return uncertainty_report(momentum_moments(state), state.params.hbar);
}

std::vector<DriftCovRow> drift_cov_scan(std::span<const double> sigmas, double k, const Grid1D& grid,
                                        const PhysicalParams& params) {
    std::vector<DriftCovRow> rows;
    rows.reserve(sigmas.size());
    const Field xs = grid.coordinates();
    for (double sigma : sigmas) {
        if (!(sigma >= 4.0 * grid.dx())) {
            std::ostringstream msg;
            msg << "drift_cov_scan: sigma = " << sigma << " is below 4*dx = " << 4.0 * grid.dx();
            throw ContractError{msg.str()};
        }
        Field rho(grid.n());
        Field phi(grid.n());
        const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * sigma * sigma);
        for (std::size_t j = 0; j < grid.n(); ++j) {
            const double x = xs[j];
            rho[j] = norm * std::exp(-x * x / (2.0 * sigma * sigma));
            // φ = S - log ρ^{1/2}, up to a constant
            phi[j] = 0.5 * k * x * x + x * x / (4.0 * sigma * sigma);
        }
        const WaveState state = compose(grid, rho, phi, 0.0, params);
        const MomentReport r = momentum_moments(state);
        const URReport u = uncertainty_report(r, params.hbar);
        rows.push_back({sigma, r.cov_x_pd, params.hbar * k * sigma * sigma, r.var_x, r.var_pd, u.slack_drift});
    }
    return rows;
}

std::vector<WaveState> random_state_corpus(const Grid1D& grid, const PhysicalParams& params,
                                           std::size_t count, std::uint64_t seed) {
    std::mt19937_64 engine{seed};
    const Field xs = grid.coordinates();
    const double center = 0.5 * (grid.x_min() + grid.x_max());
    const double spread = grid.length() / 8.0;

    std::vector<WaveState> corpus;
    corpus.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        const auto bumps = 3 + static_cast<int>(engine() % 4);
        struct Bump { double weight, mid, width; };
        std::vector<Bump> shape;
        for (int i = 0; i < bumps; ++i) {
            shape.push_back({uniform(engine, 0.3, 1.0), center + uniform(engine, -spread, spread),
                             uniform(engine, 0.6, 1.5)});
        }
        const double boost = uniform(engine, -1.0, 1.0);
        const double scale = uniform(engine, 1.5, 3.0);
        double alpha[3];
        double beta[3];
        for (int q = 0; q < 3; ++q) {
            alpha[q] = uniform(engine, -0.6, 0.6);
            beta[q] = uniform(engine, -0.6, 0.6);
        }

        Field rho(grid.n());
        Field phi(grid.n());
        double mass = 0.0;
        for (std::size_t j = 0; j < grid.n(); ++j) {
            const double x = xs[j];
            double amplitude = 0.0;
            for (const auto& bump : shape) {
                const double d = x - bump.mid;
                amplitude += bump.weight * std::exp(-d * d / (4.0 * bump.width * bump.width));
            }
            rho[j] = amplitude * amplitude;
            mass += rho[j];
            double phase = boost * (x - center) / params.hbar;
            for (int q = 0; q < 3; ++q) {
                const double arg = (q + 1) * (x - center) / scale;
                phase += alpha[q] * std::cos(arg) + beta[q] * std::sin(arg);
            }
            phi[j] = phase;
        }
        mass *= grid.dx();
        for (auto& r : rho) r /= mass;
        corpus.push_back(compose(grid, rho, phi, 0.0, params));
    }
    return corpus;
}

} // namespace edlab
