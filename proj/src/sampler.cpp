#include "edlab/sampler.hpp"

#include "edlab/error.hpp"
#include "edlab/philox.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace edlab {

namespace {

// Draw index 0 of every stream belongs to initialization; step s uses index s.
constexpr std::uint64_t kInitIndex = 0;

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double wrap(const Grid1D& grid, double x) {
    const double lo = grid.x_min() - 0.5 * grid.dx();
    const double length = grid.length();
    double y = x - lo;
    if (y >= 0.0 && y < length) return x;
    y -= length * std::floor(y / length);
    if (y >= length) y = 0.0;
    return lo + y;
}

std::size_t cell_index(const Grid1D& grid, double x) {
    const auto n = static_cast<long long>(grid.n());
    auto j = static_cast<long long>(std::floor((x - grid.x_min()) / grid.dx() + 0.5));
    j %= n;
    if (j < 0) j += n;
    return static_cast<std::size_t>(j);
}

unsigned resolve_threads(unsigned threads) { return threads == 0 ? default_threads() : threads; }

} // namespace

std::uint64_t walker_stream_id(std::uint64_t seed, std::uint64_t walker) {
    // splitmix64 is a bijection, so distinct walkers get distinct ids under one seed
    return splitmix64(walker ^ splitmix64(seed));
}

unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

Ensemble init_ensemble(const Grid1D& grid, std::span<const double> rho0, std::size_t M, std::uint64_t seed,
                       unsigned threads) {
    if (M == 0) throw ContractError{"init_ensemble: M must be >= 1"};
    if (rho0.size() != grid.n()) throw ContractError{"init_ensemble: density size differs from grid"};
    std::vector<double> cumulative(grid.n());
    double total = 0.0;
    for (std::size_t j = 0; j < grid.n(); ++j) {
        if (!(rho0[j] >= 0.0)) throw ContractError{"init_ensemble: negative or NaN density sample"};
        total += rho0[j] * grid.dx();
        cumulative[j] = total;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ContractError{"init_ensemble: density not normalized within 1e-9"};
    for (auto& c : cumulative) c /= total;

    Ensemble e;
    e.seed = seed;
    e.positions.resize(M);
    e.stream_ids.resize(M);
    detail::parallel_chunks(M, resolve_threads(threads), [&](std::size_t begin, std::size_t end, unsigned) {
        for (std::size_t w = begin; w < end; ++w) {
            e.stream_ids[w] = walker_stream_id(seed, w);
            const double u = philox::uniforms(e.stream_ids[w], kInitIndex, seed).first;
            auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
            auto j = static_cast<std::size_t>(std::min<std::ptrdiff_t>(
                std::distance(cumulative.begin(), it), static_cast<std::ptrdiff_t>(grid.n()) - 1));
            const double below = j == 0 ? 0.0 : cumulative[j - 1];
            const double width = cumulative[j] - below;
            const double frac = width > 0.0 ? std::clamp((u - below) / width, 0.0, std::nextafter(1.0, 0.0)) : 0.5;
            e.positions[w] = grid.x(j) + (frac - 0.5) * grid.dx();
        }
    });
    return e;
}

DriftField drift_field(const WaveState& state) {
    HydroFields h = decompose(state);
    return DriftField{std::move(h.b), std::move(h.resolved)};
}

DriftField zero_drift(const Grid1D& grid) {
    return DriftField{Field(grid.n(), 0.0), std::vector<unsigned char>(grid.n(), 1)};
}

Ensemble step_ensemble(const Ensemble& e, const Grid1D& grid, const DriftField& drift, double dt,
                       const PhysicalParams& params, unsigned threads) {
    if (!(dt > 0.0)) throw ContractError{"step_ensemble: dt must be > 0"};
    if (drift.b.size() != grid.n() || drift.resolved.size() != grid.n()) {
        throw ContractError{"step_ensemble: drift field size differs from grid"};
    }
    for (double value : drift.b) {
        if (!std::isfinite(value)) throw NumericAbort{"step_ensemble: non-finite drift"};
    }
    const double noise = std::sqrt(params.sigma2_over_tau() * dt);
    const std::uint64_t index = e.steps_taken + 1;
    const std::size_t n = grid.n();
    const unsigned parts = resolve_threads(threads);

    Ensemble next = e;
    std::vector<std::uint64_t> flagged(parts, 0);
    detail::parallel_chunks(e.size(), parts, [&](std::size_t begin, std::size_t end, unsigned part) {
        for (std::size_t w = begin; w < end; ++w) {
            const double x = e.positions[w];
            const double s = (x - grid.x_min()) / grid.dx();
            const double base = std::floor(s);
            const double frac = s - base;
            auto i = static_cast<long long>(base) % static_cast<long long>(n);
            if (i < 0) i += static_cast<long long>(n);
            const auto left = static_cast<std::size_t>(i);
            const std::size_t right = (left + 1) % n;
            if (!drift.resolved[left] || !drift.resolved[right]) ++flagged[part];
            const double b = (1.0 - frac) * drift.b[left] + frac * drift.b[right];
            const double dw = noise * philox::normal(e.stream_ids[w], index, e.seed);
            next.positions[w] = wrap(grid, x + b * dt + dw);
        }
    });
    next.t = e.t + dt;
    next.steps_taken = index;
    next.excised_walker_steps = e.excised_walker_steps + std::accumulate(flagged.begin(), flagged.end(), std::uint64_t{0});
    return next;
}

Field ensemble_density(const Ensemble& e, const Grid1D& grid, unsigned threads) {
    const unsigned parts = resolve_threads(threads);
    std::vector<std::vector<std::uint64_t>> counts(parts, std::vector<std::uint64_t>(grid.n(), 0));
    detail::parallel_chunks(e.size(), parts, [&](std::size_t begin, std::size_t end, unsigned part) {
        for (std::size_t w = begin; w < end; ++w) ++counts[part][cell_index(grid, e.positions[w])];
    });
    Field density(grid.n(), 0.0);
    const double scale = 1.0 / (static_cast<double>(e.size()) * grid.dx());
    for (std::size_t j = 0; j < grid.n(); ++j) {
        std::uint64_t total = 0;
        for (const auto& part : counts) total += part[j];
        density[j] = static_cast<double>(total) * scale;
    }
    return density;
}

DistributionDistance distribution_distance(const Grid1D& grid, std::span<const double> empirical,
                                           std::span<const double> rho) {
    if (empirical.size() != grid.n() || rho.size() != grid.n()) {
        throw ContractError{"distribution_distance: field sizes differ from grid"};
    }
    DistributionDistance d;
    double cdf_a = 0.0;
    double cdf_b = 0.0;
    double abs_sum = 0.0;
    for (std::size_t j = 0; j < grid.n(); ++j) {
        cdf_a += empirical[j] * grid.dx();
        cdf_b += rho[j] * grid.dx();
        d.ks = std::max(d.ks, std::abs(cdf_a - cdf_b));
        abs_sum += std::abs(empirical[j] - rho[j]);
    }
    d.tv = 0.5 * abs_sum * grid.dx();
    return d;
}

SampleMoments sample_moments(const Ensemble& e) {
    const double count = static_cast<double>(e.size());
    double mean = 0.0;
    for (double x : e.positions) mean += x;
    mean /= count;
    double sq = 0.0;
    for (double x : e.positions) sq += (x - mean) * (x - mean);
    return {mean, e.size() > 1 ? sq / (count - 1.0) : 0.0};
}

} // namespace edlab
