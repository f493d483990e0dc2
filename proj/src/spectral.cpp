#include "edlab/spectral.hpp"

#include "edlab/error.hpp"
#include "edlab/grid_state.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <utility>

namespace edlab::spectral {

namespace {

// FFTW planning is not thread-safe, execution with the new-array interface is.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(std::size_t n, int sign) {
        std::lock_guard lock{mutex_};
        auto key = std::make_pair(n, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        auto* in = fftw_alloc_complex(n);
        auto* out = fftw_alloc_complex(n);
        fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), in, out, sign,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(in);
        fftw_free(out);
        if (plan == nullptr) throw NumericAbort{"FFTW failed to create a plan"};
        plans_.emplace(key, plan);
        return plan;
    }

    PlanCache(const PlanCache&) = delete;
    PlanCache& operator=(const PlanCache&) = delete;

private:
    PlanCache() = default;
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    std::mutex mutex_;
    std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

CField transform(std::span<const cplx> in, int sign) {
    CField out(in.size());
    CField scratch(in.begin(), in.end()); // FFTW takes a non-const input pointer
    fftw_plan plan = PlanCache::instance().get(in.size(), sign);
    fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(scratch.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

CField to_complex(std::span<const double> f) { return CField(f.begin(), f.end()); }

Field real_part(const CField& f) {
    Field out(f.size());
    for (std::size_t j = 0; j < f.size(); ++j) out[j] = f[j].real();
    return out;
}

} // namespace

std::vector<double> wavenumbers(const Grid1D& grid) {
    const std::size_t n = grid.n();
    const double scale = 2.0 * std::numbers::pi / grid.length();
    std::vector<double> k(n);
    for (std::size_t j = 0; j < n; ++j) {
        const auto signed_j = j < n / 2 ? static_cast<double>(j)
                                        : static_cast<double>(j) - static_cast<double>(n);
        k[j] = scale * signed_j;
    }
    return k;
}

CField forward(std::span<const cplx> samples) { return transform(samples, FFTW_FORWARD); }

CField backward(std::span<const cplx> modes) {
    CField out = transform(modes, FFTW_BACKWARD);
    const double inv_n = 1.0 / static_cast<double>(modes.size());
    for (auto& c : out) c *= inv_n;
    return out;
}

CField derivative(const Grid1D& grid, std::span<const cplx> f) {
    CField modes = forward(f);
    const auto k = wavenumbers(grid);
    for (std::size_t j = 0; j < modes.size(); ++j) modes[j] *= cplx{0.0, k[j]};
    modes[grid.n() / 2] = 0.0;
    return backward(modes);
}

Field derivative(const Grid1D& grid, std::span<const double> f) {
    return real_part(derivative(grid, to_complex(f)));
}

CField second_derivative(const Grid1D& grid, std::span<const cplx> f) {
    CField modes = forward(f);
    const auto k = wavenumbers(grid);
    for (std::size_t j = 0; j < modes.size(); ++j) modes[j] *= -k[j] * k[j];
    return backward(modes);
}

Field second_derivative(const Grid1D& grid, std::span<const double> f) {
    return real_part(second_derivative(grid, to_complex(f)));
}

CField apply_kinetic_phase(const Grid1D& grid, std::span<const cplx> psi, double coeff) {
    CField modes = forward(psi);
    const auto k = wavenumbers(grid);
    for (std::size_t j = 0; j < modes.size(); ++j) modes[j] *= std::polar(1.0, -coeff * k[j] * k[j]);
    return backward(modes);
}

} // namespace edlab::spectral
