#pragma once

// Fourier differentiation on a uniform periodic lattice, backed by FFTW.

#include <complex>
#include <span>
#include <vector>

namespace edlab {

using cplx = std::complex<double>;
using Field = std::vector<double>;
using CField = std::vector<cplx>;

class Grid1D;

namespace spectral {

/// Angular wavenumbers in FFT order: 0, 1, ..., n/2-1, -n/2, ..., -1 (times 2π/L).
std::vector<double> wavenumbers(const Grid1D& grid);

/// Unnormalized forward DFT (sign -1).
CField forward(std::span<const cplx> samples);
/// Inverse DFT including the 1/n factor.
CField backward(std::span<const cplx> modes);

/// First derivative. The Nyquist mode is dropped so the operator is real and anti-symmetric.
CField derivative(const Grid1D& grid, std::span<const cplx> f);
Field derivative(const Grid1D& grid, std::span<const double> f);

/// Second derivative (multiplication by -k², Nyquist kept).
CField second_derivative(const Grid1D& grid, std::span<const cplx> f);
Field second_derivative(const Grid1D& grid, std::span<const double> f);

/// Multiplies every Fourier mode of psi by exp(-i * coeff * k²).
CField apply_kinetic_phase(const Grid1D& grid, std::span<const cplx> psi, double coeff);

} // namespace spectral
} // namespace edlab
