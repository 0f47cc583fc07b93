#pragma once

#include <complex>
#include <span>
#include <vector>

namespace semsec {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

/// Unnormalized forward DFT: X[k] = sum_n x[n] exp(-2 pi i k n / L).
CVec dft(std::span<const cplx> x);

/// Unitary (1/sqrt(L)) forward or inverse DFT. Backed by FFTW; plans are
/// cached per length and the cache is safe to use from several threads.
CVec unitary_dft(std::span<const cplx> x, bool inverse);

}  // namespace semsec
