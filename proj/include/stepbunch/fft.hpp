#pragma once

#include <complex>
#include <span>
#include <vector>

namespace stepbunch {

using cplx = std::complex<double>;

bool is_power_of_two(std::size_t n);

// Real <-> half-spectrum DFT on N points, backed by FFTW.
//   forward: c_k = (1/N) sum_j f_j exp(-2 pi i j k / N),  k = 0..N/2
//   inverse: f_j = sum_{k=-N/2+1}^{N/2} c_k exp(2 pi i j k / N) with
//            c_{-k} = conj(c_k)
// Plans are cached per size; execution is thread-safe.
std::vector<cplx> rfft(std::span<const double> f);
std::vector<double> irfft(std::span<const cplx> c, std::size_t n);

}  // namespace stepbunch
