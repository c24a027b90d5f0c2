#pragma once

#include <complex>
#include <vector>

#include "simmst/tensor.hpp"

namespace simmst {

// Forward complex FFT (sign -1 in the exponent), any length >= 1. Recursive
// radix-2 splits with a direct DFT once the length turns odd.
void fft_complex(std::vector<std::complex<double>>& a);

// Real spectrum halves: re and im both have last dimension floor(n/2)+1.
struct Spectrum {
  Tensor re;
  Tensor im;
};

// Real-input FFT over the last axis. im at bin 0 is always 0, and at the
// Nyquist bin too when n is even.
Spectrum real_fft(const Tensor& x);

// Inverse of real_fft for signals of length n. The imaginary parts of bin 0
// and (for even n) the Nyquist bin cannot influence a real signal; they are
// ignored and their gradients are zero.
Tensor inverse_real_fft(const Spectrum& s, int64_t n);

}  // namespace simmst
