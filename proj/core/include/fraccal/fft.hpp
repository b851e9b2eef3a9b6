#pragma once

#include <complex>
#include <vector>

namespace fraccal {

using cvec = std::vector<std::complex<double>>;

// Unnormalized forward DFT and normalized inverse on an n0 x n1 row-major grid
// (n1 = 1 for 1D). Safe to call concurrently.
cvec fft_forward(const std::vector<double>& x, int n0, int n1);
cvec fft_forward(const cvec& x, int n0, int n1);
cvec fft_inverse(const cvec& X, int n0, int n1);
std::vector<double> fft_inverse_real(const cvec& X, int n0, int n1);

// angular frequencies 2 pi k / period for DFT index j of an N-point axis
double fft_frequency(int j, int N, double period);

}  // namespace fraccal
