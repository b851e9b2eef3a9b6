#include "fraccal/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

namespace fraccal {

namespace {

std::mutex plan_mutex;

fftw_plan get_plan(int n0, int n1, int sign) {
  static std::map<std::tuple<int, int, int>, fftw_plan> plans;
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto key = std::make_tuple(n0, n1, sign);
  auto it = plans.find(key);
  if (it != plans.end()) return it->second;
  // planning on scratch arrays; execution uses the new-array interface
  std::vector<std::complex<double>> a(static_cast<std::size_t>(n0) * n1), b(a.size());
  auto* in = reinterpret_cast<fftw_complex*>(a.data());
  auto* out = reinterpret_cast<fftw_complex*>(b.data());
  unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  fftw_plan p = n1 == 1 ? fftw_plan_dft_1d(n0, in, out, sign, flags)
                        : fftw_plan_dft_2d(n0, n1, in, out, sign, flags);
  plans.emplace(key, p);
  return p;
}

cvec run(cvec in, int n0, int n1, int sign) {
  cvec out(in.size());
  fftw_execute_dft(get_plan(n0, n1, sign), reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

}  // namespace

cvec fft_forward(const std::vector<double>& x, int n0, int n1) {
  return run(cvec(x.begin(), x.end()), n0, n1, FFTW_FORWARD);
}

cvec fft_forward(const cvec& x, int n0, int n1) { return run(x, n0, n1, FFTW_FORWARD); }

cvec fft_inverse(const cvec& X, int n0, int n1) {
  cvec out = run(X, n0, n1, FFTW_BACKWARD);
  const double scale = 1.0 / (static_cast<double>(n0) * n1);
  for (auto& v : out) v *= scale;
  return out;
}

std::vector<double> fft_inverse_real(const cvec& X, int n0, int n1) {
  cvec c = fft_inverse(X, n0, n1);
  std::vector<double> out(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out[i] = c[i].real();
  return out;
}

double fft_frequency(int j, int N, double period) {
  int k = j <= N / 2 - 1 ? j : j - N;
  if (j == N / 2) k = -N / 2;
  return 2.0 * std::numbers::pi * k / period;
}

}  // namespace fraccal
