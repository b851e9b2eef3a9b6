#include "fraccal/special.hpp"

#include <boost/math/special_functions/zeta.hpp>
#include <cmath>
#include <numbers>

#include "fraccal/errors.hpp"

namespace fraccal {

namespace {

// B_2 .. B_24
constexpr double kBernoulli[] = {1.0 / 6,          -1.0 / 30,          1.0 / 42,         -1.0 / 30,
                                 5.0 / 66,         -691.0 / 2730,      7.0 / 6,          -3617.0 / 510,
                                 43867.0 / 798,    -174611.0 / 330,    854513.0 / 138,   -236364091.0 / 2730};

}  // namespace

double hurwitz_zeta(double s, double q) {
  if (!(q > 0)) throw ConfigError("hurwitz_zeta: q must be positive");
  if (s == 1.0) throw ConfigError("hurwitz_zeta: pole at s = 1");
  // Euler-Maclaurin: direct sum up to M, then integral, half term and Bernoulli tail
  const int M = 16 + static_cast<int>(std::abs(s));
  double sum = 0.0;
  for (int k = 0; k < M; ++k) sum += std::pow(k + q, -s);
  const double a = q + M;
  sum += std::pow(a, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(a, -s);
  double rising = s;  // s (s+1) ... (s+2j-2)
  double apow = std::pow(a, -s - 1.0);
  double fact = 2.0;  // (2j)!
  for (int j = 1; j <= 12; ++j) {
    double term = kBernoulli[j - 1] / fact * rising * apow;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    rising *= (s + 2 * j - 1) * (s + 2 * j);
    apow /= a * a;
    fact *= (2.0 * j + 1) * (2.0 * j + 2);
  }
  return sum;
}

double riemann_zeta(double s) { return boost::math::zeta(s); }

double dirichlet_beta(double s) {
  return std::pow(4.0, -s) * (hurwitz_zeta(s, 0.25) - hurwitz_zeta(s, 0.75));
}

double epstein_zeta_z2(double s) { return 4.0 * riemann_zeta(s) * dirichlet_beta(s); }

double frac_constant(int n, double s) {
  return std::pow(4.0, s) * std::tgamma(n / 2.0 + s) /
         (std::pow(std::numbers::pi, n / 2.0) * std::abs(std::tgamma(-s)));
}

double getoor_constant(int n, double s) {
  return std::pow(2.0, 2 * s) * std::tgamma(1 + s) * std::tgamma(n / 2.0 + s) / std::tgamma(n / 2.0);
}

}  // namespace fraccal
