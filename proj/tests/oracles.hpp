// Independent reference computations for the unit and acceptance tests.
#pragma once

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <random>

namespace oracle {

inline double frac_constant(int n, double s) {
  return std::pow(4.0, s) * std::tgamma(n / 2.0 + s) / (std::pow(std::numbers::pi, n / 2.0) * std::abs(std::tgamma(-s)));
}

// (-D)^s u(x) on the real line for u(y) = (1 - y^2)_+^s, |x| < 1, by adaptive double-exponential quadrature of
//   C_{1,s} int_0^inf (2u(x) - u(x+z) - u(x-z)) z^{-1-2s} dz
inline double getoor_1d(double x, double s) {
  auto u = [s](double y) { return std::abs(y) < 1 ? std::pow(1 - y * y, s) : 0.0; };
  auto f = [&](double z) {
    const double num = 2 * u(x) - u(x + z) - u(x - z);
    return num == 0.0 ? 0.0 : num * std::pow(z, -1 - 2 * s);
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  const double a = 1 - std::abs(x), b = 1 + std::abs(x);
  // the second difference cancels near z = 0, so stay away from that endpoint with Gauss-Kronrod
  const double d = 1e-2 * a;
  double I = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, d, 8, 1e-13);
  I += ts.integrate(f, d, a) + ts.integrate(f, a, b);
  I += 2 * u(x) * std::pow(b, -2 * s) / (2 * s);  // both shifted samples vanish beyond b
  return frac_constant(1, s) * I;
}

inline double getoor_closed(int n, double s) {
  return std::pow(2.0, 2 * s) * std::tgamma(1 + s) * std::tgamma(n / 2.0 + s) / std::tgamma(n / 2.0);
}

// Hurwitz zeta by direct summation plus an Euler-Maclaurin tail integral (s > 1 only)
inline double hurwitz_direct(double s, double q, int terms = 200000) {
  double acc = 0;
  for (int k = 0; k < terms; ++k) acc += std::pow(k + q, -s);
  double t = terms + q;
  return acc + std::pow(t, 1 - s) / (s - 1) + 0.5 * std::pow(t, -s);
}

// 1D periodized kernel by brute-force image sums with an integral tail
inline double periodized_direct(double r, double P, double a, int M = 20000) {
  double acc = 0;
  for (int m = -M; m <= M; ++m) {
    double d = std::abs(r + P * m);
    if (d > 0) acc += std::pow(d, -a);
  }
  // tail beyond |m| > M on both sides, midpoint-corrected
  double t = (M + 0.5) * P;
  acc += 2 * std::pow(t, 1 - a) / ((a - 1) * P);
  return acc;
}

// largest generalized singular value via the symmetric-definite generalized eigenproblem
// [0 M; M^T 0] v = lambda diag(Gr, Gc) v
inline double generalized_sv(const Eigen::MatrixXd& M, const Eigen::MatrixXd& Gr, const Eigen::MatrixXd& Gc) {
  const auto r = M.rows(), c = M.cols();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(r + c, r + c), B = Eigen::MatrixXd::Zero(r + c, r + c);
  A.topRightCorner(r, c) = M;
  A.bottomLeftCorner(c, r) = M.transpose();
  B.topLeftCorner(r, r) = Gr;
  B.bottomRightCorner(c, c) = Gc;
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// random search lower bound: max over samples of |a^T M b| / (|a|_Gr |b|_Gc)
inline double sampled_norm(const Eigen::MatrixXd& M, const Eigen::MatrixXd& Gr, const Eigen::MatrixXd& Gc, int samples,
                           unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  double best = 0;
  for (int k = 0; k < samples; ++k) {
    Eigen::VectorXd a(M.rows()), b(M.cols());
    for (auto& v : a) v = nd(rng);
    for (auto& v : b) v = nd(rng);
    // a few power steps from the random start
    for (int it = 0; it < 30; ++it) {
      a = Gr.ldlt().solve(M * b);
      b = Gc.ldlt().solve(M.transpose() * a);
    }
    double v = std::abs(a.dot(M * b)) / std::sqrt(a.dot(Gr * a) * b.dot(Gc * b));
    best = std::max(best, v);
  }
  return best;
}

}  // namespace oracle
