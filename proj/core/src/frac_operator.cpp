#include "fraccal/frac_operator.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fraccal/conductivity.hpp"
#include "fraccal/errors.hpp"
#include "fraccal/fft.hpp"
#include "fraccal/special.hpp"
#include "hash.hpp"

namespace fraccal {

namespace {

std::vector<double> xi_squared(const GeometryConfig& g) {
  std::vector<double> out(g.size());
  const double P = g.period();
  if (g.n == 1) {
    for (int j = 0; j < g.N; ++j) {
      double k = fft_frequency(j, g.N, P);
      out[j] = k * k;
    }
  } else {
    for (int a = 0; a < g.N; ++a) {
      double ka = fft_frequency(a, g.N, P);
      for (int b = 0; b < g.N; ++b) {
        double kb = fft_frequency(b, g.N, P);
        out[static_cast<std::size_t>(a) * g.N + b] = ka * ka + kb * kb;
      }
    }
  }
  return out;
}

std::vector<double> multiply_symbol(const std::vector<double>& u, const std::vector<double>& sym,
                                    const GeometryConfig& g) {
  auto d = g.dims();
  cvec U = fft_forward(u, d[0], d[1]);
  for (std::size_t k = 0; k < U.size(); ++k) U[k] *= sym[k];
  return fft_inverse_real(U, d[0], d[1]);
}

// signed offset of a DFT index
int signed_offset(int j, int N) { return j <= N / 2 ? j : j - N; }

// sixth-order stencils, coefficient of offset +-k (k = 0..4)
constexpr double kD1[] = {0.0, 3.0 / 4, -3.0 / 20, 1.0 / 60, 0.0};
constexpr double kD2[] = {-49.0 / 18, 3.0 / 2, -3.0 / 20, 1.0 / 90, 0.0};
constexpr double kD3[] = {0.0, -61.0 / 30, 169.0 / 120, -3.0 / 10, 7.0 / 240};
constexpr double kD4[] = {91.0 / 8, -122.0 / 15, 169.0 / 60, -2.0 / 5, 7.0 / 240};

// integral of |y|^{-b} over the plane outside the square centred at (cx, cy) with half-side B
double outside_square_integral(double cx, double cy, double B, double b) {
  using GL = boost::math::quadrature::gauss<double, 40>;
  // side at distance D from the origin, tangential coordinate over [t0, t1]
  auto side = [b](double D, double t0, double t1) {
    auto f = [D, b](double t) { return D * std::pow(D * D + t * t, -b / 2) / (b - 2); };
    return GL::integrate(f, t0, t1);
  };
  return side(cx + B, cy - B, cy + B) + side(B - cx, cy - B, cy + B) + side(cy + B, cx - B, cx + B) +
         side(B - cy, cx - B, cx + B);
}

double reduce_periodic(double r, double P) { return r - P * std::round(r / P); }

}  // namespace

std::string to_string(OperatorMode m) { return m == OperatorMode::spectral ? "spectral" : "quadrature"; }

OperatorMode operator_mode_from_string(const std::string& s) {
  if (s == "spectral") return OperatorMode::spectral;
  if (s == "quadrature") return OperatorMode::quadrature;
  throw ConfigError("unknown operator mode '" + s + "' (spectral | quadrature)");
}

double periodized_kernel_1d(double r, double P, double a) {
  double t = reduce_periodic(r, P) / P;
  t = std::abs(t);
  if (t == 0.0) throw ConfigError("periodized kernel evaluated at a lattice point");
  return std::pow(P, -a) * (hurwitz_zeta(a, t) + hurwitz_zeta(a, 1.0 - t));
}

double periodized_kernel_2d(double rx, double ry, double P, double a) {
  rx = reduce_periodic(rx, P);
  ry = reduce_periodic(ry, P);
  if (rx == 0.0 && ry == 0.0) throw ConfigError("periodized kernel evaluated at a lattice point");
  constexpr int M = 16;
  double sum = 0.0;
  for (int i = -M; i <= M; ++i) {
    double x = rx + P * i;
    for (int j = -M; j <= M; ++j) {
      double y = ry + P * j;
      sum += std::pow(x * x + y * y, -a / 2);
    }
  }
  // remaining images: midpoint rule over P x P cells, with its second-order correction
  const double B = (M + 0.5) * P;
  double tail = outside_square_integral(rx, ry, B, a) - P * P / 24 * a * a * outside_square_integral(rx, ry, B, a + 2);
  return sum + tail / (P * P);
}

FracOperator::FracOperator(GeometryPtr geo, OperatorMode mode, bool free_space)
    : FracOperator(geo, mode, geo ? geo->s : 0.0, free_space) {}

FracOperator::FracOperator(GeometryPtr geo, OperatorMode mode, double s, bool free_space)
    : geo_(std::move(geo)), s_(s), mode_(mode), free_space_(free_space) {
  if (!geo_) throw ConfigError("operator without geometry");
  if (!(s > 0 && s < 1)) throw ConfigError("fractional order s must lie in (0,1)");
  cns_ = frac_constant(geo_->n, s_);
  if (mode_ == OperatorMode::spectral)
    build_spectral();
  else
    build_quadrature();
  if (free_space_) {
    // image kernel W = C h^n (K_per - |r|^{-a}) on the doubled grid for a linear convolution
    const auto& g = *geo_;
    const int N = g.N, M2 = 2 * N;
    const double h = g.h(), P = g.period(), a = g.n + 2 * s_;
    auto W = std::make_shared<std::vector<double>>(g.n == 1 ? M2 : static_cast<std::size_t>(M2) * M2, 0.0);
    if (g.n == 1) {
      for (int e = -(N - 1); e <= N - 1; ++e) {
        double t = std::abs(e) * h / P;
        double w = e == 0 ? 2 * riemann_zeta(a) : hurwitz_zeta(a, 1 + t) + hurwitz_zeta(a, 1 - t);
        (*W)[(e + M2) % M2] = cns_ * h * std::pow(P, -a) * w;
      }
    } else {
      // symmetric in |ex|, |ey| and under swapping them
      std::vector<double> quad(static_cast<std::size_t>(N) * N);
#pragma omp parallel for schedule(dynamic)
      for (int ex = 0; ex < N; ++ex)
        for (int ey = 0; ey <= ex; ++ey) {
          double v;
          if (ex == 0 && ey == 0) {
            v = std::pow(P, -a) * epstein_zeta_z2(a / 2);
          } else {
            double rx = ex * h, ry = ey * h;
            v = periodized_kernel_2d(rx, ry, P, a) - std::pow(rx * rx + ry * ry, -a / 2);
          }
          quad[static_cast<std::size_t>(ex) * N + ey] = v;
          quad[static_cast<std::size_t>(ey) * N + ex] = v;
        }
      for (int ex = -(N - 1); ex <= N - 1; ++ex)
        for (int ey = -(N - 1); ey <= N - 1; ++ey)
          (*W)[static_cast<std::size_t>((ex + M2) % M2) * M2 + (ey + M2) % M2] =
              cns_ * h * h * quad[static_cast<std::size_t>(std::abs(ex)) * N + std::abs(ey)];
    }
    image_kernel_ = W;
  }
}

void FracOperator::build_spectral() {
  const auto& g = *geo_;
  auto k2 = xi_squared(g);
  symbol_.resize(k2.size());
  for (std::size_t k = 0; k < k2.size(); ++k) symbol_[k] = std::pow(k2[k], s_);
  auto d = g.dims();
  cvec S(symbol_.begin(), symbol_.end());
  row_ = fft_inverse_real(S, d[0], d[1]);
}

void FracOperator::build_quadrature() {
  const auto& g = *geo_;
  const int N = g.N;
  const double h = g.h(), P = g.period(), a = g.n + 2 * s_;
  weights_.assign(g.size(), 0.0);
  row_.assign(g.size(), 0.0);
  if (g.n == 1) {
    for (int d = 1; d <= N / 2; ++d) {
      double w = h * cns_ * periodized_kernel_1d(d * h, P, a);
      weights_[d] = w;
      weights_[N - d] = w;
    }
    zc2_ = cns_ * riemann_zeta(2 * s_ - 1) * std::pow(h, 2 - 2 * s_);
    zc4_ = cns_ * riemann_zeta(2 * s_ - 3) * std::pow(h, 4 - 2 * s_);
  } else {
    std::vector<double> quad(static_cast<std::size_t>(N / 2 + 1) * (N / 2 + 1));
#pragma omp parallel for schedule(dynamic)
    for (int dx = 0; dx <= N / 2; ++dx)
      for (int dy = 0; dy <= dx; ++dy) {
        if (dx == 0 && dy == 0) continue;
        double v = h * h * cns_ * periodized_kernel_2d(dx * h, dy * h, P, a);
        quad[static_cast<std::size_t>(dx) * (N / 2 + 1) + dy] = v;
        quad[static_cast<std::size_t>(dy) * (N / 2 + 1) + dx] = v;
      }
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        int dx = std::abs(signed_offset(i, N)), dy = std::abs(signed_offset(j, N));
        weights_[static_cast<std::size_t>(i) * N + j] = quad[static_cast<std::size_t>(dx) * (N / 2 + 1) + dy];
      }
    zc2_ = cns_ * epstein_zeta_z2(s_) * std::pow(h, 2 - 2 * s_);
  }
  double total = 0.0;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    row_[k] = -weights_[k];
    total += weights_[k];
  }
  row_[0] += total;
  // near-diagonal correction stencils
  auto add = [&](int ox, int oy, double c) {
    int i = (ox + N) % N, j = (oy + N) % N;
    if (g.n == 1)
      row_[i] += c;
    else
      row_[static_cast<std::size_t>(i) * N + j] += c;
  };
  if (g.n == 1) {
    const double c2 = zc2_ / (h * h), c4 = zc4_ / (12 * h * h * h * h);
    for (int k = 0; k <= 4; ++k) {
      double c = c2 * kD2[k] + c4 * kD4[k];
      add(k, 0, c);
      if (k) add(-k, 0, c);
    }
  } else {
    const double c2 = zc2_ / (4 * h * h);
    for (int k = 0; k <= 3; ++k) {
      double c = c2 * kD2[k];
      if (k == 0) {
        add(0, 0, 2 * c);
      } else {
        add(k, 0, c);
        add(-k, 0, c);
        add(0, k, c);
        add(0, -k, c);
      }
    }
  }
  auto d = g.dims();
  cvec R = fft_forward(row_, d[0], d[1]);
  symbol_.resize(R.size());
  for (std::size_t k = 0; k < R.size(); ++k) symbol_[k] = R[k].real();
}

std::vector<double> FracOperator::form_weights() const {
  if (mode_ == OperatorMode::quadrature) return weights_;
  std::vector<double> w(row_.size());
  for (std::size_t k = 1; k < row_.size(); ++k) w[k] = -row_[k];
  return w;
}

std::vector<double> FracOperator::apply(const std::vector<double>& u) const {
  if (u.size() != geo_->size()) throw GeometryMismatch("operator applied to a field of the wrong size");
  return multiply_symbol(u, symbol_, *geo_);
}

std::vector<double> FracOperator::apply_half(const std::vector<double>& u) const {
  std::vector<double> half(symbol_.size());
  for (std::size_t k = 0; k < half.size(); ++k) half[k] = std::sqrt(std::max(symbol_[k], 0.0));
  return multiply_symbol(u, half, *geo_);
}

std::vector<double> FracOperator::image_term(const std::vector<double>& u) const {
  const auto& g = *geo_;
  const int N = g.N, M2 = 2 * N;
  std::vector<double> pad(g.n == 1 ? M2 : static_cast<std::size_t>(M2) * M2, 0.0);
  if (g.n == 1) {
    std::copy(u.begin(), u.end(), pad.begin());
  } else {
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) pad[static_cast<std::size_t>(i) * M2 + j] = u[static_cast<std::size_t>(i) * N + j];
  }
  const int n1 = g.n == 1 ? 1 : M2;
  cvec U = fft_forward(pad, M2, n1);
  cvec K = fft_forward(*image_kernel_, M2, n1);
  for (std::size_t k = 0; k < U.size(); ++k) U[k] *= K[k];
  auto conv = fft_inverse_real(U, M2, n1);
  std::vector<double> out(u.size());
  if (g.n == 1) {
    std::copy(conv.begin(), conv.begin() + N, out.begin());
  } else {
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) out[static_cast<std::size_t>(i) * N + j] = conv[static_cast<std::size_t>(i) * M2 + j];
  }
  return out;
}

std::string FracOperator::describe() const {
  std::ostringstream os;
  os << to_string(mode_) << " s=" << detail::fmt_double(s_) << (free_space_ ? " free-space" : " periodic");
  return os.str();
}

std::vector<double> frac_laplacian_values(const std::vector<double>& u, const FracOperator& op) {
  auto out = op.apply(u);
  if (op.free_space()) {
    auto img = op.image_term(u);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += img[i];
  }
  return out;
}

GridField frac_laplacian(const GridField& u, const FracOperator& op) {
  require_same_geometry(*u.geo, *op.geometry());
  u.check_finite();
  return GridField(u.geo, frac_laplacian_values(u.values, op));
}

std::vector<double> fd_derivative(const std::vector<double>& u, const GeometryConfig& g, int order, int axis) {
  const double* c = order == 1 ? kD1 : order == 2 ? kD2 : order == 3 ? kD3 : order == 4 ? kD4 : nullptr;
  if (!c) throw ConfigError("fd_derivative: order must be 1..4");
  const bool odd = order % 2 == 1;
  const double scale = std::pow(g.h(), -order);
  const int N = g.N;
  std::vector<double> out(u.size());
  auto at = [&](std::size_t idx, int k) -> double {
    if (g.n == 1) return u[(idx + N + k) % N];
    std::size_t i = idx / N, j = idx % N;
    if (axis == 0) i = (i + N + k) % N;
    else j = (j + N + k) % N;
    return u[i * N + j];
  };
  for (std::size_t idx = 0; idx < u.size(); ++idx) {
    double acc = odd ? 0.0 : c[0] * u[idx];
    for (int k = 1; k <= 4; ++k) {
      if (c[k] == 0.0) continue;
      acc += odd ? c[k] * (at(idx, k) - at(idx, -k)) : c[k] * (at(idx, k) + at(idx, -k));
    }
    out[idx] = acc * scale;
  }
  return out;
}

std::vector<double> fd_laplacian(const std::vector<double>& u, const GeometryConfig& g) {
  auto out = fd_derivative(u, g, 2, 0);
  if (g.n == 2) {
    auto yy = fd_derivative(u, g, 2, 1);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += yy[i];
  }
  return out;
}

namespace {

double form_impl(const GridField& u, const GridField& v, const std::vector<double>* gamma, const FracOperator& op) {
  const auto& g = *op.geometry();
  require_same_geometry(*u.geo, g);
  require_same_geometry(*v.geo, g);
  const std::size_t M = g.size();
  std::vector<double> gs(M, 1.0);
  if (gamma)
    for (std::size_t i = 0; i < M; ++i) gs[i] = std::sqrt((*gamma)[i]);
  const auto kappa = op.form_weights();
  const auto& uu = u.values;
  const auto& vv = v.values;
  double pairs = 0.0;
  if (g.n == 1) {
    // explicit double sum over all node pairs
    const int N = g.N;
    std::vector<double> acc(N);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < N; ++i) {
      double a = 0.0;
      for (int d = 1; d < N; ++d) {
        int j = (i + d) % N;
        a += kappa[d] * gs[j] * (uu[i] - uu[j]) * (vv[i] - vv[j]);
      }
      acc[i] = gs[i] * a;
    }
    for (double a : acc) pairs += a;
  } else {
    // sum_{ij} k_{i-j} g_i g_j (u_i-u_j)(v_i-v_j) by convolutions
    auto d = g.dims();
    cvec K = fft_forward(kappa, d[0], d[1]);
    auto conv = [&](const std::vector<double>& f) {
      cvec F = fft_forward(f, d[0], d[1]);
      for (std::size_t k = 0; k < F.size(); ++k) F[k] *= K[k];
      return fft_inverse_real(F, d[0], d[1]);
    };
    std::vector<double> gu(M), gv(M);
    for (std::size_t i = 0; i < M; ++i) {
      gu[i] = gs[i] * uu[i];
      gv[i] = gs[i] * vv[i];
    }
    auto kg = conv(gs), kgu = conv(gu), kgv = conv(gv);
    for (std::size_t i = 0; i < M; ++i)
      pairs += 2 * gs[i] * uu[i] * vv[i] * kg[i] - gu[i] * kgv[i] - gv[i] * kgu[i];
  }
  double corr = 0.0;
  if (op.mode() == OperatorMode::quadrature) {
    if (g.n == 1) {
      auto u1 = fd_derivative(uu, g, 1), u2 = fd_derivative(uu, g, 2), u3 = fd_derivative(uu, g, 3);
      auto v1 = fd_derivative(vv, g, 1), v2 = fd_derivative(vv, g, 2), v3 = fd_derivative(vv, g, 3);
      auto g1 = fd_derivative(gs, g, 1), g2 = fd_derivative(gs, g, 2);
      for (std::size_t i = 0; i < M; ++i) {
        double p0 = u1[i] * v1[i];
        double p1 = 0.5 * (u1[i] * v2[i] + u2[i] * v1[i]);
        double p2 = u1[i] * v3[i] / 6 + u2[i] * v2[i] / 4 + u3[i] * v1[i] / 6;
        double e0 = gs[i] * gs[i] * p0;
        double e2 = gs[i] * (gs[i] * p2 + g1[i] * p1 + g2[i] * p0 / 2);
        corr += 2 * op.zeta_c2() * e0 + 2 * op.zeta_c4() * e2;
      }
    } else {
      auto ux = fd_derivative(uu, g, 1, 0), uy = fd_derivative(uu, g, 1, 1);
      auto vx = fd_derivative(vv, g, 1, 0), vy = fd_derivative(vv, g, 1, 1);
      for (std::size_t i = 0; i < M; ++i)
        corr += op.zeta_c2() * gs[i] * gs[i] * (ux[i] * vx[i] + uy[i] * vy[i]) / 2;
    }
  }
  return 0.5 * g.cell() * (pairs - corr);
}

}  // namespace

double bilinear_form(const GridField& u, const GridField& v, const Conductivity& gamma, const FracOperator& op) {
  require_same_geometry(*gamma.geo, *op.geometry());
  return form_impl(u, v, &gamma.gamma, op);
}

double bilinear_form(const GridField& u, const GridField& v, const FracOperator& op) {
  return form_impl(u, v, nullptr, op);
}

double frac_gradient_energy(const GridField& u, const Conductivity& gamma, const FracOperator& op) {
  return bilinear_form(u, u, gamma, op);
}

namespace {

double weighted_inner(const cvec& A, const cvec& B, const std::vector<double>& w, const GeometryConfig& g) {
  double acc = 0.0;
  for (std::size_t k = 0; k < A.size(); ++k) acc += w[k] * (A[k].real() * B[k].real() + A[k].imag() * B[k].imag());
  return acc * g.cell() / static_cast<double>(g.size());
}

}  // namespace

double fourier_energy(const GridField& u, const GridField& v, double s) {
  require_same_geometry(*u.geo, *v.geo);
  const auto& g = *u.geo;
  auto k2 = xi_squared(g);
  for (auto& k : k2) k = std::pow(k, s);
  auto d = g.dims();
  return weighted_inner(fft_forward(u.values, d[0], d[1]), fft_forward(v.values, d[0], d[1]), k2, g);
}

double fourier_energy(const GridField& u, double s) { return fourier_energy(u, u, s); }

std::vector<std::vector<double>> hs_gram(const std::vector<GridField>& basis, double s) {
  if (basis.empty()) throw ConfigError("hs_gram: empty basis");
  const auto& g = *basis.front().geo;
  for (const auto& b : basis) require_same_geometry(*b.geo, g);
  auto w = xi_squared(g);
  for (auto& k : w) k = std::pow(1.0 + k, s);
  auto d = g.dims();
  std::vector<cvec> F(basis.size());
  for (std::size_t i = 0; i < basis.size(); ++i) F[i] = fft_forward(basis[i].values, d[0], d[1]);
  const int B = static_cast<int>(basis.size());
  std::vector<std::vector<double>> G(B, std::vector<double>(B));
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < B; ++i)
    for (int j = 0; j <= i; ++j) {
      double v = weighted_inner(F[i], F[j], w, g);
      G[i][j] = v;
      G[j][i] = v;
    }
  return G;
}

double hs_inner(const GridField& a, const GridField& b, double s) { return hs_gram({a, b}, s)[0][1]; }

double hs_norm(const GridField& a, double s) { return std::sqrt(hs_gram({a}, s)[0][0]); }

std::vector<double> bessel_potential(const GridField& u, double t) {
  const auto& g = *u.geo;
  auto w = xi_squared(g);
  for (auto& k : w) k = std::pow(1.0 + k, t / 2);
  return multiply_symbol(u.values, w, g);
}

}  // namespace fraccal
