#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fraccal/geometry.hpp"

namespace fraccal {

struct Conductivity;

enum class OperatorMode { spectral, quadrature };

std::string to_string(OperatorMode m);
OperatorMode operator_mode_from_string(const std::string& s);

// Discrete (-Delta)^s on the periodic box. Both modes are translation invariant,
// so each is a circulant with first row `row()` and real discrete symbol `symbol()`.
//
// spectral:   symbol |xi|^{2s} on the DFT frequencies.
// quadrature: trapezoid rule for C_{n,s}/2 * int (2u(x)-u(x+z)-u(x-z)) K_per(z) dz with the
//             periodized kernel K_per, plus the generalized Euler-Maclaurin corrections of the
//             |z|^{-n-2s} singularity (zeta(2s-1) h^{2-2s} u'' + zeta(2s-3) h^{4-2s} u''''/12 in 1D,
//             Epstein zeta term h^{2-2s} Delta u in 2D).
//
// free_space adds the image correction that turns the periodic operator into the whole-space
// operator applied to the zero extension of u (u must vanish near the box boundary).
class FracOperator {
 public:
  FracOperator(GeometryPtr geo, OperatorMode mode, bool free_space = false);
  FracOperator(GeometryPtr geo, OperatorMode mode, double s, bool free_space = false);

  const GeometryPtr& geometry() const { return geo_; }
  double s() const { return s_; }
  double cns() const { return cns_; }
  OperatorMode mode() const { return mode_; }
  bool free_space() const { return free_space_; }

  const std::vector<double>& row() const { return row_; }
  const std::vector<double>& symbol() const { return symbol_; }
  // quadrature pair weights h^n C K_per(x_d) by offset index (zero at offset 0); empty in spectral mode
  const std::vector<double>& pair_weights() const { return weights_; }
  // pair weights of the bilinear form: quadrature weights, or -row() off the diagonal in spectral mode
  std::vector<double> form_weights() const;

  // periodic circulant apply, no free-space term
  std::vector<double> apply(const std::vector<double>& u) const;
  // sqrt of the symbol applied: (-Delta)^{s/2}
  std::vector<double> apply_half(const std::vector<double>& u) const;

  // singular-correction coefficients of the bilinear form (quadrature mode)
  double zeta_c2() const { return zc2_; }
  double zeta_c4() const { return zc4_; }

  std::string describe() const;

 private:
  void build_spectral();
  void build_quadrature();
  std::vector<double> image_term(const std::vector<double>& u) const;

  GeometryPtr geo_;
  double s_;
  double cns_;
  OperatorMode mode_;
  bool free_space_;
  std::vector<double> row_;
  std::vector<double> symbol_;
  std::vector<double> weights_;
  double zc2_ = 0.0;
  double zc4_ = 0.0;
  mutable std::shared_ptr<std::vector<double>> image_kernel_;

  friend std::vector<double> frac_laplacian_values(const std::vector<double>&, const FracOperator&);
};

std::vector<double> frac_laplacian_values(const std::vector<double>& u, const FracOperator& op);
GridField frac_laplacian(const GridField& u, const FracOperator& op);

// (C/2) double quadrature of g(x)g(y)(u(x)-u(y))(v(x)-v(y))|x-y|^{-n-2s}, g = gamma^{1/2}
double bilinear_form(const GridField& u, const GridField& v, const Conductivity& gamma, const FracOperator& op);
// same with g = 1
double bilinear_form(const GridField& u, const GridField& v, const FracOperator& op);
double frac_gradient_energy(const GridField& u, const Conductivity& gamma, const FracOperator& op);

// ||(-Delta)^{s/2} u||^2 and <(-Delta)^{s/2}u, (-Delta)^{s/2}v> from the Fourier side
double fourier_energy(const GridField& u, const GridField& v, double s);
double fourier_energy(const GridField& u, double s);

// discrete H^s inner products with weight (1+|xi|^2)^s
std::vector<std::vector<double>> hs_gram(const std::vector<GridField>& basis, double s);
double hs_inner(const GridField& a, const GridField& b, double s);
double hs_norm(const GridField& a, double s);
// Bessel potential J^t u = F^{-1}[(1+|xi|^2)^{t/2} u^]
std::vector<double> bessel_potential(const GridField& u, double t);

// sixth-order periodic finite differences, order 1..4 (1D) and Laplacian (1D/2D)
std::vector<double> fd_derivative(const std::vector<double>& u, const GeometryConfig& g, int order, int axis = 0);
std::vector<double> fd_laplacian(const std::vector<double>& u, const GeometryConfig& g);

// periodized kernel sum_m |r + P m|^{-a}, in 1D via Hurwitz zeta and in 2D by lattice summation
double periodized_kernel_1d(double r, double P, double a);
double periodized_kernel_2d(double rx, double ry, double P, double a);

}  // namespace fraccal
