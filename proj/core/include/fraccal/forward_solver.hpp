#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "fraccal/conductivity.hpp"
#include "fraccal/frac_operator.hpp"

namespace fraccal {

struct ExteriorDatum {
  GeometryPtr geo;
  std::vector<double> f;
  std::string label;

  GridField field() const { return GridField(geo, f); }
};

// throws ConfigError unless f vanishes on every node of the closed domain
ExteriorDatum make_exterior_datum(GeometryPtr geo, std::vector<double> f, std::string label = {});

struct Solution {
  GridField u;
  double residual = 0;
  double energy = 0;
};

using Coefficient = std::variant<Conductivity, Potential>;
std::string equation_tag(const Coefficient& c);

enum class SolveRoute { cholesky, ldlt };

// Galerkin system on the nodal basis of the closed domain's complement:
//   A v = h^n [ g o L(g o v) + c o v ]
// conductivity: g = gamma^{1/2}, c = -g o L(m)  (so that v^T A w = B_gamma(v, w))
// Schrodinger:  g = 1,           c = q
class GalerkinSystem {
 public:
  GalerkinSystem(const Conductivity& gamma, const FracOperator& op, SolveRoute route = SolveRoute::cholesky);
  GalerkinSystem(const Potential& q, const FracOperator& op, SolveRoute route = SolveRoute::cholesky);
  GalerkinSystem(const Coefficient& c, const FracOperator& op, SolveRoute route = SolveRoute::cholesky);

  // full-grid matrix-free apply
  std::vector<double> apply(const std::vector<double>& v) const;
  double form(const std::vector<double>& u, const std::vector<double>& v) const;
  Solution solve(const ExteriorDatum& f, double tol = 1e-10) const;
  double smallest_eigenvalue() const;

  const Eigen::MatrixXd& interior_matrix() const { return A_; }
  const std::vector<std::size_t>& interior() const { return interior_; }
  const GeometryPtr& geometry() const { return geo_; }
  const std::string& tag() const { return tag_; }

 private:
  void assemble(const FracOperator& op);

  GeometryPtr geo_;
  std::vector<double> symbol_;
  std::vector<double> g_, c_;
  std::vector<std::size_t> interior_;
  Eigen::MatrixXd A_;
  SolveRoute route_;
  std::shared_ptr<Eigen::LLT<Eigen::MatrixXd>> llt_;
  std::shared_ptr<Eigen::LDLT<Eigen::MatrixXd>> ldlt_;
  std::string tag_;
};

Solution solve_conductivity(const Conductivity& gamma, const ExteriorDatum& f, const FracOperator& op,
                            double tol = 1e-10);
Solution solve_schrodinger(const Potential& q, const ExteriorDatum& f, const FracOperator& op, double tol = 1e-10);
// smallest eigenvalue of the interior Galerkin matrix
double coercivity_check(const Coefficient& c, const FracOperator& op);

}  // namespace fraccal
