#pragma once

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <string>
#include <vector>

#include "fraccal/forward_solver.hpp"

namespace fraccal {

enum class BasisKind { bumps, harmonic, probes };
std::string to_string(BasisKind k);
BasisKind basis_kind_from_string(const std::string& s);

struct BasisFunctionInfo {
  int radial = 0;    // h
  int angular = 0;   // k (1D: parity 0 even / 1 odd)
  int sign = 0;      // 2D harmonic: +1 cos, -1 sin, 0 for k = 0
  int order = 0;     // h + |k|
  std::array<double, 2> center{0.0, 0.0};
  double width = 0;  // bump radius for bump and probe functions
};

struct ExteriorBasis {
  GeometryPtr geo;
  std::string region;
  BasisKind kind = BasisKind::bumps;
  std::vector<ExteriorDatum> functions;
  std::vector<BasisFunctionInfo> info;
  Eigen::MatrixXd gram;  // H^s Gram
  double gram_min_eig = 0;
  double gram_max_eig = 0;

  std::size_t size() const { return functions.size(); }
  // indices of functions whose support lies inside the region
  std::vector<int> functions_in(const Region& r) const;
  std::string descriptor() const;
  std::uint64_t content_hash() const;
};

using BasisPtr = std::shared_ptr<const ExteriorBasis>;

// kind = bumps:    mollified bumps tiling the region, normalized to unit H^s norm
// kind = harmonic: 1D discrete orthonormal polynomials with even/odd parity across the origin;
//                  2D radial sine profiles x {1, cos k theta, sin k theta}
BasisPtr build_exterior_basis(GeometryPtr geo, const std::string& region, int size, BasisKind kind);

struct Probe {
  std::array<double, 2> point{0.0, 0.0};
  std::vector<double> widths;  // decreasing bump radii
};
// one unit-H^s bump per (probe, width); errors if a probe is not in the exterior or a bump leaves the region
BasisPtr build_probe_basis(GeometryPtr geo, const std::string& region, const std::vector<Probe>& probes);
// assemble a basis from explicit functions (Gram computed, independence checked)
BasisPtr make_basis(GeometryPtr geo, const std::string& region, BasisKind kind, std::vector<ExteriorDatum> functions,
                    std::vector<BasisFunctionInfo> info);

struct DnMatrix {
  Eigen::MatrixXd M;  // M(i,j) = <Lambda f_rows[i], f_cols[j]>
  BasisPtr basis;
  std::string equation;
  std::vector<int> rows, cols;
};

DnMatrix assemble_dn(const Coefficient& c, BasisPtr basis, const FracOperator& op, double tol = 1e-10,
                     SolveRoute route = SolveRoute::cholesky);
DnMatrix dn_difference(const DnMatrix& a, const DnMatrix& b);
// largest singular value of G_r^{-1/2} M G_c^{-1/2}
double dn_operator_norm(const DnMatrix& delta);
DnMatrix restrict_dn(const DnMatrix& M, const std::string& rows_region, const std::string& cols_region);
// h^n sum over exterior nodes of q f_i f_j (the exterior multiplication part of Lambda_q)
DnMatrix exterior_multiplication(const Potential& q, BasisPtr basis);
double symmetry_defect(const DnMatrix& M);

}  // namespace fraccal
