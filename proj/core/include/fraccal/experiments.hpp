#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fraccal/conductivity.hpp"
#include "fraccal/dn_map.hpp"

namespace fraccal {

using ConductivityPair = std::pair<Conductivity, Conductivity>;

// ---- identity residuals ----

// |LHS - RHS| / (|LHS| + |RHS| + 1e-300) for
//   LHS = B_gamma(u, phi)  (real-space pair sum with `op`)
//   RHS = <(-D)^{s/2}(g u), (-D)^{s/2}(g phi)> + <q g u, g phi>  (Fourier side, q from the spectral operator)
double liouville_identity_residual(const Conductivity& gamma, const GridField& u, const GridField& phi,
                                   const FracOperator& op);

// fixed battery of 10 smooth test fields centred in and around the domain
std::vector<GridField> test_battery(GeometryPtr geo);

// max over the battery of the relative weak-form residual of the equation for m~ = (m1 - m2)/g1:
//   B_{gamma1}(m~, phi) = <g1 g2 (q2 - q1), phi>
double mtilde_equation_residual(const Conductivity& g1, const Conductivity& g2, const FracOperator& op);

// ||m1 - m2||_{L^p(Omega)} on the closed-domain nodes
double domain_lp_distance(const std::vector<double>& a, const std::vector<double>& b, const GeometryConfig& g,
                          double p);

struct DnEquivalence {
  double same_operator = 0;   // ||Lambda_gamma - Lambda_q||_* / ||Lambda_gamma||_*, one operator
  double cross_operator = 0;  // same, with q computed by the other operator mode
  double dn_norm = 0;
};
DnEquivalence liouville_dn_equivalence(const Conductivity& gamma, BasisPtr basis, const FracOperator& op);

// ---- exterior suite ----

struct RecoveryProbe {
  std::array<double, 2> point{0.0, 0.0};
  std::vector<double> widths;
  std::vector<double> ratios;        // <Lambda_gamma phi_w, phi_w> / <Lambda_1 phi_w, phi_w>
  std::vector<double> extrapolated;  // Richardson value using widths k-1, k (first entry = raw ratio)
  double estimate = 0;               // extrapolated value at the finest width
  std::optional<double> true_value;
};

// M and M0 must share one probe basis (see build_probe_basis)
std::vector<RecoveryProbe> exterior_recovery(const DnMatrix& M, const DnMatrix& M0, const std::vector<Probe>& probes,
                                             double s);

struct ScanPoint {
  double amplitude = 0;
  double gamma_gap = 0;  // ||gamma1 - gamma2||_{L^inf(Omega_e)}
  double dn_gap = 0;     // ||Lambda_1 - Lambda_2||_*
  double ratio = 0;      // gamma_gap / dn_gap
  bool excluded = false;
  std::string note;
};

struct ExteriorScan {
  std::vector<ScanPoint> points;
  double c_hat = 0;       // max ratio
  double variation = 0;   // max ratio / min ratio
  bool lipschitz_ok = false;  // variation <= 2
};

ExteriorScan exterior_stability_scan(const std::vector<ConductivityPair>& pairs, const std::vector<double>& amplitudes,
                                     BasisPtr basis, const FracOperator& op);

// ---- reduction suite ----

double rhs_shape(double x, double theta0);

struct ReductionCheck {
  double theta0 = 0;
  double lhs = 0;  // ||Lambda_q1 - Lambda_q2||_*
  double x = 0;    // ||Lambda_gamma1 - Lambda_gamma2||_*
  double rhs_shape = 0;
  double fitted_constant = 0;
  double amplitude = 0;
};

ReductionCheck reduction_check(const Conductivity& g1, const Conductivity& g2, double theta0, BasisPtr basis,
                               const FracOperator& op, const std::string& rows_region = {},
                               const std::string& cols_region = {});

struct ReductionScan {
  std::vector<ReductionCheck> checks;
  double band = 0;             // max fitted_constant / fitted_constant at the largest perturbation
  double spread = 0;           // max / min fitted_constant
  double dominant_growth = 0;  // max over family of lhs / x^{(1-theta0)/2}, relative to the largest perturbation
  double linear_growth = 0;    // lhs/x at the smallest perturbation relative to the largest
  bool band_ok = false;        // band <= 5
  bool dominant_bounded = false;
  bool linear_unbounded = false;  // linear_growth >= 5
};

ReductionScan reduction_scan(const std::vector<ConductivityPair>& family, const std::vector<double>& amplitudes,
                             double theta0, BasisPtr basis, const FracOperator& op,
                             const std::string& rows_region = {}, const std::string& cols_region = {});

// ---- log-modulus suite ----

struct ModulusPoint {
  double x = 0;
  double y = 0;
  double amplitude = 0;
  bool gate_ok = false;
  bool above_floor = false;
  bool retained = false;
  std::string note;
};

struct ModulusFit {
  double C = 0;
  double sigma = 0;
  double q_norm_index = 2;
  double r_squared = 0;
  std::vector<ModulusPoint> data_points;
  double floor = 0;
  double gate = 0;
  double theta0 = 0;
  bool monotone = false;
  int retained = 0;
};

// upper end 2n/(n-2s) of the admissible L^q range (infinite when n <= 2s)
double q_index_upper(int n, double s);

struct LogFitOptions {
  double theta0 = 0.81;
  double delta_fraction = 0.99;
  double floor_factor = 10.0;
  double tol = 1e-12;
};

ModulusFit log_stability_fit(const std::vector<ConductivityPair>& family, const std::vector<double>& amplitudes,
                             double q_index, BasisPtr basis, const FracOperator& op, const LogFitOptions& opt = {});

// ---- instability suite ----

struct DecayFit {
  double amplitude = 0;  // A
  double rate = 0;       // c
  double r_squared = 0;
  double spearman = 0;
  std::vector<std::pair<int, double>> envelope;  // (max order, max |a|)
};

// least-squares fit of log env = log A - c * order, plus rank correlation
DecayFit fit_decay(std::vector<std::pair<int, double>> envelope);
// envelope of |M(i,j)| per max(order_i, order_j), orders taken from the basis
std::vector<std::pair<int, double>> coefficient_envelope(const std::vector<const DnMatrix*>& ms);

double spearman(const std::vector<double>& a, const std::vector<double>& b);

struct InstabilityRecord {
  MandacheParams params;
  int family_size = 0;
  std::pair<int, int> pair{-1, -1};
  double gamma_gap = 0;
  double dn_gap = 0;
  double eps_prime = 0;
  double min_pair_gap = 0;  // same as eps_prime, recomputed over all pairs
  double delta_target = 0;  // exp(-eps^{-n/((2n+3) ell)}), theory
  double net_size_bound = 0;  // exp((beta/eps)^{n/ell}) with unit constant, theory (inf on overflow)
  double log_net_size_bound = 0;
  DecayFit decay_fit;         // interior part Lambda_{q 1_Omega} - Lambda_0
  DecayFit decay_fit_full;    // full Gamma(q) = Lambda_q - Lambda_0
  double split_defect = 0;    // max |Gamma(q) - Mult(q|ext) - interior part| / max |Gamma(q)|
  std::optional<double> full_data_gap;  // exploratory: witness pair over a basis of the whole exterior
  std::vector<double> pair_gamma_gaps;
  std::vector<double> pair_dn_gaps;
  std::vector<double> cl_norms;
};

struct InstabilityOptions {
  int count = 32;
  std::string full_data_region;  // empty: skip the exploratory full-data gap
  int full_data_size = 24;
  double tol = 1e-12;
};

InstabilityRecord instability_search(const MandacheParams& params, BasisPtr basis, const FracOperator& op,
                                     const InstabilityOptions& opt = {});

// ---- presets ----

// gamma1 = 1 + a bump(centre, radius), gamma2 = 1 for each amplitude
std::vector<ConductivityPair> bump_ladder(GeometryPtr geo, const std::vector<double>& amplitudes,
                                          std::array<double, 2> centre, double radius);
std::vector<double> geometric_amplitudes(double a0, int first, int last);
// 5 conductivities 1 + a bump at interior points for residual tests
std::vector<Conductivity> residual_conductivities(GeometryPtr geo);
// smooth fields for identity residuals, seeded
std::vector<GridField> smooth_fields(GeometryPtr geo, int count, std::uint64_t seed);

}  // namespace fraccal
