#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fraccal/frac_operator.hpp"
#include "fraccal/geometry.hpp"

namespace fraccal {

struct Conductivity {
  GeometryPtr geo;
  std::vector<double> gamma;
  double gamma0 = 0.5;
  std::vector<double> m;  // gamma^{1/2} - 1
  std::uint64_t seed = 0;
  std::string label;

  std::vector<double> sqrt_gamma() const;
  GridField field() const { return GridField(geo, gamma); }
};

struct Potential {
  GeometryPtr geo;
  std::vector<double> q;
  std::string label;

  GridField field() const { return GridField(geo, q); }
};

// validates gamma0 <= gamma <= 1/gamma0 and that m vanishes on the box boundary
Conductivity make_conductivity(GeometryPtr geo, std::vector<double> gamma, double gamma0, std::string label = {});
Conductivity constant_conductivity(GeometryPtr geo, double c, double gamma0 = 0.5);
// gamma = 1 + sum_k amp_k bump(x; c_k, r_k)
struct BumpSpec {
  double amplitude;
  std::array<double, 2> center;
  double radius;
};
Conductivity bump_conductivity(GeometryPtr geo, const std::vector<BumpSpec>& bumps, double gamma0 = 0.5,
                               std::string label = {});

GridField background_deviation(const Conductivity& gamma);
// inverse map m -> (1+m)^2
std::vector<double> conductivity_from_deviation(const std::vector<double>& m);

// q = -(-Delta)^s m / gamma^{1/2}: the sign for which
//   B_gamma(u, phi) = <(-Delta)^{s/2}(g u), (-Delta)^{s/2}(g phi)> + <q g u, g phi>,  g = gamma^{1/2}
Potential liouville_potential(const Conductivity& gamma, const FracOperator& op);
Potential zero_potential(GeometryPtr geo);
// q restricted to the closed domain (zero outside)
Potential restrict_to_domain(const Potential& q);

struct AdmissibilityThresholds {
  double c1 = 1e3;            // bound on the Bessel-norm surrogate of m
  double c2 = 1e3;            // bound on ||(-Delta)^s m||_{L^1(Omega_e)}
  double smooth_eps = 0.05;   // epsilon in the smoothness index 4s + 2 epsilon
  double delta_fraction = 0.99;  // delta = delta_fraction (1 - theta0) / 2
  double growth_flag = 2.0;   // surrogate growth coarse -> N above this flags a non-smooth m
};

struct AdmissibilityReport {
  struct PerConductivity {
    double gamma_min = 0, gamma_max = 0;
    bool ellipticity_ok = false;
    double bessel_norm = 0;     // ||J^{4s+2eps} m||_{L^{n/2s}}
    double bessel_norm_coarse = -1;  // same on the N/4 (N >= 512) or N/2 subsampled grid, -1 if not computed
    double growth = 0;
    bool smooth_ok = false;
    double exterior_l1 = 0;     // ||(-Delta)^s m||_{L^1(Omega_e)}
    bool exterior_ok = false;
  };
  PerConductivity g1, g2;
  double theta0 = 0;
  double theta_lo = 0;
  double delta = 0;
  double gate = 0;                     // 3^{-1/delta}
  std::optional<double> dn_difference; // ||Lambda_1 - Lambda_2||_* if supplied
  bool gate_ok = true;
  double c1 = 0, c2 = 0;
  bool all_ok = false;
};

// lower end of the admissible theta0 interval, max(1/2, 2s/n)
double theta0_lower(int n, double s);
// throws ConfigError if theta0 is outside (max(1/2, 2s/n), 1)
void check_theta0(int n, double s, double theta0);
double smallness_gate(double theta0, double delta_fraction);

AdmissibilityReport validate_admissibility(const Conductivity& g1, const Conductivity& g2, double theta0,
                                           const AdmissibilityThresholds& th = {},
                                           std::optional<double> dn_difference = std::nullopt);

struct MandacheParams {
  double ell = 2.5;
  double eps = 0.1;
  double beta = 2000.0;
  double lattice_spacing = 0.25;
  std::uint64_t seed = 7;
};

struct MandacheFamily {
  std::vector<Conductivity> members;
  std::vector<std::vector<int>> patterns;  // sign pattern per member, entries +-1
  std::vector<std::array<double, 2>> sites;
  double bump_radius = 0;
  double eps_prime = 0;              // min pairwise L^inf(B1) distance (measured)
  std::vector<double> cl_norms;      // C^ell estimate of gamma - 1 per member
  double cardinality_bound = 0;      // exp((beta/eps)^{n/ell}), constant set to 1
};

void validate_mandache(const MandacheParams& p, double s);
MandacheFamily mandache_family(GeometryPtr geo, const MandacheParams& params, int count);
// sup-norm distance over the nodes of the closed unit ball
double linf_distance_b1(const Conductivity& a, const Conductivity& b);
// finite-difference C^ell estimate: sum_{k<=floor(ell)} ||f^(k)||_inf + Holder seminorm of f^(floor ell)
double cl_norm_estimate(const GridField& f, double ell);

}  // namespace fraccal
