#include "fraccal/conductivity.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "fraccal/errors.hpp"
#include "hash.hpp"
#include "rng.hpp"

namespace fraccal {

std::vector<double> Conductivity::sqrt_gamma() const {
  std::vector<double> g(gamma.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::sqrt(gamma[i]);
  return g;
}

Conductivity make_conductivity(GeometryPtr geo, std::vector<double> gamma, double gamma0, std::string label) {
  if (!geo) throw ConfigError("conductivity without geometry");
  if (gamma.size() != geo->size()) throw GeometryMismatch("conductivity length does not match the grid");
  if (!(gamma0 > 0 && gamma0 <= 1)) throw ConfigError("gamma0 must lie in (0, 1]");
  const double lo = gamma0 * (1 - 1e-12), hi = (1 + 1e-12) / gamma0;
  for (double v : gamma) {
    if (!std::isfinite(v)) throw ConfigError("non-finite conductivity sample");
    if (v <= 0) throw ConfigError("nonpositive conductivity sample");
    if (v < lo || v > hi)
      throw ConfigError("conductivity sample " + detail::fmt_double(v) + " violates gamma0 <= gamma <= 1/gamma0");
  }
  Conductivity c;
  c.geo = geo;
  c.gamma = std::move(gamma);
  c.gamma0 = gamma0;
  c.label = std::move(label);
  c.m.resize(c.gamma.size());
  for (std::size_t i = 0; i < c.m.size(); ++i) c.m[i] = std::sqrt(c.gamma[i]) - 1.0;
  // m must vanish on the box boundary (compact support surrogate); constants are exempt
  const auto& g = *geo;
  const double m0 = c.m.front();
  bool constant = std::all_of(c.m.begin(), c.m.end(), [m0](double v) { return v == m0; });
  if (!constant) {
    auto boundary = [&](std::size_t idx) {
      if (g.n == 1) return idx == 0;
      std::size_t i = idx / g.N, j = idx % g.N;
      return i == 0 || j == 0;
    };
    for (std::size_t i = 0; i < c.m.size(); ++i)
      if (boundary(i) && c.m[i] != 0.0)
        throw ConfigError("background deviation must vanish on the box boundary");
  }
  return c;
}

Conductivity constant_conductivity(GeometryPtr geo, double c, double gamma0) {
  std::vector<double> v(geo->size(), c);
  return make_conductivity(geo, std::move(v), gamma0, "constant " + detail::fmt_double(c));
}

Conductivity bump_conductivity(GeometryPtr geo, const std::vector<BumpSpec>& bumps, double gamma0,
                               std::string label) {
  std::vector<double> v(geo->size(), 1.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    auto x = geo->node(i);
    for (const auto& b : bumps) v[i] += b.amplitude * bump(x, b.center, b.radius, geo->n);
  }
  return make_conductivity(geo, std::move(v), gamma0, std::move(label));
}

GridField background_deviation(const Conductivity& gamma) {
  for (double v : gamma.gamma)
    if (!(v > 0)) throw ConfigError("nonpositive conductivity sample");
  return GridField(gamma.geo, gamma.m);
}

std::vector<double> conductivity_from_deviation(const std::vector<double>& m) {
  std::vector<double> g(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) g[i] = (1 + m[i]) * (1 + m[i]);
  return g;
}

Potential liouville_potential(const Conductivity& gamma, const FracOperator& op) {
  require_same_geometry(*gamma.geo, *op.geometry());
  auto lm = frac_laplacian_values(gamma.m, op);
  Potential q;
  q.geo = gamma.geo;
  q.q.resize(lm.size());
  for (std::size_t i = 0; i < lm.size(); ++i) q.q[i] = -lm[i] / (1.0 + gamma.m[i]);
  q.label = "q[" + gamma.label + "]";
  return q;
}

Potential zero_potential(GeometryPtr geo) {
  Potential q;
  q.geo = geo;
  q.q.assign(geo->size(), 0.0);
  q.label = "q=0";
  return q;
}

Potential restrict_to_domain(const Potential& q) {
  Potential out = q;
  auto mask = q.geo->closure_mask(q.geo->omega);
  for (std::size_t i = 0; i < out.q.size(); ++i)
    if (!mask[i]) out.q[i] = 0.0;
  out.label = q.label + "|omega";
  return out;
}

double theta0_lower(int n, double s) { return std::max(0.5, 2 * s / n); }

void check_theta0(int n, double s, double theta0) {
  double lo = theta0_lower(n, s);
  if (!(theta0 > lo && theta0 < 1))
    throw ConfigError("theta0 = " + detail::fmt_double(theta0) + " outside (" + detail::fmt_double(lo) + ", 1)");
}

double smallness_gate(double theta0, double delta_fraction) {
  double delta = delta_fraction * (1 - theta0) / 2;
  return std::pow(3.0, -1.0 / delta);
}

namespace {

double lp_norm(const std::vector<double>& f, double p, double cell) {
  double acc = 0.0;
  for (double v : f) acc += std::pow(std::abs(v), p);
  return std::pow(acc * cell, 1.0 / p);
}

AdmissibilityReport::PerConductivity assess(const Conductivity& c, const AdmissibilityThresholds& th) {
  AdmissibilityReport::PerConductivity r;
  const auto& g = *c.geo;
  auto [mn, mx] = std::minmax_element(c.gamma.begin(), c.gamma.end());
  r.gamma_min = *mn;
  r.gamma_max = *mx;
  r.ellipticity_ok = r.gamma_min >= c.gamma0 * (1 - 1e-12) && r.gamma_max <= (1 + 1e-12) / c.gamma0;

  const double t = 4 * g.s + 2 * th.smooth_eps, p = g.n / (2 * g.s);
  r.bessel_norm = lp_norm(bessel_potential(GridField(c.geo, c.m), t), p, g.cell());
  // coarse comparison grid: N/4 where resolution allows, else N/2
  const int f = g.N >= 512 ? 4 : 2;
  if (g.N / f >= 16) {
    GeometryConfig coarse = g.with_N(g.N / f);
    auto cg = std::make_shared<const GeometryConfig>(coarse);
    std::vector<double> mc(cg->size());
    if (g.n == 1) {
      for (int j = 0; j < coarse.N; ++j) mc[j] = c.m[f * j];
    } else {
      for (int i = 0; i < coarse.N; ++i)
        for (int j = 0; j < coarse.N; ++j)
          mc[static_cast<std::size_t>(i) * coarse.N + j] = c.m[static_cast<std::size_t>(f * i) * g.N + f * j];
    }
    r.bessel_norm_coarse = lp_norm(bessel_potential(GridField(cg, mc), t), p, coarse.cell());
    r.growth = r.bessel_norm_coarse > 1e-300 ? r.bessel_norm / r.bessel_norm_coarse : 1.0;
  } else {
    r.growth = 1.0;
  }
  r.smooth_ok = r.bessel_norm <= th.c1 && r.growth <= th.growth_flag;

  FracOperator op(c.geo, OperatorMode::spectral);
  auto lm = op.apply(c.m);
  auto closure = g.closure_mask(g.omega);
  double acc = 0.0;
  for (std::size_t i = 0; i < lm.size(); ++i)
    if (!closure[i]) acc += std::abs(lm[i]);
  r.exterior_l1 = acc * g.cell();
  r.exterior_ok = r.exterior_l1 <= th.c2;
  return r;
}

}  // namespace

AdmissibilityReport validate_admissibility(const Conductivity& g1, const Conductivity& g2, double theta0,
                                           const AdmissibilityThresholds& th, std::optional<double> dn_difference) {
  require_same_geometry(*g1.geo, *g2.geo);
  const auto& g = *g1.geo;
  check_theta0(g.n, g.s, theta0);
  AdmissibilityReport r;
  r.theta0 = theta0;
  r.theta_lo = theta0_lower(g.n, g.s);
  r.delta = th.delta_fraction * (1 - theta0) / 2;
  r.gate = smallness_gate(theta0, th.delta_fraction);
  r.c1 = th.c1;
  r.c2 = th.c2;
  r.g1 = assess(g1, th);
  r.g2 = assess(g2, th);
  r.dn_difference = dn_difference;
  r.gate_ok = !dn_difference || *dn_difference <= r.gate;
  auto ok = [](const AdmissibilityReport::PerConductivity& p) {
    return p.ellipticity_ok && p.smooth_ok && p.exterior_ok;
  };
  r.all_ok = ok(r.g1) && ok(r.g2) && r.gate_ok;
  return r;
}

void validate_mandache(const MandacheParams& p, double s) {
  auto integral = [](double x) { return std::abs(x - std::round(x)) < 1e-9; };
  if (!(p.eps > 0 && p.eps <= 1)) throw ConfigError("mandache eps must lie in (0, 1] so that 1 <= gamma <= 2");
  if (!(p.beta > 0)) throw ConfigError("mandache beta must be positive");
  if (!(p.ell > 0) || integral(p.ell)) throw ConfigError("mandache ell must be a positive non-integer");
  if (!(p.ell - 2 * s > 0) || integral(p.ell - 2 * s))
    throw ConfigError("mandache ell - 2s = " + detail::fmt_double(p.ell - 2 * s) + " must be a positive non-integer");
  if (std::floor(p.ell) > 4) throw ConfigError("mandache ell above 5 is not supported by the C^ell estimate");
  if (!(p.lattice_spacing > 0 && p.lattice_spacing <= 1)) throw ConfigError("lattice spacing must lie in (0, 1]");
}

double linf_distance_b1(const Conductivity& a, const Conductivity& b) {
  require_same_geometry(*a.geo, *b.geo);
  const auto& g = *a.geo;
  Region b1 = Region::ball("B1", 1.0);
  double d = 0.0;
  for (std::size_t i = 0; i < a.gamma.size(); ++i) {
    auto x = g.node(i);
    if (b1.contains_closure(x.data(), g.n)) d = std::max(d, std::abs(a.gamma[i] - b.gamma[i]));
  }
  return d;
}

double cl_norm_estimate(const GridField& f, double ell) {
  const auto& g = *f.geo;
  const int k = static_cast<int>(std::floor(ell));
  const double alpha = ell - k;
  if (k > 4) throw ConfigError("C^ell estimate supports ell < 5");
  double norm = 0.0;
  std::vector<std::vector<double>> top;
  for (int axis = 0; axis < g.n; ++axis) {
    for (int o = 0; o <= k; ++o) {
      std::vector<double> d = o == 0 ? f.values : fd_derivative(f.values, g, o, axis);
      double sup = 0.0;
      for (double v : d) sup = std::max(sup, std::abs(v));
      if (o > 0 || axis == 0) norm += sup;
      if (o == k) top.push_back(std::move(d));
    }
  }
  if (alpha > 0) {
    // Holder quotient of the top derivative over nodes where it is not negligible
    for (const auto& d : top) {
      double dmax = 0.0;
      for (double v : d) dmax = std::max(dmax, std::abs(v));
      std::vector<std::size_t> nodes;
      for (std::size_t i = 0; i < d.size(); ++i)
        if (std::abs(d[i]) > 1e-12 * dmax) nodes.push_back(i);
      double q = 0.0;
      const int M = static_cast<int>(nodes.size());
#pragma omp parallel for reduction(max : q) schedule(dynamic)
      for (int a = 0; a < M; ++a) {
        auto xa = g.node(nodes[a]);
        for (int b = a + 1; b < M; ++b) {
          auto xb = g.node(nodes[b]);
          double r = g.n == 1 ? std::abs(xa[0] - xb[0]) : std::hypot(xa[0] - xb[0], xa[1] - xb[1]);
          q = std::max(q, std::abs(d[nodes[a]] - d[nodes[b]]) / std::pow(r, alpha));
        }
      }
      norm += q;
    }
  }
  return norm;
}

MandacheFamily mandache_family(GeometryPtr geo, const MandacheParams& params, int count) {
  const auto& g = *geo;
  validate_mandache(params, g.s);
  if (count < 1) throw ConfigError("mandache family needs count >= 1");
  MandacheFamily fam;
  const double sp = params.lattice_spacing;
  fam.bump_radius = 0.45 * sp;
  // lattice sites at spacing (k + 1/2), snapped to grid nodes, supports inside B1
  auto snap = [&](double x) { return g.coord(static_cast<int>(std::lround((x + g.L) / g.h()))); };
  const int K = static_cast<int>(std::ceil(1.0 / sp)) + 1;
  for (int i = -K; i <= K; ++i) {
    double cx = snap(sp * (i + 0.5));
    if (g.n == 1) {
      if (std::abs(cx) + fam.bump_radius < 1.0) fam.sites.push_back({cx, 0.0});
    } else {
      for (int j = -K; j <= K; ++j) {
        double cy = snap(sp * (j + 0.5));
        if (std::hypot(cx, cy) + fam.bump_radius < 1.0) fam.sites.push_back({cx, cy});
      }
    }
  }
  const int S = static_cast<int>(fam.sites.size());
  fam.cardinality_bound = std::exp(std::pow(params.beta / params.eps, g.n / params.ell));
  if (S == 0) throw ConfigError("mandache lattice has no site inside B1");
  if (S < 63 && count > (1LL << S))
    throw ConfigError("infeasible mandache family: " + std::to_string(count) + " members requested but only 2^" +
                      std::to_string(S) + " sign patterns exist; counting bound exp((beta/eps)^(n/ell)) = " +
                      detail::fmt_double(fam.cardinality_bound));

  // sign patterns: per-member derived streams, duplicates redrawn in member order
  std::set<std::vector<int>> seen;
  for (int k = 0; k < count; ++k) {
    auto rng = detail::derived_rng(params.seed, static_cast<std::uint64_t>(k));
    std::vector<int> pat(S);
    do {
      for (auto& v : pat) v = (rng() >> 63) ? 1 : -1;
    } while (!seen.insert(pat).second);
    fam.patterns.push_back(pat);
  }

  std::vector<std::vector<double>> profiles(S, std::vector<double>(g.size()));
  for (int j = 0; j < S; ++j)
    for (std::size_t i = 0; i < g.size(); ++i) profiles[j][i] = bump(g.node(i), fam.sites[j], fam.bump_radius, g.n);

  std::vector<std::vector<double>> values(count);
  fam.cl_norms.resize(count);
#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < count; ++k) {
    std::vector<double> v(g.size(), 1.0);
    for (int j = 0; j < S; ++j) {
      double a = 0.5 * params.eps * (1 + fam.patterns[k][j]);
      if (a == 0) continue;
      for (std::size_t i = 0; i < v.size(); ++i) v[i] += a * profiles[j][i];
    }
    std::vector<double> f(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) f[i] = v[i] - 1.0;
    fam.cl_norms[k] = cl_norm_estimate(GridField(geo, f), params.ell);
    values[k] = std::move(v);
  }
  for (int k = 0; k < count; ++k) {
    fam.members.push_back(make_conductivity(geo, std::move(values[k]), 0.5, "mandache#" + std::to_string(k)));
    fam.members.back().seed = params.seed;
  }
  for (int k = 0; k < count; ++k)
    if (fam.cl_norms[k] > params.beta)
      throw ConfigError("infeasible mandache family: C^ell estimate " + detail::fmt_double(fam.cl_norms[k]) +
                        " exceeds beta = " + detail::fmt_double(params.beta) +
                        "; counting bound exp((beta/eps)^(n/ell)) = " + detail::fmt_double(fam.cardinality_bound));

  fam.eps_prime = count > 1 ? 1e300 : 0.0;
  for (int a = 0; a < count; ++a)
    for (int b = a + 1; b < count; ++b)
      fam.eps_prime = std::min(fam.eps_prime, linf_distance_b1(fam.members[a], fam.members[b]));
  return fam;
}

}  // namespace fraccal
