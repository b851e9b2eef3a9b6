#include "fraccal/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <random>

#include "fraccal/errors.hpp"
#include "hash.hpp"
#include "rng.hpp"

namespace fraccal {

namespace {

// runs f(0..n-1) in parallel; the first failure (by index) is rethrown after the loop
template <class F>
void parallel_indexed(int n, F&& f) {
  std::vector<std::exception_ptr> err(n);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      f(i);
    } catch (...) {
      err[i] = std::current_exception();
    }
  }
  for (auto& e : err)
    if (e) std::rethrow_exception(e);
}

FracOperator other_mode(const FracOperator& op) {
  auto m = op.mode() == OperatorMode::spectral ? OperatorMode::quadrature : OperatorMode::spectral;
  return FracOperator(op.geometry(), m, op.s());
}

double rel_gap(double a, double b) { return std::abs(a - b) / (std::abs(a) + std::abs(b) + 1e-300); }

double dn_norm_of(const DnMatrix& m) { return dn_operator_norm(m); }

DnMatrix maybe_restrict(const DnMatrix& m, const std::string& rows, const std::string& cols) {
  if (rows.empty() && cols.empty()) return m;
  return restrict_dn(m, rows.empty() ? m.basis->region : rows, cols.empty() ? m.basis->region : cols);
}

struct LineFit {
  double slope = 0, intercept = 0, r2 = 0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  f.r2 = (sxx > 0 && syy > 0) ? sxy * sxy / (sxx * syy) : (syy == 0 ? 1.0 : 0.0);
  return f;
}

std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    double avg = 0.5 * (i + j) + 1;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

double exterior_linf(const Conductivity& a, const Conductivity& b) {
  require_same_geometry(*a.geo, *b.geo);
  auto mask = a.geo->closure_mask(a.geo->omega);
  double mx = 0;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (!mask[i]) mx = std::max(mx, std::abs(a.gamma[i] - b.gamma[i]));
  return mx;
}

}  // namespace

// ---------------------------------------------------------------- residuals

double liouville_identity_residual(const Conductivity& gamma, const GridField& u, const GridField& phi,
                                   const FracOperator& op) {
  const auto& geo = gamma.geo;
  double lhs = bilinear_form(u, phi, gamma, op);

  FracOperator spectral_op(geo, OperatorMode::spectral, op.s());
  auto q = liouville_potential(gamma, spectral_op);
  auto g = gamma.sqrt_gamma();
  GridField gu(geo), gphi(geo);
  for (std::size_t i = 0; i < g.size(); ++i) {
    gu[i] = g[i] * u[i];
    gphi[i] = g[i] * phi[i];
  }
  double pot = 0;
  for (std::size_t i = 0; i < g.size(); ++i) pot += q.q[i] * gu[i] * gphi[i];
  double rhs = fourier_energy(gu, gphi, op.s()) + pot * geo->cell();
  return rel_gap(lhs, rhs);
}

std::vector<GridField> test_battery(GeometryPtr geo) {
  std::vector<GridField> out;
  for (int k = 0; k < 10; ++k) {
    std::array<double, 2> c{};
    if (geo->n == 1) {
      c = {-1.35 + 0.3 * k, 0.0};
    } else {
      double th = 2 * std::numbers::pi * k / 10;
      c = {0.6 * std::cos(th), 0.6 * std::sin(th)};
    }
    out.push_back(sample(geo, [&](double x, double y) { return bump({x, y}, c, 0.6 + 0.05 * k, geo->n); }));
  }
  return out;
}

double mtilde_equation_residual(const Conductivity& g1, const Conductivity& g2, const FracOperator& op) {
  require_same_geometry(*g1.geo, *g2.geo);
  const auto& geo = g1.geo;
  auto s1 = g1.sqrt_gamma(), s2 = g2.sqrt_gamma();
  GridField mt(geo);
  bool zero = true;
  for (std::size_t i = 0; i < s1.size(); ++i) {
    mt[i] = (g1.m[i] - g2.m[i]) / s1[i];
    zero = zero && mt[i] == 0.0;
  }
  if (zero) return 0.0;
  FracOperator spectral_op(geo, OperatorMode::spectral, op.s());
  auto q1 = liouville_potential(g1, spectral_op), q2 = liouville_potential(g2, spectral_op);
  std::vector<double> src(s1.size());
  for (std::size_t i = 0; i < src.size(); ++i) src[i] = s1[i] * s2[i] * (q2.q[i] - q1.q[i]);
  double worst = 0;
  for (const auto& phi : test_battery(geo)) {
    double lhs = bilinear_form(mt, phi, g1, op);
    double rhs = 0;
    for (std::size_t i = 0; i < src.size(); ++i) rhs += src[i] * phi[i];
    rhs *= geo->cell();
    worst = std::max(worst, rel_gap(lhs, rhs));
  }
  return worst;
}

double domain_lp_distance(const std::vector<double>& a, const std::vector<double>& b, const GeometryConfig& g,
                          double p) {
  auto mask = g.closure_mask(g.omega);
  double acc = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    double d = std::abs(a[i] - b[i]);
    acc = std::isinf(p) ? std::max(acc, d) : acc + std::pow(d, p);
  }
  return std::isinf(p) ? acc : std::pow(acc * g.cell(), 1.0 / p);
}

DnEquivalence liouville_dn_equivalence(const Conductivity& gamma, BasisPtr basis, const FracOperator& op) {
  DnEquivalence out;
  auto lg = assemble_dn(gamma, basis, op, 1e-12);
  out.dn_norm = dn_norm_of(lg);
  auto q = liouville_potential(gamma, op);
  auto lq = assemble_dn(q, basis, op, 1e-12);
  out.same_operator = dn_norm_of(dn_difference(lg, lq)) / out.dn_norm;
  auto other = other_mode(op);
  auto q2 = liouville_potential(gamma, other);
  auto lq2 = assemble_dn(q2, basis, op, 1e-12);
  out.cross_operator = dn_norm_of(dn_difference(lg, lq2)) / out.dn_norm;
  return out;
}

// ---------------------------------------------------------------- exterior

std::vector<RecoveryProbe> exterior_recovery(const DnMatrix& M, const DnMatrix& M0, const std::vector<Probe>& probes,
                                             double s) {
  if (M.basis->content_hash() != M0.basis->content_hash())
    throw GeometryMismatch("exterior_recovery: DN matrices use different bases");
  const auto& b = *M.basis;
  auto find = [&](const std::array<double, 2>& p, double w) -> int {
    for (std::size_t k = 0; k < b.size(); ++k) {
      const auto& fi = b.info[k];
      if (std::abs(fi.center[0] - p[0]) < 1e-12 && std::abs(fi.center[1] - p[1]) < 1e-12 &&
          std::abs(fi.width - w) < 1e-12)
        return static_cast<int>(k);
    }
    throw ConfigError("probe bump (width " + detail::fmt_double(w) + ") is not in the basis span");
  };
  auto pos = [](const std::vector<int>& idx, int k) {
    auto it = std::find(idx.begin(), idx.end(), k);
    if (it == idx.end()) throw ConfigError("probe bump removed by restriction");
    return static_cast<int>(it - idx.begin());
  };
  std::vector<RecoveryProbe> out;
  for (const auto& p : probes) {
    if (p.widths.empty()) throw ConfigError("probe without widths");
    if (b.geo->omega.contains_closure(p.point.data(), b.geo->n)) throw ConfigError("probe point lies in the closed domain");
    RecoveryProbe r;
    r.point = p.point;
    r.widths = p.widths;
    for (double w : p.widths) {
      int k = find(p.point, w);
      int i = pos(M.rows, k), j = pos(M.cols, k), i0 = pos(M0.rows, k), j0 = pos(M0.cols, k);
      r.ratios.push_back(M.M(i, j) / M0.M(i0, j0));
    }
    r.extrapolated.push_back(r.ratios[0]);
    for (std::size_t k = 1; k < r.ratios.size(); ++k) {
      double rho = r.widths[k - 1] / r.widths[k];
      double f = std::pow(rho, 2 * s);
      r.extrapolated.push_back((f * r.ratios[k] - r.ratios[k - 1]) / (f - 1));
    }
    r.estimate = r.extrapolated.back();
    out.push_back(std::move(r));
  }
  return out;
}

ExteriorScan exterior_stability_scan(const std::vector<ConductivityPair>& pairs, const std::vector<double>& amplitudes,
                                     BasisPtr basis, const FracOperator& op) {
  ExteriorScan scan;
  scan.points.resize(pairs.size());
  parallel_indexed(static_cast<int>(pairs.size()), [&](int k) {
    auto& pt = scan.points[k];
    const auto& [a, b] = pairs[k];
    pt.amplitude = k < static_cast<int>(amplitudes.size()) ? amplitudes[k] : 0.0;
    auto mask = a.geo->closure_mask(a.geo->omega);
    for (std::size_t i = 0; i < mask.size(); ++i)
      if (mask[i] && a.gamma[i] != b.gamma[i])
        throw ConfigError("exterior scan pair " + std::to_string(k) + " differs inside the domain");
    pt.gamma_gap = exterior_linf(a, b);
    if (pt.gamma_gap == 0) {
      pt.excluded = true;
      pt.note = "identical pair";
      return;
    }
    pt.dn_gap = dn_norm_of(dn_difference(assemble_dn(a, basis, op, 1e-12), assemble_dn(b, basis, op, 1e-12)));
    if (pt.dn_gap == 0) {
      pt.excluded = true;
      pt.note = "zero DN difference";
      return;
    }
    pt.ratio = pt.gamma_gap / pt.dn_gap;
  });
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (const auto& p : scan.points)
    if (!p.excluded) {
      lo = std::min(lo, p.ratio);
      hi = std::max(hi, p.ratio);
    }
  if (hi > 0) {
    scan.c_hat = hi;
    scan.variation = hi / lo;
    scan.lipschitz_ok = scan.variation <= 2.0;
  }
  return scan;
}

// ---------------------------------------------------------------- reduction

double rhs_shape(double x, double theta0) { return x + std::sqrt(x) + std::pow(x, (1 - theta0) / 2); }

ReductionCheck reduction_check(const Conductivity& g1, const Conductivity& g2, double theta0, BasisPtr basis,
                               const FracOperator& op, const std::string& rows_region,
                               const std::string& cols_region) {
  const auto& geo = *g1.geo;
  check_theta0(geo.n, geo.s, theta0);
  ReductionCheck rc;
  rc.theta0 = theta0;
  auto lg1 = assemble_dn(g1, basis, op, 1e-12), lg2 = assemble_dn(g2, basis, op, 1e-12);
  auto q1 = liouville_potential(g1, op), q2 = liouville_potential(g2, op);
  auto lq1 = assemble_dn(q1, basis, op, 1e-12), lq2 = assemble_dn(q2, basis, op, 1e-12);
  rc.x = dn_norm_of(maybe_restrict(dn_difference(lg1, lg2), rows_region, cols_region));
  rc.lhs = dn_norm_of(maybe_restrict(dn_difference(lq1, lq2), rows_region, cols_region));
  rc.rhs_shape = rhs_shape(rc.x, theta0);
  rc.fitted_constant = rc.x > 0 ? rc.lhs / rc.rhs_shape : 0.0;
  return rc;
}

ReductionScan reduction_scan(const std::vector<ConductivityPair>& family, const std::vector<double>& amplitudes,
                             double theta0, BasisPtr basis, const FracOperator& op, const std::string& rows_region,
                             const std::string& cols_region) {
  if (family.empty()) throw ConfigError("reduction family is empty");
  const auto& geo = *family.front().first.geo;
  check_theta0(geo.n, geo.s, theta0);
  ReductionScan out;
  out.checks.resize(family.size());
  parallel_indexed(static_cast<int>(family.size()), [&](int k) {
    out.checks[k] = reduction_check(family[k].first, family[k].second, theta0, basis, op, rows_region, cols_region);
    out.checks[k].amplitude = k < static_cast<int>(amplitudes.size()) ? amplitudes[k] : 0.0;
  });
  std::vector<const ReductionCheck*> live;
  for (const auto& c : out.checks)
    if (c.x > 0) live.push_back(&c);
  if (live.size() < 2) return out;
  std::sort(live.begin(), live.end(), [](auto* a, auto* b) { return a->x > b->x; });
  const double e = (1 - theta0) / 2;
  const auto* big = live.front();
  const auto* small = live.back();
  double mx = 0, mn = std::numeric_limits<double>::infinity(), dom = 0;
  for (auto* c : live) {
    mx = std::max(mx, c->fitted_constant);
    mn = std::min(mn, c->fitted_constant);
    dom = std::max(dom, (c->lhs / std::pow(c->x, e)) / (big->lhs / std::pow(big->x, e)));
  }
  out.band = mx / big->fitted_constant;
  out.spread = mx / mn;
  out.dominant_growth = dom;
  out.linear_growth = (small->lhs / small->x) / (big->lhs / big->x);
  out.band_ok = out.band <= 5.0;
  out.dominant_bounded = out.dominant_growth <= 5.0;
  out.linear_unbounded = out.linear_growth >= 5.0;
  return out;
}

// ---------------------------------------------------------------- log modulus

double q_index_upper(int n, double s) {
  if (n <= 2 * s) return std::numeric_limits<double>::infinity();
  return 2.0 * n / (n - 2 * s);
}

ModulusFit log_stability_fit(const std::vector<ConductivityPair>& family, const std::vector<double>& amplitudes,
                             double q_index, BasisPtr basis, const FracOperator& op, const LogFitOptions& opt) {
  if (family.empty()) throw ConfigError("log-modulus family is empty");
  const auto geo = family.front().first.geo;
  const double qmax = q_index_upper(geo->n, geo->s);
  if (!(q_index >= 1 && q_index <= qmax * (1 + 1e-12)))
    throw ConfigError("q_index " + detail::fmt_double(q_index) + " outside [1, " + detail::fmt_double(qmax) + "]");
  check_theta0(geo->n, geo->s, opt.theta0);

  ModulusFit fit;
  fit.q_norm_index = q_index;
  fit.theta0 = opt.theta0;
  fit.gate = smallness_gate(opt.theta0, opt.delta_fraction);
  // solver floor: the same DN map through two factorizations
  {
    const auto& base = family.front().second;
    auto a = assemble_dn(base, basis, op, opt.tol, SolveRoute::cholesky);
    auto b = assemble_dn(base, basis, op, opt.tol, SolveRoute::ldlt);
    fit.floor = dn_norm_of(dn_difference(a, b));
  }
  fit.data_points.resize(family.size());
  parallel_indexed(static_cast<int>(family.size()), [&](int k) {
    auto& p = fit.data_points[k];
    const auto& [g1, g2] = family[k];
    p.amplitude = k < static_cast<int>(amplitudes.size()) ? amplitudes[k] : 0.0;
    p.y = domain_lp_distance(g1.sqrt_gamma(), g2.sqrt_gamma(), *geo, q_index);
    if (g1.gamma == g2.gamma) {
      p.note = "identical pair";
      return;
    }
    p.x = dn_norm_of(dn_difference(assemble_dn(g1, basis, op, opt.tol), assemble_dn(g2, basis, op, opt.tol)));
  });

  std::vector<double> lx, ly;
  std::vector<const ModulusPoint*> kept;
  for (auto& p : fit.data_points) {
    if (!p.note.empty()) continue;
    p.gate_ok = p.x <= fit.gate;
    p.above_floor = p.x > opt.floor_factor * fit.floor;
    if (!(p.x > 0 && p.x < 1)) p.note = "x outside (0, 1)";
    else if (!p.gate_ok) p.note = "fails smallness gate";
    else if (!p.above_floor) p.note = "below discretization floor";
    else p.retained = true;
    if (p.retained) {
      lx.push_back(std::log(std::abs(std::log(p.x))));
      ly.push_back(std::log(p.y));
      kept.push_back(&p);
    }
  }
  fit.retained = static_cast<int>(kept.size());
  if (kept.size() < 4)
    throw ConfigError("log-modulus family has " + std::to_string(kept.size()) + " usable points, need at least 4");
  auto lf = least_squares(lx, ly);
  fit.sigma = -lf.slope;
  fit.C = std::exp(lf.intercept);
  fit.r_squared = lf.r2;
  // monotone: ordering by x equals ordering by y over retained points
  std::sort(kept.begin(), kept.end(), [](auto* a, auto* b) { return a->x < b->x; });
  fit.monotone = true;
  for (std::size_t i = 1; i < kept.size(); ++i) fit.monotone = fit.monotone && kept[i]->y > kept[i - 1]->y;
  return fit;
}

// ---------------------------------------------------------------- instability

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) return 0.0;
  auto lf = least_squares(ranks(a), ranks(b));
  return std::sqrt(lf.r2) * (lf.slope < 0 ? -1.0 : 1.0);
}

std::vector<std::pair<int, double>> coefficient_envelope(const std::vector<const DnMatrix*>& ms) {
  std::map<int, double> env;
  for (const auto* m : ms) {
    const auto& info = m->basis->info;
    for (std::size_t i = 0; i < m->rows.size(); ++i)
      for (std::size_t j = 0; j < m->cols.size(); ++j) {
        int o = std::max(info[m->rows[i]].order, info[m->cols[j]].order);
        double v = std::abs(m->M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
        auto [it, fresh] = env.emplace(o, v);
        if (!fresh) it->second = std::max(it->second, v);
      }
  }
  return {env.begin(), env.end()};
}

DecayFit fit_decay(std::vector<std::pair<int, double>> envelope) {
  DecayFit d;
  std::vector<double> o, l;
  for (auto [ord, v] : envelope)
    if (v > 0) {
      o.push_back(ord);
      l.push_back(std::log(v));
    }
  d.envelope = std::move(envelope);
  if (o.size() < 2) return d;
  auto lf = least_squares(o, l);
  d.rate = -lf.slope;
  d.amplitude = std::exp(lf.intercept);
  d.r_squared = lf.r2;
  d.spearman = spearman(o, l);
  return d;
}

InstabilityRecord instability_search(const MandacheParams& params, BasisPtr basis, const FracOperator& op,
                                     const InstabilityOptions& opt) {
  const auto geo = basis->geo;
  const int n = geo->n;
  InstabilityRecord rec;
  rec.params = params;
  rec.delta_target = std::exp(-std::pow(params.eps, -static_cast<double>(n) / ((2 * n + 3) * params.ell)));
  auto fam = mandache_family(geo, params, opt.count);
  rec.net_size_bound = fam.cardinality_bound;
  rec.log_net_size_bound = std::pow(params.beta / params.eps, static_cast<double>(n) / params.ell);
  rec.family_size = static_cast<int>(fam.members.size());
  rec.eps_prime = fam.eps_prime;
  rec.cl_norms = fam.cl_norms;
  if (rec.family_size < 2)
    throw ConfigError("mandache family too small to exhibit a collision candidate; counting bound " +
                      detail::fmt_double(fam.cardinality_bound));

  const int K = rec.family_size;
  auto l0 = assemble_dn(zero_potential(geo), basis, op, opt.tol);
  std::vector<DnMatrix> lg(K), gamma_full(K), gamma_int(K);
  std::vector<double> split(K, 0.0);
  parallel_indexed(K, [&](int k) {
    const auto& c = fam.members[k];
    lg[k] = assemble_dn(c, basis, op, opt.tol);
    auto q = liouville_potential(c, op);
    gamma_full[k] = dn_difference(lg[k], l0);
    gamma_int[k] = dn_difference(assemble_dn(restrict_to_domain(q), basis, op, opt.tol), l0);
    auto mult = exterior_multiplication(q, basis);
    double top = gamma_full[k].M.cwiseAbs().maxCoeff();
    if (top > 0) split[k] = (gamma_full[k].M - mult.M - gamma_int[k].M).cwiseAbs().maxCoeff() / top;
  });
  rec.split_defect = *std::max_element(split.begin(), split.end());

  std::vector<const DnMatrix*> pi, pf;
  for (int k = 0; k < K; ++k) {
    pi.push_back(&gamma_int[k]);
    pf.push_back(&gamma_full[k]);
  }
  rec.decay_fit = fit_decay(coefficient_envelope(pi));
  rec.decay_fit_full = fit_decay(coefficient_envelope(pf));

  // witness: smallest DN gap among pairs at least eps apart (peak values are exact up to roundoff)
  const double need = params.eps * (1 - 1e-12);
  rec.min_pair_gap = std::numeric_limits<double>::infinity();
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a < K; ++a)
    for (int b = a + 1; b < K; ++b) {
      double gg = linf_distance_b1(fam.members[a], fam.members[b]);
      double dg = dn_norm_of(dn_difference(lg[a], lg[b]));
      rec.pair_gamma_gaps.push_back(gg);
      rec.pair_dn_gaps.push_back(dg);
      rec.min_pair_gap = std::min(rec.min_pair_gap, gg);
      if (gg >= need && dg < best) {
        best = dg;
        rec.pair = {a, b};
        rec.gamma_gap = gg;
        rec.dn_gap = dg;
      }
    }
  if (rec.pair.first < 0)
    throw ConfigError("no family pair is eps-separated; counting bound " + detail::fmt_double(fam.cardinality_bound));

  if (!opt.full_data_region.empty()) {
    auto full = build_exterior_basis(geo, opt.full_data_region, opt.full_data_size, BasisKind::bumps);
    rec.full_data_gap = dn_norm_of(dn_difference(assemble_dn(fam.members[rec.pair.first], full, op, opt.tol),
                                                 assemble_dn(fam.members[rec.pair.second], full, op, opt.tol)));
  }
  return rec;
}

// ---------------------------------------------------------------- presets

std::vector<ConductivityPair> bump_ladder(GeometryPtr geo, const std::vector<double>& amplitudes,
                                          std::array<double, 2> centre, double radius) {
  std::vector<ConductivityPair> out;
  auto one = constant_conductivity(geo, 1.0);
  for (double a : amplitudes) {
    auto g = bump_conductivity(geo, {{a, centre, radius}}, 0.5, "bump a=" + detail::fmt_double(a));
    out.emplace_back(std::move(g), one);
  }
  return out;
}

std::vector<double> geometric_amplitudes(double a0, int first, int last) {
  std::vector<double> out;
  for (int k = first; k <= last; ++k) out.push_back(std::ldexp(a0, -k));
  return out;
}

std::vector<Conductivity> residual_conductivities(GeometryPtr geo) {
  struct P {
    double a, c, r;
  };
  const P ps[] = {{0.5, 0.0, 0.5}, {0.3, 0.3, 0.4}, {-0.3, -0.2, 0.6}, {0.8, 0.1, 0.7}, {0.2, -0.4, 0.3}};
  std::vector<Conductivity> out;
  int k = 0;
  for (auto p : ps) {
    std::array<double, 2> c{p.c, geo->n == 2 ? 0.5 * p.c : 0.0};
    out.push_back(bump_conductivity(geo, {{p.a, c, p.r}}, 0.5, "residual#" + std::to_string(k++)));
  }
  return out;
}

std::vector<GridField> smooth_fields(GeometryPtr geo, int count, std::uint64_t seed) {
  std::vector<GridField> out;
  for (int k = 0; k < count; ++k) {
    auto rng = detail::derived_rng(seed, static_cast<std::uint64_t>(k));
    std::uniform_real_distribution<double> pos(-2.0, 2.0), rad(1.0, 2.5), amp(-1.0, 1.0);
    std::vector<BumpSpec> parts;
    for (int j = 0; j < 3; ++j) {
      double cx = pos(rng), cy = geo->n == 2 ? pos(rng) : 0.0;
      double r = rad(rng), a = amp(rng);
      parts.push_back({a, {cx, cy}, r});
    }
    out.push_back(sample(geo, [&](double x, double y) {
      double v = 0;
      for (const auto& p : parts) v += p.amplitude * bump({x, y}, p.center, p.radius, geo->n);
      return v;
    }));
  }
  return out;
}

}  // namespace fraccal
