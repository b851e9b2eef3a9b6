#include <doctest.h>

#include <fraccal/errors.hpp>
#include <fraccal/experiments.hpp>

#include <cmath>

#include "fixtures.hpp"

using namespace fraccal;

TEST_SUITE("experiments") {

TEST_CASE("rhs shape arithmetic") {
  CHECK(rhs_shape(0.01, 0.9) == doctest::Approx(0.01 + 0.1 + std::pow(0.01, 0.05)).epsilon(1e-14));
  CHECK(rhs_shape(0.01, 0.9) == doctest::Approx(0.9043).epsilon(1e-4));
}

TEST_CASE("q index range") {
  CHECK(q_index_upper(1, 0.4) == doctest::Approx(10.0));
  CHECK(std::isinf(q_index_upper(1, 0.5)));
  auto g = fx::line(256);
  FracOperator op(g, OperatorMode::quadrature);
  auto b = build_exterior_basis(g, "annulus", 4, BasisKind::harmonic);
  auto fam = bump_ladder(g, {0.1}, {0.0, 0.0}, 0.5);
  CHECK_THROWS_AS(log_stability_fit(fam, {0.1}, 11.0, b, op), ConfigError);
  // q = 10 passes the range check and then fails for lack of usable points
  try {
    log_stability_fit(fam, {0.1}, 10.0, b, op);
    FAIL("expected an error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("q_index") == std::string::npos);
  }
}

TEST_CASE("identity residuals collapse for unit and constant conductivities") {
  auto g = fx::line(512);
  FracOperator op(g, OperatorMode::quadrature);
  auto fs = smooth_fields(g, 4, 9);
  for (double c : {1.0, 2.5}) {
    auto gamma = constant_conductivity(g, c, 0.3);
    for (std::size_t i = 0; i + 1 < fs.size(); ++i) CHECK(liouville_identity_residual(gamma, fs[i], fs[i + 1], op) <= 1e-8);
  }
}

TEST_CASE("identity residual for a bump conductivity decreases under refinement") {
  auto res = [](int N) {
    auto g = fx::line(N);
    FracOperator op(g, OperatorMode::quadrature);
    auto gamma = bump_conductivity(g, {{0.5, {0.0, 0.0}, 0.6}});
    auto fs = smooth_fields(g, 2, 13);
    return liouville_identity_residual(gamma, fs[0], fs[1], op);
  };
  double a = res(256), b = res(512), c = res(1024);
  MESSAGE("liouville residuals " << a << " " << b << " " << c);
  CHECK(c <= 1e-6);
  CHECK(b <= 0.7 * a);
  CHECK(c <= 0.7 * b);
}

TEST_CASE("m-tilde equation: identical pair is exactly zero, bump pair is small, swap is consistent") {
  auto g = fx::line(1024);
  FracOperator op(g, OperatorMode::quadrature);
  auto bump = bump_conductivity(g, {{0.5, {0.1, 0.0}, 0.6}});
  auto one = constant_conductivity(g, 1.0);
  CHECK(mtilde_equation_residual(bump, bump, op) == 0.0);
  double r = mtilde_equation_residual(bump, one, op), rs = mtilde_equation_residual(one, bump, op);
  CHECK(r <= 1e-5);
  CHECK(rs <= 1e-5);
}

TEST_CASE("DN equivalence for a conductivity equal to one outside the domain") {
  auto g = fx::line(1024);
  FracOperator op(g, OperatorMode::quadrature);
  auto b = build_exterior_basis(g, "annulus", 8, BasisKind::harmonic);
  auto eq = liouville_dn_equivalence(bump_conductivity(g, {{0.5, {0.0, 0.0}, 0.5}}), b, op);
  CHECK(eq.same_operator <= 1e-10);
  CHECK(eq.cross_operator <= 1e-4);
  CHECK(eq.dn_norm > 0);
}

TEST_CASE("exterior recovery: unit conductivity gives one; an interior bump is invisible at small widths") {
  auto g = fx::line(1024);
  FracOperator op(g, OperatorMode::quadrature);
  std::vector<Probe> probes{{{2.5, 0.0}, {0.4, 0.2, 0.1}}};
  auto b = build_probe_basis(g, "annulus", probes);
  auto M0 = assemble_dn(constant_conductivity(g, 1.0), b, op);
  auto r1 = exterior_recovery(M0, M0, probes, g->s);
  for (double v : r1[0].ratios) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
  auto Mi = assemble_dn(bump_conductivity(g, {{0.8, {0.0, 0.0}, 0.6}}), b, op);
  auto ri = exterior_recovery(Mi, M0, probes, g->s);
  CHECK(std::abs(ri[0].ratios.back() - 1) <= std::abs(ri[0].ratios.front() - 1));
  CHECK(ri[0].estimate == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("exterior recovery of a bump of height one half") {
  auto g = fx::line(1024);
  FracOperator op(g, OperatorMode::quadrature);
  std::vector<Probe> probes{{{2.5, 0.0}, {0.4, 0.2, 0.1, 0.05}}};
  auto b = build_probe_basis(g, "annulus", probes);
  auto M0 = assemble_dn(constant_conductivity(g, 1.0), b, op);
  auto M = assemble_dn(bump_conductivity(g, {{0.5, {2.5, 0.0}, 0.3}}), b, op);
  auto r = exterior_recovery(M, M0, probes, g->s);
  CHECK(r[0].estimate >= 1.4);
  CHECK(r[0].estimate <= 1.6);
}

TEST_CASE("exterior scan: identical pair excluded, halving amplitude halves the gap") {
  auto g = fx::line(1024);
  FracOperator op(g, OperatorMode::quadrature);
  auto b = build_exterior_basis(g, "annulus", 8, BasisKind::bumps);
  auto one = constant_conductivity(g, 1.0);
  std::vector<ConductivityPair> pairs{{one, one}};
  std::vector<double> amps{0.0};
  for (double a : {0.05, 0.1}) {
    pairs.push_back({bump_conductivity(g, {{a, {2.5, 0.0}, 0.3}}), one});
    amps.push_back(a);
  }
  auto scan = exterior_stability_scan(pairs, amps, b, op);
  CHECK(scan.points[0].excluded);
  CHECK(scan.points[0].gamma_gap == 0.0);
  CHECK(scan.points[0].dn_gap == 0.0);
  double ratio = scan.points[1].dn_gap / scan.points[2].dn_gap;
  CHECK(ratio >= 0.3);
  CHECK(ratio <= 0.7);
}

TEST_CASE("reduction check: identical pair is vacuous") {
  auto g = fx::line(512);
  FracOperator op(g, OperatorMode::quadrature);
  auto b = build_exterior_basis(g, "annulus", 4, BasisKind::harmonic);
  auto one = constant_conductivity(g, 1.0);
  auto r = reduction_check(one, one, 0.9, b, op);
  CHECK(r.lhs == 0.0);
  CHECK(r.x == 0.0);
}

TEST_CASE("spearman and decay fit on synthetic data") {
  CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
  CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(spearman({1, 2, 2, 3}, {1, 2, 2, 3}) == doctest::Approx(1.0));
  std::vector<std::pair<int, double>> env;
  for (int k = 0; k < 8; ++k) env.push_back({k, 3.0 * std::exp(-1.25 * k)});
  auto f = fit_decay(env);
  CHECK(f.rate == doctest::Approx(1.25).epsilon(1e-12));
  CHECK(f.amplitude == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f.spearman == doctest::Approx(-1.0));
}

TEST_CASE("decay fit on one interior bump") {
  auto g = fx::line(1024);
  FracOperator op(g, OperatorMode::quadrature);
  auto b = build_exterior_basis(g, "annulus", 16, BasisKind::harmonic);
  auto gamma = bump_conductivity(g, {{0.5, {0.0, 0.0}, 0.5}});
  auto q = restrict_to_domain(liouville_potential(gamma, op));
  auto d = dn_difference(assemble_dn(q, b, op), assemble_dn(zero_potential(g), b, op));
  auto env = coefficient_envelope({&d});
  std::vector<std::pair<int, double>> low;
  for (auto& e : env)
    if (e.first <= 7) low.push_back(e);
  auto f = fit_decay(low);
  CHECK(f.rate > 0);
  CHECK(f.r_squared >= 0.9);
}

TEST_CASE("Mandache theory targets") {
  auto g = fx::line(512);
  FracOperator op(g, OperatorMode::quadrature);
  auto b = build_exterior_basis(g, "annulus", 8, BasisKind::harmonic);
  InstabilityOptions opt;
  opt.count = 4;
  auto rec = instability_search({}, b, op, opt);
  CHECK(rec.delta_target == doctest::Approx(std::exp(-std::pow(10.0, 1 / 12.5))).epsilon(1e-12));
  CHECK(rec.delta_target == doctest::Approx(0.3005).epsilon(1e-3));
  CHECK(rec.log_net_size_bound == doctest::Approx(std::pow(20000.0, 0.4)).epsilon(1e-12));
  CHECK(rec.eps_prime >= 0.05);
  CHECK(rec.gamma_gap >= 0.1 * (1 - 1e-12));
}

TEST_CASE("presets") {
  auto a = geometric_amplitudes(1e-3, 1, 8);
  REQUIRE(a.size() == 8);
  CHECK(a[0] == doctest::Approx(5e-4));
  CHECK(a[7] == doctest::Approx(1e-3 / 256));
  auto g = fx::line(256);
  CHECK(residual_conductivities(g).size() == 5);
  auto f1 = smooth_fields(g, 3, 1), f2 = smooth_fields(g, 3, 1), f3 = smooth_fields(g, 3, 2);
  CHECK(f1[0].values == f2[0].values);
  CHECK(f1[0].values != f3[0].values);
}

}
