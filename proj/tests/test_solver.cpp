#include <doctest.h>

#include <fraccal/dn_map.hpp>
#include <fraccal/errors.hpp>
#include <fraccal/forward_solver.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"

using namespace fraccal;

namespace {

ExteriorDatum far_bump(const GeometryPtr& g, double c = 2.5, double r = 0.4) {
  return make_exterior_datum(g, fx::bump_field(g, c, r).values, "bump");
}

double rel(const std::vector<double>& a, const std::vector<double>& b) { return fx::rel_l2(a, b); }

}  // namespace

TEST_SUITE("forward") {

TEST_CASE("exterior datum must vanish on the closed domain") {
  auto g = fx::line();
  CHECK_THROWS_AS(make_exterior_datum(g, fx::bump_field(g, 0.8, 0.5).values), ConfigError);
  CHECK_NOTHROW(far_bump(g));
}

TEST_CASE("zero datum gives zero solution") {
  auto g = fx::line();
  FracOperator op(g, OperatorMode::quadrature);
  auto z = make_exterior_datum(g, std::vector<double>(g->size(), 0.0));
  auto sol = solve_conductivity(bump_conductivity(g, {{0.5, {0.0, 0.0}, 0.6}}), z, op);
  for (double v : sol.u.values) CHECK(v == 0.0);
  CHECK(sol.energy == 0.0);
  auto sq = solve_schrodinger(zero_potential(g), z, op);
  for (double v : sq.u.values) CHECK(v == 0.0);
}

TEST_CASE("unit conductivity equals zero potential, constants cancel") {
  auto g = fx::line();
  FracOperator op(g, OperatorMode::quadrature);
  auto f = far_bump(g);
  auto a = solve_conductivity(constant_conductivity(g, 1.0), f, op);
  auto b = solve_schrodinger(zero_potential(g), f, op);
  auto c = solve_conductivity(constant_conductivity(g, 1.8), f, op);
  CHECK(rel(a.u.values, b.u.values) < 1e-12);
  CHECK(rel(c.u.values, a.u.values) < 1e-12);
}

TEST_CASE("Galerkin orthogonality and energy") {
  auto g = fx::line();
  FracOperator op(g, OperatorMode::quadrature);
  auto gamma = bump_conductivity(g, {{0.6, {0.1, 0.0}, 0.7}});
  auto f = far_bump(g);
  auto sol = solve_conductivity(gamma, f, op);
  GridField w = sol.u;
  for (std::size_t i = 0; i < w.size(); ++i) w[i] -= f.f[i];
  GalerkinSystem sys(gamma, op);
  double e = sys.form(sol.u.values, sol.u.values);
  CHECK(std::abs(sys.form(sol.u.values, w.values)) <= 1e-8 * e);
  CHECK(sol.energy == doctest::Approx(e).epsilon(1e-8));
  // the pair-sum discretization of the form is a separate route; it agrees to discretization accuracy
  CHECK(bilinear_form(sol.u, sol.u, gamma, op) == doctest::Approx(e).epsilon(1e-3));
}

TEST_CASE("zero potential energy is the Fourier energy") {
  auto g = fx::line(512);
  FracOperator sp(g, OperatorMode::spectral);
  auto sol = solve_schrodinger(zero_potential(g), far_bump(g), sp);
  CHECK(sol.energy == doctest::Approx(fourier_energy(sol.u, g->s)).epsilon(1e-6));
}

TEST_CASE("maximum principle smoke test") {
  auto g = fx::line();
  FracOperator op(g, OperatorMode::quadrature);
  auto f = far_bump(g);
  auto sol = solve_conductivity(constant_conductivity(g, 1.0), f, op);
  double mn = 0;
  for (double v : sol.u.values) mn = std::min(mn, v);
  CHECK(mn >= -1e-8);
}

TEST_CASE("solution is linear in the datum") {
  auto g = fx::line();
  FracOperator op(g, OperatorMode::quadrature);
  auto gamma = bump_conductivity(g, {{-0.3, {0.0, 0.0}, 0.6}});
  auto f1 = far_bump(g, 2.5), f2 = far_bump(g, -3.5, 0.8);
  std::vector<double> comb(g->size());
  for (std::size_t i = 0; i < comb.size(); ++i) comb[i] = 2 * f1.f[i] - 0.5 * f2.f[i];
  auto u1 = solve_conductivity(gamma, f1, op).u, u2 = solve_conductivity(gamma, f2, op).u;
  auto uc = solve_conductivity(gamma, make_exterior_datum(g, comb), op).u;
  std::vector<double> want(comb.size());
  for (std::size_t i = 0; i < want.size(); ++i) want[i] = 2 * u1[i] - 0.5 * u2[i];
  CHECK(rel(uc.values, want) < 1e-10);
}

TEST_CASE("Liouville correspondence of solutions") {
  auto g = fx::line();
  FracOperator op(g, OperatorMode::quadrature);
  auto gamma = bump_conductivity(g, {{0.5, {0.0, 0.0}, 0.7}});
  auto f = far_bump(g);
  auto u = solve_conductivity(gamma, f, op).u;
  auto sg = gamma.sqrt_gamma();
  std::vector<double> gf(g->size()), gu(g->size());
  for (std::size_t i = 0; i < gf.size(); ++i) {
    gf[i] = sg[i] * f.f[i];
    gu[i] = sg[i] * u[i];
  }
  auto v = solve_schrodinger(liouville_potential(gamma, op), make_exterior_datum(g, gf), op).u;
  CHECK(rel(v.values, gu) < 1e-8);
}

TEST_CASE("conductivity matrix is the potential matrix conjugated by the square root") {
  auto g = fx::line(256);
  FracOperator op(g, OperatorMode::quadrature);
  auto gamma = bump_conductivity(g, {{0.5, {0.2, 0.0}, 0.6}});
  GalerkinSystem ag(gamma, op), aq(liouville_potential(gamma, op), op);
  auto sg = gamma.sqrt_gamma();
  const auto& idx = ag.interior();
  Eigen::VectorXd d(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) d[i] = sg[idx[i]];
  Eigen::MatrixXd conj = d.asDiagonal() * aq.interior_matrix() * d.asDiagonal();
  CHECK((conj - ag.interior_matrix()).norm() <= 1e-10 * ag.interior_matrix().norm());
}

TEST_CASE("coercivity") {
  auto g = fx::line(256);
  FracOperator op(g, OperatorMode::quadrature);
  double l1 = coercivity_check(constant_conductivity(g, 1.0), op);
  CHECK(l1 > 0);
  CHECK(coercivity_check(constant_conductivity(g, 2.0), op) == doctest::Approx(2 * l1).epsilon(1e-10));
  CHECK(coercivity_check(bump_conductivity(g, {{0.8, {0.0, 0.0}, 0.9}}), op) >= l1 * (1 - 1e-10));
}

TEST_CASE("self-convergence under refinement") {
  auto at = [](int N) {
    auto g = fx::line(N);
    FracOperator op(g, OperatorMode::quadrature);
    auto gamma = bump_conductivity(g, {{0.5, {0.0, 0.0}, 0.7}});
    auto u = solve_conductivity(gamma, make_exterior_datum(g, fx::bump_field(g, 2.5, 0.6).values), op).u;
    return u;
  };
  auto u1 = at(256), u2 = at(512), u3 = at(1024);
  // compare on the coarse nodes
  auto diff = [](const GridField& c, const GridField& f) {
    const int r = f.geo->N / c.geo->N;
    double m = 0;
    for (std::size_t i = 0; i < c.size(); ++i) m = std::max(m, std::abs(c[i] - f[i * r]));
    return m;
  };
  double d12 = diff(u1, u2), d23 = diff(u2, u3);
  MESSAGE("self-convergence " << d12 << " " << d23);
  CHECK(d12 >= 1.5 * d23);
}

}

TEST_SUITE("dn") {

TEST_CASE("single bump basis has unit Gram") {
  auto g = fx::line();
  auto b = build_exterior_basis(g, "annulus", 1, BasisKind::bumps);
  REQUIRE(b->size() == 1);
  CHECK(b->gram(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("1D harmonic basis: parity classes are L2-orthogonal") {
  auto g = fx::line();
  auto b = build_exterior_basis(g, "annulus", 8, BasisKind::harmonic);
  for (std::size_t i = 0; i < b->size(); ++i)
    for (std::size_t j = 0; j < b->size(); ++j) {
      if (b->info[i].angular == b->info[j].angular) continue;
      double l2 = 0;
      for (std::size_t k = 0; k < g->size(); ++k) l2 += g->h() * b->functions[i].f[k] * b->functions[j].f[k];
      CHECK(std::abs(l2) < 1e-12);
    }
}

TEST_CASE("2D harmonic basis: Gram block-diagonal across angular orders") {
  auto g = fx::plane(64);
  auto b = build_exterior_basis(g, "annulus", 12, BasisKind::harmonic);
  std::vector<GridField> fs;
  for (auto& f : b->functions) fs.push_back(f.field());
  auto G = hs_gram(fs, g->s);
  for (std::size_t i = 0; i < fs.size(); ++i)
    for (std::size_t j = 0; j < fs.size(); ++j) {
      CHECK(G[i][j] == doctest::Approx(b->gram(i, j)).epsilon(1e-12));
      bool other = b->info[i].angular != b->info[j].angular || b->info[i].sign != b->info[j].sign;
      if (other) CHECK(std::abs(G[i][j]) <= 1e-8 * std::sqrt(G[i][i] * G[j][j]));
    }
}

TEST_CASE("basis errors") {
  auto g = fx::line();
  CHECK_THROWS_AS(build_exterior_basis(g, "nowhere", 4, BasisKind::bumps), ConfigError);
  CHECK_THROWS_AS(build_probe_basis(g, "annulus", {{{0.5, 0.0}, {0.2}}}), ConfigError);
  CHECK_THROWS_AS(build_probe_basis(g, "annulus", {{{2.5, 0.0}, {0.8}}}), ConfigError);
  auto f = far_bump(g);
  CHECK_THROWS_AS(make_basis(g, "annulus", BasisKind::bumps, {f, f}, {{}, {}}), ConfigError);
}

TEST_CASE("unit conductivity and zero potential give the same matrix; equal conductivities give zero difference") {
  auto g = fx::line(512);
  FracOperator op(g, OperatorMode::quadrature);
  auto b = build_exterior_basis(g, "annulus", 6, BasisKind::harmonic);
  auto a = assemble_dn(constant_conductivity(g, 1.0), b, op);
  auto z = assemble_dn(zero_potential(g), b, op);
  CHECK((a.M - z.M).norm() <= 1e-10 * a.M.norm());
  auto gamma = bump_conductivity(g, {{0.4, {0.0, 0.0}, 0.6}});
  auto d = dn_difference(assemble_dn(gamma, b, op), assemble_dn(gamma, b, op));
  CHECK(d.M.norm() == 0.0);
  CHECK(dn_operator_norm(d) == 0.0);
}

TEST_CASE("assembled matrices are symmetric and split into interior and multiplication parts") {
  auto g = fx::line(512);
  FracOperator op(g, OperatorMode::quadrature);
  auto b = build_exterior_basis(g, "annulus", 8, BasisKind::harmonic);
  auto gamma = bump_conductivity(g, {{0.5, {0.0, 0.0}, 0.6}});
  auto q = liouville_potential(gamma, op);
  auto Mg = assemble_dn(gamma, b, op), Mq = assemble_dn(q, b, op);
  CHECK(symmetry_defect(Mg) <= 1e-10);
  CHECK(symmetry_defect(Mq) <= 1e-10);
  CHECK(dn_operator_norm(dn_difference(Mg, Mq)) <= 1e-5 * dn_operator_norm(Mg));
  auto Mi = assemble_dn(restrict_to_domain(q), b, op);
  auto Mx = exterior_multiplication(q, b);
  CHECK((Mq.M - Mi.M - Mx.M).norm() <= 1e-10 * Mq.M.norm());
}

TEST_CASE("scaling the conductivity scales the matrix") {
  auto g = fx::line(512);
  FracOperator op(g, OperatorMode::quadrature);
  auto b = build_exterior_basis(g, "annulus", 6, BasisKind::bumps);
  auto M1 = assemble_dn(constant_conductivity(g, 1.0), b, op);
  auto M3 = assemble_dn(constant_conductivity(g, 3.0, 0.2), b, op);
  CHECK((M3.M - 3 * M1.M).norm() <= 1e-10 * M3.M.norm());
  auto zero = dn_difference(M1, M1);
  auto d1 = dn_difference(M1, zero), d3 = dn_difference(M3, zero);
  CHECK(dn_operator_norm(d3) == doctest::Approx(3 * dn_operator_norm(d1)).epsilon(1e-10));
}

TEST_CASE("operator norm: Gram gives one, matches generalized eigenproblem and sphere sampling") {
  auto g = fx::line();
  auto b = build_exterior_basis(g, "annulus", 3, BasisKind::bumps);
  DnMatrix d;
  d.basis = b;
  d.rows = d.cols = {0, 1, 2};
  d.M = b->gram;
  CHECK(dn_operator_norm(d) == doctest::Approx(1.0).epsilon(1e-10));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 5; ++t) {
    Eigen::MatrixXd R(3, 3);
    for (int i = 0; i < 9; ++i) R(i / 3, i % 3) = nd(rng);
    d.M = R + R.transpose();
    double n = dn_operator_norm(d);
    CHECK(n == doctest::Approx(oracle::generalized_sv(d.M, b->gram, b->gram)).epsilon(1e-10));
    double lo = oracle::sampled_norm(d.M, b->gram, b->gram, 20, 100 + t);
    CHECK(lo <= n * (1 + 1e-10));
    CHECK(lo >= n * (1 - 1e-6));
  }
}

TEST_CASE("restriction: identity on the full region, off-diagonal block for disjoint sets, norm does not grow") {
  auto g = fx::line(512);
  FracOperator op(g, OperatorMode::quadrature);
  auto b = build_exterior_basis(g, "annulus", 8, BasisKind::bumps);
  auto M = assemble_dn(bump_conductivity(g, {{0.5, {0.0, 0.0}, 0.6}}), b, op);
  auto full = restrict_dn(M, "annulus", "annulus");
  CHECK((full.M == M.M));
  auto off = restrict_dn(M, "left", "right");
  CHECK(off.rows.size() + off.cols.size() == 8);
  for (std::size_t i = 0; i < off.rows.size(); ++i)
    for (std::size_t j = 0; j < off.cols.size(); ++j) CHECK(off.M(i, j) == M.M(off.rows[i], off.cols[j]));
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 5; ++t) {
    DnMatrix r = M;
    for (int i = 0; i < r.M.size(); ++i) r.M.data()[i] = nd(rng);
    CHECK(dn_operator_norm(restrict_dn(r, "left", "right")) <= dn_operator_norm(r) * (1 + 1e-12));
  }
}

TEST_CASE("operator norm is nondecreasing on nested bases") {
  auto g = fx::line(512);
  FracOperator op(g, OperatorMode::quadrature);
  auto gamma = bump_conductivity(g, {{0.5, {0.0, 0.0}, 0.6}});
  auto full = build_exterior_basis(g, "annulus", 12, BasisKind::harmonic);
  double prev = 0;
  for (int k : {2, 4, 8, 12}) {
    std::vector<ExteriorDatum> fs(full->functions.begin(), full->functions.begin() + k);
    std::vector<BasisFunctionInfo> inf(full->info.begin(), full->info.begin() + k);
    auto b = make_basis(g, "annulus", BasisKind::harmonic, fs, inf);
    auto d = dn_difference(assemble_dn(gamma, b, op), assemble_dn(constant_conductivity(g, 1.0), b, op));
    double n = dn_operator_norm(d);
    CHECK(n >= prev * (1 - 1e-10));
    prev = n;
  }
}

}
