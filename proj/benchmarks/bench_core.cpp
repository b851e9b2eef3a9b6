#include <benchmark/benchmark.h>

#include <fraccal/dn_map.hpp>
#include <fraccal/experiments.hpp>

using namespace fraccal;

namespace {

GeometryPtr line(int N) { return make_geometry(default_geometry_1d(N)); }

void BM_FracLaplacian(benchmark::State& st) {
  auto g = line(static_cast<int>(st.range(0)));
  FracOperator op(g, st.range(1) ? OperatorMode::quadrature : OperatorMode::spectral);
  auto u = smooth_fields(g, 1, 1)[0];
  for (auto _ : st) benchmark::DoNotOptimize(frac_laplacian(u, op));
}
BENCHMARK(BM_FracLaplacian)->ArgsProduct({{256, 1024, 4096}, {0, 1}});

void BM_OperatorSetup(benchmark::State& st) {
  auto g = line(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(FracOperator(g, OperatorMode::quadrature));
}
BENCHMARK(BM_OperatorSetup)->Arg(1024)->Arg(4096);

void BM_BilinearForm(benchmark::State& st) {
  auto g = line(static_cast<int>(st.range(0)));
  FracOperator op(g, OperatorMode::quadrature);
  auto gamma = bump_conductivity(g, {{0.5, {0.0, 0.0}, 0.6}});
  auto f = smooth_fields(g, 2, 3);
  for (auto _ : st) benchmark::DoNotOptimize(bilinear_form(f[0], f[1], gamma, op));
}
BENCHMARK(BM_BilinearForm)->Arg(256)->Arg(1024);

void BM_GalerkinAssembly(benchmark::State& st) {
  auto g = line(static_cast<int>(st.range(0)));
  FracOperator op(g, OperatorMode::quadrature);
  auto gamma = bump_conductivity(g, {{0.5, {0.0, 0.0}, 0.6}});
  for (auto _ : st) benchmark::DoNotOptimize(GalerkinSystem(gamma, op));
}
BENCHMARK(BM_GalerkinAssembly)->Arg(512)->Arg(1024)->Arg(2048);

void BM_DnAssembly(benchmark::State& st) {
  auto g = line(1024);
  FracOperator op(g, OperatorMode::quadrature);
  auto basis = build_exterior_basis(g, "annulus", static_cast<int>(st.range(0)), BasisKind::harmonic);
  auto gamma = bump_conductivity(g, {{0.5, {0.0, 0.0}, 0.6}});
  for (auto _ : st) benchmark::DoNotOptimize(assemble_dn(gamma, basis, op));
}
BENCHMARK(BM_DnAssembly)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_DnNorm(benchmark::State& st) {
  auto g = line(1024);
  FracOperator op(g, OperatorMode::quadrature);
  auto basis = build_exterior_basis(g, "annulus", 16, BasisKind::harmonic);
  auto a = assemble_dn(bump_conductivity(g, {{0.5, {0.0, 0.0}, 0.6}}), basis, op);
  auto b = assemble_dn(constant_conductivity(g, 1.0), basis, op);
  auto d = dn_difference(a, b);
  for (auto _ : st) benchmark::DoNotOptimize(dn_operator_norm(d));
}
BENCHMARK(BM_DnNorm);

}  // namespace

BENCHMARK_MAIN();
