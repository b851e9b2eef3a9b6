#include <doctest.h>

#include <fraccal/config.hpp>
#include <fraccal/errors.hpp>
#include <fraccal/experiments.hpp>
#include <fraccal/harness.hpp>
#include <fraccal/plots.hpp>
#include <fraccal/serialize.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "fixtures.hpp"

using namespace fraccal;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("fraccal_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& s) {
  std::ofstream os(p, std::ios::binary);
  os << s;
}

std::vector<std::vector<double>> read_dat(const fs::path& p) {
  std::ifstream is(p);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::vector<double> r;
    double v;
    while (ls >> v) r.push_back(v);
    rows.push_back(r);
  }
  return rows;
}

const char* kUnit = R"([geometry]
n = 1
N = 1024

[suite]
name = residuals
preset = unit
seed = 7
)";

}  // namespace

TEST_SUITE("config") {

TEST_CASE("parse and echo") {
  auto c = parse_config(kUnit);
  CHECK(c.source_text == kUnit);
  CHECK(c.suite == Suite::residuals);
  CHECK(c.preset == "unit");
  CHECK(c.geometry.N == 1024);
  CHECK(c.entries.at("suite.seed") == "7");
}

TEST_CASE("unknown keys and sections are rejected") {
  CHECK_THROWS_AS(parse_config("[suite]\nname = residuals\ncolour = red\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[extras]\nx = 1\n[suite]\nname = residuals\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[geometry]\n"), ConfigError);
}

TEST_CASE("values are validated") {
  CHECK_THROWS_AS(parse_config("[geometry]\nN = many\n[suite]\nname = residuals\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[geometry]\nn = 3\n[suite]\nname = residuals\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[suite]\nname = everything\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[suite]\nname = residuals\n[measurement]\nring = donut 1 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[suite]\nname = logmodulus\nq_index = 11\n"), ConfigError);
  CHECK_NOTHROW(validate_config(parse_config("[suite]\nname = logmodulus\nq_index = 10\n")));
  CHECK_THROWS_AS(parse_config("[suite]\nname = reduction\ntheta0 = 0.75\n"), ConfigError);
}

TEST_CASE("integer ell - 2s is a config error with no report") {
  auto dir = scratch("ell");
  std::ofstream(dir / "bad.ini") << "[suite]\nname = instability\n[mandache]\nell = 2.8\n";
  try {
    run_file((dir / "bad.ini").string(), {(dir / "out").string(), 1, std::nullopt});
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(exit_code_for(e) == kExitConfig);
  }
  CHECK_FALSE(fs::exists(dir / "out" / "report.json"));
  CHECK(exit_code_for(SolverError("x")) == kExitSolver);
  CHECK(exit_code_for(InvariantError("x")) == kExitInvariant);
  fs::remove_all(dir);
}

}

TEST_SUITE("persistence") {

TEST_CASE("DN cache round trip, tamper detection, version refusal") {
  auto dir = scratch("cache");
  auto g = fx::line(256);
  FracOperator op(g, OperatorMode::quadrature);
  auto b = build_exterior_basis(g, "annulus", 4, BasisKind::harmonic);
  auto M = assemble_dn(bump_conductivity(g, {{0.4, {0.0, 0.0}, 0.6}}), b, op);
  auto path = (dir / "m.bin").string();
  cache_dn(path, M);
  auto L = load_dn(path, b);
  CHECK(std::memcmp(L.M.data(), M.M.data(), sizeof(double) * M.M.size()) == 0);
  CHECK(L.rows == M.rows);
  CHECK(L.equation == M.equation);

  auto text = slurp(path);
  auto tampered = text;
  auto pos = tampered.find("rows ");
  REQUIRE(pos != std::string::npos);
  tampered.insert(pos + 5, "0");
  spit(dir / "t.bin", tampered);
  CHECK_THROWS_AS(load_dn((dir / "t.bin").string(), b), HashMismatch);

  auto bumped = text;
  bumped.replace(0, std::string("FRACCAL-DN 1").size(), "FRACCAL-DN 2");
  spit(dir / "v.bin", bumped);
  try {
    load_dn((dir / "v.bin").string(), b);
    FAIL("expected a version refusal");
  } catch (const VersionMismatch& e) {
    CHECK(std::string(e.what()).find("delete the file") != std::string::npos);
  }

  auto other = build_exterior_basis(g, "annulus", 4, BasisKind::bumps);
  CHECK_THROWS_AS(load_dn(path, other), HashMismatch);
  fs::remove_all(dir);
}

TEST_CASE("assemble_dn reuses and repairs the cache") {
  auto dir = scratch("hook");
  auto g = fx::line(256);
  FracOperator op(g, OperatorMode::quadrature);
  auto b = build_exterior_basis(g, "annulus", 4, BasisKind::harmonic);
  auto gamma = bump_conductivity(g, {{0.4, {0.0, 0.0}, 0.6}});
  set_dn_cache(dir.string());
  auto first = assemble_dn(gamma, b, op);
  std::vector<fs::path> files;
  for (auto& e : fs::directory_iterator(dir)) files.push_back(e.path());
  REQUIRE(files.size() == 1);
  auto again = assemble_dn(gamma, b, op);
  CHECK((first.M.array() == again.M.array()).all());
  spit(files[0], "garbage");
  auto rebuilt = assemble_dn(gamma, b, op);
  CHECK((first.M.array() == rebuilt.M.array()).all());
  set_dn_cache(std::nullopt);
  fs::remove_all(dir);
}

TEST_CASE("grid files round trip") {
  auto dir = scratch("grid");
  auto g = fx::line(256);
  auto gamma = bump_conductivity(g, {{0.4, {0.0, 0.0}, 0.6}});
  save_conductivity((dir / "g.txt").string(), gamma);
  auto back = load_conductivity((dir / "g.txt").string(), g);
  CHECK(back.gamma == gamma.gamma);
  CHECK_THROWS_AS(load_conductivity((dir / "g.txt").string(), fx::line(512)), HashMismatch);
  fs::remove_all(dir);
}

}

TEST_SUITE("harness") {

TEST_CASE("unit residuals preset passes with tiny residuals") {
  auto dir = scratch("unit");
  auto r = run(parse_config(kUnit), {dir.string(), 1, std::nullopt});
  CHECK(r.exit_code == kExitOk);
  CHECK(r.status == "pass");
  auto rep = json::parse(slurp(dir / "report.json"));
  CHECK(rep["config"]["text"].get<std::string>() == kUnit);
  for (auto& v : rep["payload"]["liouville_residuals"]) CHECK(v.get<double>() <= 1e-8);
  CHECK(fs::exists(dir / "timing.json"));
  fs::remove_all(dir);
}

TEST_CASE("single-threaded reports are byte-identical; threaded scalars agree") {
  auto a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
  auto cfg = parse_config(kUnit);
  run(cfg, {a.string(), 1, std::nullopt});
  run(cfg, {b.string(), 1, std::nullopt});
  CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
  run(cfg, {c.string(), 4, std::nullopt});
  auto ja = json::parse(slurp(a / "report.json")), jc = json::parse(slurp(c / "report.json"));
  auto ra = ja["payload"]["liouville_residuals"], rc = jc["payload"]["liouville_residuals"];
  REQUIRE(ra.size() == rc.size());
  for (std::size_t i = 0; i < ra.size(); ++i)
    CHECK(std::abs(ra[i].get<double>() - rc[i].get<double>()) <= 1e-12 * std::abs(ra[i].get<double>()) + 1e-300);
  for (auto& d : {a, b, c}) fs::remove_all(d);
}

TEST_CASE("seed override changes provenance") {
  auto a = scratch("seed");
  run(parse_config(kUnit), {a.string(), 1, 99u});
  auto j = json::parse(slurp(a / "report.json"));
  CHECK(j["provenance"]["seed"].get<std::uint64_t>() == 99u);
  fs::remove_all(a);
}

}

TEST_SUITE("plots") {

TEST_CASE("empty data points give a header-only file and no image") {
  auto dir = scratch("empty");
  json rep = {{"suite", "logmodulus"}, {"payload", {{"data_points", json::array()}}}};
  spit(dir / "report.json", rep.dump());
  auto out = emit_plots((dir / "report.json").string(), (dir / "plots").string());
  CHECK_FALSE(out.warnings.empty());
  CHECK(fs::exists(dir / "plots" / "scatter.dat"));
  CHECK(read_dat(dir / "plots" / "scatter.dat").empty());
  CHECK_FALSE(fs::exists(dir / "plots" / "logmodulus.svg"));
  fs::remove_all(dir);
}

TEST_CASE("log-modulus plots: one scatter row per retained pair; data points reproduce the family") {
  auto dir = scratch("logmod");
  auto cfg = parse_config("[geometry]\nn = 1\nN = 1024\n[suite]\nname = logmodulus\n");
  auto r = run(cfg, {dir.string(), 1, std::nullopt});
  REQUIRE(fs::exists(dir / "report.json"));
  auto rep = json::parse(slurp(dir / "report.json"));
  int retained = 0;
  for (auto& p : rep["payload"]["data_points"]) retained += p["retained"].get<bool>();
  CHECK(retained == rep["payload"]["fit"]["retained"].get<int>());
  auto out = emit_plots(r.report_path, (dir / "plots").string());
  CHECK(read_dat(dir / "plots" / "scatter.dat").size() == static_cast<std::size_t>(retained));
  CHECK(fs::exists(dir / "plots" / "logmodulus.svg"));

  auto amps = geometric_amplitudes(1e-3, 1, 8);
  auto& pts = rep["payload"]["data_points"];
  REQUIRE(pts.size() == amps.size());
  for (std::size_t i = 0; i < amps.size(); ++i) CHECK(pts[i]["amplitude"].get<double>() == amps[i]);

  // direct fit with the same inputs serializes to the same numbers
  auto g = make_geometry(cfg.geometry);
  FracOperator op(g, cfg.mode);
  auto basis = build_exterior_basis(g, cfg.basis_region, cfg.basis_size, cfg.basis_kind);
  auto fit = log_stability_fit(bump_ladder(g, amps, {0.0, 0.0}, 0.5), amps, 2.0, basis, op);
  for (std::size_t i = 0; i < amps.size(); ++i) {
    CHECK(pts[i]["x"].get<double>() == fit.data_points[i].x);
    CHECK(pts[i]["y"].get<double>() == fit.data_points[i].y);
    CHECK(pts[i]["retained"].get<bool>() == fit.data_points[i].retained);
  }
  fs::remove_all(dir);
}

TEST_CASE("decay plot slope equals minus the fitted rate") {
  auto dir = scratch("decay");
  auto cfg = parse_config("[geometry]\nn = 1\nN = 512\n[suite]\nname = instability\n[mandache]\ncount = 4\n");
  auto r = run(cfg, {dir.string(), 1, std::nullopt});
  REQUIRE(fs::exists(dir / "report.json"));
  auto rep = json::parse(slurp(dir / "report.json"));
  emit_plots(r.report_path, (dir / "plots").string());
  auto rows = read_dat(dir / "plots" / "decay_fit.dat");
  REQUIRE(rows.size() >= 2);
  double slope = (rows.back()[1] - rows.front()[1]) / (rows.back()[0] - rows.front()[0]);
  CHECK(slope == doctest::Approx(-rep["payload"]["measured"]["decay_fit"]["rate"].get<double>()).epsilon(1e-9));
  CHECK(fs::exists(dir / "plots" / "decay.svg"));
  fs::remove_all(dir);
}

}
