#include "fraccal/harness.hpp"

#include <omp.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numbers>

#include "fraccal/errors.hpp"
#include "fraccal/experiments.hpp"
#include "fraccal/serialize.hpp"
#include "hash.hpp"

#ifndef FRACCAL_VERSION
#define FRACCAL_VERSION "0.0.0"
#endif

namespace fraccal {

using json = nlohmann::ordered_json;

std::string library_version() { return FRACCAL_VERSION; }

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const GeometryMismatch*>(&e)) return kExitConfig;
  if (dynamic_cast<const InvariantError*>(&e)) return kExitInvariant;
  return kExitSolver;
}

namespace {

// default base amplitude of the log-modulus ladder, chosen so every rung passes the smallness gate
constexpr double kLadderA0 = 1e-3;

struct SuiteOutput {
  json payload = json::object();
  json checks = json::object();
};

json arr(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

FracOperator make_op(const ExperimentConfig& c, GeometryPtr geo) { return FracOperator(geo, c.mode); }

BasisPtr main_basis(const ExperimentConfig& c, GeometryPtr geo) {
  return build_exterior_basis(geo, c.basis_region, c.basis_size, c.basis_kind);
}

json basis_json(const ExteriorBasis& b) {
  return {{"kind", to_string(b.kind)},
          {"region", b.region},
          {"size", b.size()},
          {"gram_min_eig", b.gram_min_eig},
          {"gram_max_eig", b.gram_max_eig},
          {"content_hash", detail::hex64(b.content_hash())}};
}

// ---- residuals

SuiteOutput suite_residuals(const ExperimentConfig& c, GeometryPtr geo) {
  SuiteOutput out;
  auto op = make_op(c, geo);
  auto fields = smooth_fields(geo, 10, c.seed);
  auto residuals_for = [](const Conductivity& g, const std::vector<GridField>& fs, const FracOperator& o) {
    std::vector<double> r(fs.size());
    for (std::size_t k = 0; k < fs.size(); ++k) r[k] = liouville_identity_residual(g, fs[k], fs[(k + 1) % fs.size()], o);
    return r;
  };
  if (c.preset == "unit" || c.preset == "constant") {
    double level = c.preset == "unit" ? 1.0 : 2.0;
    auto g = constant_conductivity(geo, level);
    auto r = residuals_for(g, fields, op);
    double mx = *std::max_element(r.begin(), r.end());
    double mt = mtilde_equation_residual(g, g, op);
    out.payload["conductivity"] = {{"kind", "constant"}, {"value", level}};
    out.payload["liouville_residuals"] = arr(r);
    out.payload["liouville_max"] = mx;
    out.payload["mtilde_residual"] = mt;
    out.checks["liouville_le_1e-8"] = mx <= 1e-8;
    out.checks["mtilde_zero"] = mt == 0.0;
    return out;
  }
  // bumps: five conductivities, refinement study on the half grid
  auto coarse = make_geometry(geo->with_N(geo->N / 2));
  auto op_c = make_op(c, coarse);
  auto fields_c = smooth_fields(coarse, 10, c.seed);
  auto conds = residual_conductivities(geo);
  auto conds_c = residual_conductivities(coarse);
  auto one = constant_conductivity(geo, 1.0);
  json rows = json::array();
  double worst = 0, worst_ratio = 0, worst_mt = 0, worst_swap = 0;
  for (std::size_t k = 0; k < conds.size(); ++k) {
    auto r = residuals_for(conds[k], fields, op);
    auto rc = residuals_for(conds_c[k], fields_c, op_c);
    double mx = *std::max_element(r.begin(), r.end());
    double mxc = *std::max_element(rc.begin(), rc.end());
    double ratio = mxc > 0 ? mx / mxc : 0.0;
    double mt = mtilde_equation_residual(conds[k], one, op);
    double mtc = mtilde_equation_residual(conds_c[k], constant_conductivity(coarse, 1.0), op_c);
    double sw = mtilde_equation_residual(one, conds[k], op);
    worst = std::max(worst, mx);
    worst_ratio = std::max(worst_ratio, ratio);
    worst_mt = std::max(worst_mt, mt);
    worst_swap = std::max(worst_swap, sw);
    rows.push_back({{"label", conds[k].label},
                    {"liouville", arr(r)},
                    {"liouville_max", mx},
                    {"liouville_max_half_grid", mxc},
                    {"refinement_ratio", ratio},
                    {"mtilde", mt},
                    {"mtilde_half_grid", mtc},
                    {"mtilde_swapped", sw}});
  }
  out.payload["conductivities"] = rows;
  out.payload["liouville_max"] = worst;
  out.payload["refinement_ratio_max"] = worst_ratio;
  out.payload["mtilde_max"] = worst_mt;
  out.payload["mtilde_swapped_max"] = worst_swap;

  // DN-level equivalence for a conductivity equal to 1 outside the domain
  auto basis = main_basis(c, geo);
  auto inner = bump_conductivity(geo, {{0.5, {0.0, 0.0}, 0.5}}, 0.5, "interior bump");
  auto eq = liouville_dn_equivalence(inner, basis, op);
  out.payload["dn_equivalence"] = {{"basis", basis_json(*basis)},
                                   {"same_operator", eq.same_operator},
                                   {"cross_operator", eq.cross_operator},
                                   {"dn_norm", eq.dn_norm}};
  out.checks["liouville_le_1e-6"] = worst <= 1e-6;
  out.checks["refinement_ratio_le_0.7"] = worst_ratio <= 0.7;
  out.checks["mtilde_le_1e-5"] = worst_mt <= 1e-5;
  out.checks["dn_equivalence_le_1e-4"] = eq.cross_operator <= 1e-4;
  return out;
}

// ---- exterior

SuiteOutput suite_exterior(const ExperimentConfig& c, GeometryPtr geo) {
  SuiteOutput out;
  auto op = make_op(c, geo);
  const std::array<double, 2> x0{2.5, 0.0};
  if (!geo->region(c.basis_region).contains(x0.data(), geo->n))
    throw ConfigError("exterior suite needs the point (2.5, 0) inside basis.region");
  const double radius = 0.3;
  std::vector<double> amps = {0.05, 0.1, 0.2};
  if (c.a0 > 0) amps = {c.a0 / 4, c.a0 / 2, c.a0};

  auto basis = main_basis(c, geo);
  auto pairs = bump_ladder(geo, amps, x0, radius);
  auto scan = exterior_stability_scan(pairs, amps, basis, op);
  json pts = json::array();
  for (const auto& p : scan.points)
    pts.push_back({{"amplitude", p.amplitude},
                   {"gamma_gap", p.gamma_gap},
                   {"dn_gap", p.dn_gap},
                   {"ratio", p.ratio},
                   {"excluded", p.excluded},
                   {"note", p.note}});
  bool halving_ok = true;
  json halving = json::array();
  for (std::size_t k = 1; k < scan.points.size(); ++k) {
    double r = scan.points[k - 1].dn_gap / scan.points[k].dn_gap;
    halving.push_back(r);
    halving_ok = halving_ok && r >= 0.3 && r <= 0.7;
  }
  out.payload["basis"] = basis_json(*basis);
  out.payload["scan"] = {{"points", pts},
                         {"c_hat", scan.c_hat},
                         {"variation", scan.variation},
                         {"halving_ratios", halving},
                         {"lipschitz_ok", scan.lipschitz_ok}};

  // recovery
  const std::vector<double> widths = {0.4, 0.2, 0.1, 0.05};
  std::vector<Probe> probes = {{x0, widths}, {{-x0[0], 0.0}, widths}};
  auto pbasis = build_probe_basis(geo, c.basis_region, probes);
  auto one = constant_conductivity(geo, 1.0);
  auto m0 = assemble_dn(one, pbasis, op, c.solver_tol);
  struct Case {
    std::string name;
    BumpSpec bump;
  };
  const std::vector<Case> cases = {{"exterior bump", {0.5, x0, radius}}, {"interior bump", {0.5, {0.0, 0.0}, 0.5}}};
  json rec = json::array();
  bool rec_ok = true;
  for (const auto& cs : cases) {
    auto gamma = bump_conductivity(geo, {cs.bump}, 0.5, cs.name);
    auto m = assemble_dn(gamma, pbasis, op, c.solver_tol);
    auto res = exterior_recovery(m, m0, probes, geo->s);
    for (auto& r : res) {
      double truth = 1.0 + cs.bump.amplitude * bump(r.point, cs.bump.center, cs.bump.radius, geo->n);
      double err = std::abs(r.estimate - truth) / truth;
      rec_ok = rec_ok && err <= 0.05;
      rec.push_back({{"conductivity", cs.name},
                     {"point", {r.point[0], r.point[1]}},
                     {"widths", arr(r.widths)},
                     {"ratios", arr(r.ratios)},
                     {"extrapolated", arr(r.extrapolated)},
                     {"estimate", r.estimate},
                     {"true_value", truth},
                     {"relative_error", err}});
    }
  }
  // true exterior profile along the first axis for the plot
  json prof_x = json::array(), prof_g = json::array();
  auto g0 = bump_conductivity(geo, {cases.front().bump}, 0.5);
  for (std::size_t i = 0; i < geo->size(); ++i) {
    auto x = geo->node(i);
    if (x[1] == 0.0 && std::abs(x[0]) >= 1.0 && std::abs(x[0]) <= 4.0) {
      prof_x.push_back(x[0]);
      prof_g.push_back(g0.gamma[i]);
    }
  }
  out.payload["recovery"] = rec;
  out.payload["profile"] = {{"x", prof_x}, {"gamma", prof_g}};
  out.checks["lipschitz_variation_le_2"] = scan.lipschitz_ok;
  out.checks["halving_ratio_in_0.3_0.7"] = halving_ok;
  out.checks["recovery_within_5pct"] = rec_ok;
  return out;
}

// ---- reduction

SuiteOutput suite_reduction(const ExperimentConfig& c, GeometryPtr geo) {
  SuiteOutput out;
  auto op = make_op(c, geo);
  const double theta0 = c.theta0 > 0 ? c.theta0 : 0.9;
  auto amps = geometric_amplitudes(c.a0 > 0 ? c.a0 : 0.2, 0, 5);
  auto basis = main_basis(c, geo);
  auto fam = bump_ladder(geo, amps, {0.0, 0.0}, 0.5);
  AdmissibilityThresholds th;
  th.delta_fraction = c.delta_fraction;
  json adm = json::array();
  for (const auto& [g1, g2] : fam) {
    auto r = validate_admissibility(g1, g2, theta0, th);
    adm.push_back({{"bessel_norm", r.g1.bessel_norm},
                   {"growth", r.g1.growth},
                   {"exterior_l1", r.g1.exterior_l1},
                   {"all_ok", r.all_ok}});
    if (!r.all_ok)
      throw ConfigError("reduction family member fails admissibility: ellipticity=" +
                        std::to_string(r.g1.ellipticity_ok) + " smooth=" + std::to_string(r.g1.smooth_ok) +
                        " (norm " + detail::fmt_double(r.g1.bessel_norm) + ", growth " +
                        detail::fmt_double(r.g1.growth) + ") exterior=" + std::to_string(r.g1.exterior_ok));
  }
  auto scan = reduction_scan(fam, amps, theta0, basis, op, c.rows_region, c.cols_region);
  json rows = json::array();
  for (const auto& k : scan.checks)
    rows.push_back({{"amplitude", k.amplitude},
                    {"x", k.x},
                    {"lhs", k.lhs},
                    {"rhs_shape", k.rhs_shape},
                    {"fitted_constant", k.fitted_constant}});
  out.payload["basis"] = basis_json(*basis);
  out.payload["theta0"] = theta0;
  out.payload["partial"] = {{"rows", c.rows_region}, {"cols", c.cols_region}};
  out.payload["admissibility"] = adm;
  out.payload["checks"] = rows;
  out.payload["band"] = scan.band;
  out.payload["spread"] = scan.spread;
  out.payload["dominant_growth"] = scan.dominant_growth;
  out.payload["linear_growth"] = scan.linear_growth;
  out.checks["fitted_constant_band_le_5"] = scan.band_ok;
  out.checks["dominant_term_bounded"] = scan.dominant_bounded;
  out.checks["linear_ratio_unbounded"] = scan.linear_unbounded;
  return out;
}

// ---- log modulus

SuiteOutput suite_logmodulus(const ExperimentConfig& c, GeometryPtr geo) {
  SuiteOutput out;
  auto op = make_op(c, geo);
  LogFitOptions opt;
  opt.theta0 = c.theta0 > 0 ? c.theta0 : 0.81;
  opt.delta_fraction = c.delta_fraction;
  opt.tol = c.solver_tol;
  auto amps = geometric_amplitudes(c.a0 > 0 ? c.a0 : kLadderA0, 1, 8);
  auto basis = main_basis(c, geo);
  auto fam = bump_ladder(geo, amps, {0.0, 0.0}, 0.5);
  auto fit = log_stability_fit(fam, amps, c.q_index, basis, op, opt);
  json pts = json::array();
  for (const auto& p : fit.data_points)
    pts.push_back({{"amplitude", p.amplitude},
                   {"x", p.x},
                   {"y", p.y},
                   {"gate_ok", p.gate_ok},
                   {"above_floor", p.above_floor},
                   {"retained", p.retained},
                   {"note", p.note}});
  out.payload["basis"] = basis_json(*basis);
  out.payload["fit"] = {{"C", fit.C},
                        {"sigma", fit.sigma},
                        {"q_norm_index", fit.q_norm_index},
                        {"r_squared", fit.r_squared},
                        {"retained", fit.retained},
                        {"monotone", fit.monotone}};
  out.payload["floor"] = fit.floor;
  out.payload["gate"] = fit.gate;
  out.payload["theta0"] = fit.theta0;
  out.payload["data_points"] = pts;
  out.checks["sigma_positive"] = fit.sigma > 0;
  out.checks["r_squared_ge_0.8"] = fit.r_squared >= 0.8;
  out.checks["monotone_above_floor"] = fit.monotone;
  return out;
}

// ---- instability

json decay_json(const DecayFit& d) {
  json env = json::array();
  for (auto [o, v] : d.envelope) env.push_back({o, v});
  return {{"amplitude", d.amplitude},
          {"rate", d.rate},
          {"r_squared", d.r_squared},
          {"spearman", d.spearman},
          {"envelope", env}};
}

SuiteOutput suite_instability(const ExperimentConfig& c, GeometryPtr geo) {
  SuiteOutput out;
  auto op = make_op(c, geo);
  auto basis = main_basis(c, geo);
  InstabilityOptions opt;
  opt.count = c.family_count;
  opt.full_data_region = c.full_data_region;
  opt.tol = c.solver_tol;
  auto rec = instability_search(c.mandache, basis, op, opt);
  const auto& p = rec.params;
  double ratio = rec.gamma_gap > 0 ? rec.dn_gap / rec.gamma_gap : 0.0;
  out.payload["basis"] = basis_json(*basis);
  out.payload["params"] = {{"ell", p.ell}, {"eps", p.eps}, {"beta", p.beta}, {"spacing", p.lattice_spacing},
                           {"seed", p.seed}, {"count", rec.family_size}};
  out.payload["measured"] = {{"pair", {rec.pair.first, rec.pair.second}},
                             {"gamma_gap", rec.gamma_gap},
                             {"dn_gap", rec.dn_gap},
                             {"dn_over_gamma", ratio},
                             {"eps_prime", rec.eps_prime},
                             {"decay_fit", decay_json(rec.decay_fit)},
                             {"decay_fit_full", decay_json(rec.decay_fit_full)},
                             {"split_defect", rec.split_defect},
                             {"cl_norms", arr(rec.cl_norms)}};
  out.payload["theory"] = {{"delta_target", rec.delta_target},
                           {"net_size_bound", rec.net_size_bound},
                           {"log_net_size_bound", rec.log_net_size_bound}};
  if (rec.full_data_gap)
    out.payload["exploratory"] = {{"full_data_region", c.full_data_region}, {"full_data_gap", *rec.full_data_gap}};
  out.payload["pairs"] = {{"gamma_gap", arr(rec.pair_gamma_gaps)}, {"dn_gap", arr(rec.pair_dn_gaps)}};
  out.checks["eps_prime_ge_half_eps"] = rec.eps_prime >= 0.5 * p.eps;
  out.checks["decay_rate_positive_r2_ge_0.9"] = rec.decay_fit.rate > 0 && rec.decay_fit.r_squared >= 0.9;
  out.checks["spearman_le_-0.8"] = rec.decay_fit.spearman <= -0.8;
  out.checks["witness_ratio_le_1e-3"] = rec.gamma_gap >= p.eps * (1 - 1e-12) && ratio <= 1e-3;
  return out;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  if (!os) throw SolverError("cannot write " + p.string());
  os << text;
}

}  // namespace

RunResult run(ExperimentConfig cfg, const RunOptions& opt) {
  if (opt.threads) cfg.threads = *opt.threads;
  if (opt.seed) {
    cfg.seed = *opt.seed;
    cfg.mandache.seed = *opt.seed;
  }
  if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
  if (cfg.out_dir.empty()) throw ConfigError("no output directory (use --out or run.out)");
  validate_config(cfg);

  std::filesystem::path out(cfg.out_dir);
  std::filesystem::create_directories(out);
  omp_set_num_threads(cfg.threads);
  std::optional<std::string> prev_cache = dn_cache();
  if (cfg.cache) set_dn_cache(cache_directory((out / "cache").string()));

  json entries = json::object();
  for (const auto& [k, v] : cfg.entries) entries[k] = v;
  json report;
  report["format"] = "fraccal-report";
  report["config"] = {{"text", cfg.source_text},
                      {"entries", entries},
                      {"hash", detail::hex64(detail::fnv1a(cfg.source_text))}};
  report["suite"] = to_string(cfg.suite);
  report["preset"] = cfg.preset;
  report["provenance"] = {{"version", library_version()},
                          {"seed", cfg.seed},
                          {"threads", cfg.threads},
                          {"mode", to_string(cfg.mode)},
                          {"geometry", cfg.geometry.describe()}};

  RunResult res;
  auto t0 = std::chrono::steady_clock::now();
  SuiteOutput so;
  try {
    auto geo = make_geometry(cfg.geometry);
    switch (cfg.suite) {
      case Suite::residuals: so = suite_residuals(cfg, geo); break;
      case Suite::exterior: so = suite_exterior(cfg, geo); break;
      case Suite::reduction: so = suite_reduction(cfg, geo); break;
      case Suite::logmodulus: so = suite_logmodulus(cfg, geo); break;
      case Suite::instability: so = suite_instability(cfg, geo); break;
    }
    bool all = true;
    for (const auto& [k, v] : so.checks.items()) all = all && v.get<bool>();
    res.status = all ? "pass" : "fail";
    res.exit_code = all ? kExitOk : kExitInvariant;
    if (!all) res.message = "invariant check failed";
  } catch (const std::exception& e) {
    res.status = "error";
    res.message = e.what();
    res.exit_code = exit_code_for(e);
  }
  double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  set_dn_cache(prev_cache);

  report["payload"] = so.payload;
  report["checks"] = so.checks;
  res.payload_hash = detail::hex64(detail::fnv1a(so.payload.dump()));
  report["payload_hash"] = res.payload_hash;
  report["status"] = res.status;
  if (!res.message.empty()) report["message"] = res.message;
  report["exit_code"] = res.exit_code;

  res.report_path = (out / "report.json").string();
  write_text(out / "report.json", report.dump(2) + "\n");
  write_text(out / "timing.json", json({{"wall_seconds", wall}}).dump(2) + "\n");
  return res;
}

RunResult run_file(const std::string& config_path, const RunOptions& opt) {
  return run(load_config(config_path), opt);
}

}  // namespace fraccal
