#include "fraccal/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "fraccal/errors.hpp"
#include "fraccal/experiments.hpp"

namespace fraccal {

std::string to_string(Suite s) {
  switch (s) {
    case Suite::residuals: return "residuals";
    case Suite::exterior: return "exterior";
    case Suite::reduction: return "reduction";
    case Suite::logmodulus: return "logmodulus";
    case Suite::instability: return "instability";
  }
  return "?";
}

Suite suite_from_string(const std::string& s) {
  for (auto v : {Suite::residuals, Suite::exterior, Suite::reduction, Suite::logmodulus, Suite::instability})
    if (to_string(v) == s) return v;
  throw ConfigError("unknown suite '" + s + "' (residuals | exterior | reduction | logmodulus | instability)");
}

std::vector<std::string> suite_presets(Suite s) {
  switch (s) {
    case Suite::residuals: return {"bumps", "unit", "constant"};
    case Suite::exterior: return {"exterior-bump-scan"};
    case Suite::reduction: return {"interior-ladder"};
    case Suite::logmodulus: return {"amplitude-ladder"};
    case Suite::instability: return {"mandache-lattice"};
  }
  return {};
}

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& allowed() {
  static const std::map<std::string, std::set<std::string>> a = {
      {"geometry", {"n", "s", "L", "N", "omega_radius", "mode"}},
      {"measurement", {}},  // free names, values validated
      {"suite", {"name", "preset", "seed", "theta0", "q_index", "a0", "delta_fraction", "rows_region", "cols_region",
                 "full_data_region"}},
      {"basis", {"kind", "size", "region"}},
      {"mandache", {"ell", "eps", "beta", "spacing", "count"}},
      {"tolerances", {"solver"}},
      {"run", {"threads", "cache", "out"}},
  };
  return a;
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double d = 0;
  try {
    d = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size() || !std::isfinite(d)) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return d;
}

long long to_int(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long d = 0;
  try {
    d = std::stoll(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return d;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

Region parse_region(const std::string& name, const std::string& spec) {
  std::istringstream is(spec);
  std::string kind;
  is >> kind;
  std::vector<double> nums;
  std::string tok;
  while (is >> tok) nums.push_back(to_double("measurement." + name, tok));
  auto need = [&](std::size_t k) {
    if (nums.size() != k)
      throw ConfigError("measurement." + name + ": '" + kind + "' takes " + std::to_string(k) + " numbers");
  };
  if (kind == "annulus") {
    need(2);
    return Region::annulus(name, nums[0], nums[1]);
  }
  if (kind == "ball") {
    need(1);
    return Region::ball(name, nums[0]);
  }
  if (kind == "sector") {
    need(4);
    return Region::sector(name, nums[0], nums[1], nums[2], nums[3]);
  }
  if (kind == "interval") {
    if (nums.empty() || nums.size() % 2) throw ConfigError("measurement." + name + ": interval needs pairs a b");
    std::vector<std::pair<double, double>> iv;
    for (std::size_t i = 0; i < nums.size(); i += 2) iv.emplace_back(nums[i], nums[i + 1]);
    return Region::interval_union(name, iv);
  }
  throw ConfigError("measurement." + name + ": unknown region kind '" + kind + "' (annulus | ball | sector | interval)");
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream is(text);
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  ExperimentConfig c;
  c.source_text = text;
  for (const auto& [section, body] : tree) {
    auto it = allowed().find(section);
    if (body.empty() && !body.data().empty()) throw ConfigError("key '" + section + "' outside any section");
    if (it == allowed().end()) throw ConfigError("unknown section [" + section + "]");
    for (const auto& [key, val] : body) {
      if (section != "measurement" && !it->second.count(key))
        throw ConfigError("unknown key '" + key + "' in [" + section + "]");
      c.entries[section + "." + key] = val.data();
    }
  }
  auto get = [&](const std::string& k) -> std::optional<std::string> {
    auto it = c.entries.find(k);
    if (it == c.entries.end()) return std::nullopt;
    return it->second;
  };

  if (!get("suite.name")) throw ConfigError("missing suite.name");
  c.suite = suite_from_string(*get("suite.name"));

  int n = 1;
  if (auto v = get("geometry.n")) n = static_cast<int>(to_int("geometry.n", *v));
  if (n != 1 && n != 2) throw ConfigError("geometry.n must be 1 or 2");
  c.geometry = n == 1 ? default_geometry_1d() : default_geometry_2d();
  if (auto v = get("geometry.s")) c.geometry.s = to_double("geometry.s", *v);
  if (auto v = get("geometry.L")) c.geometry.L = to_double("geometry.L", *v);
  if (auto v = get("geometry.N")) c.geometry.N = static_cast<int>(to_int("geometry.N", *v));
  if (auto v = get("geometry.omega_radius")) {
    double r = to_double("geometry.omega_radius", *v);
    if (!(r > 0)) throw ConfigError("geometry.omega_radius must be positive");
    c.geometry.omega = n == 1 ? Region::interval_union("omega", {{-r, r}}) : Region::ball("omega", r);
  }
  if (auto v = get("geometry.mode")) c.mode = operator_mode_from_string(*v);

  bool have_sets = false;
  for (const auto& [k, v] : c.entries)
    if (k.rfind("measurement.", 0) == 0) {
      if (!have_sets) c.geometry.measurement_sets.clear();
      have_sets = true;
      c.geometry.measurement_sets.push_back(parse_region(k.substr(12), v));
    }
  c.geometry.validate();

  c.preset = get("suite.preset").value_or(suite_presets(c.suite).front());
  if (auto v = get("suite.seed")) {
    auto s = to_int("suite.seed", *v);
    if (s < 0) throw ConfigError("suite.seed must be nonnegative");
    c.seed = static_cast<std::uint64_t>(s);
  }
  if (auto v = get("suite.theta0")) c.theta0 = to_double("suite.theta0", *v);
  if (auto v = get("suite.q_index")) c.q_index = to_double("suite.q_index", *v);
  if (auto v = get("suite.a0")) c.a0 = to_double("suite.a0", *v);
  if (auto v = get("suite.delta_fraction")) c.delta_fraction = to_double("suite.delta_fraction", *v);
  c.rows_region = get("suite.rows_region").value_or("");
  c.cols_region = get("suite.cols_region").value_or("");
  c.full_data_region = get("suite.full_data_region").value_or(n == 1 ? "exterior" : "");

  if (auto v = get("basis.kind")) c.basis_kind = basis_kind_from_string(*v);
  if (auto v = get("basis.size")) c.basis_size = static_cast<int>(to_int("basis.size", *v));
  c.basis_region = get("basis.region").value_or("annulus");
  if (c.suite == Suite::exterior && !get("basis.kind")) c.basis_kind = BasisKind::bumps;

  c.mandache.seed = c.seed;
  if (auto v = get("mandache.ell")) c.mandache.ell = to_double("mandache.ell", *v);
  if (auto v = get("mandache.eps")) c.mandache.eps = to_double("mandache.eps", *v);
  if (auto v = get("mandache.beta")) c.mandache.beta = to_double("mandache.beta", *v);
  if (auto v = get("mandache.spacing")) c.mandache.lattice_spacing = to_double("mandache.spacing", *v);
  if (auto v = get("mandache.count")) c.family_count = static_cast<int>(to_int("mandache.count", *v));

  if (auto v = get("tolerances.solver")) c.solver_tol = to_double("tolerances.solver", *v);
  if (auto v = get("run.threads")) c.threads = static_cast<int>(to_int("run.threads", *v));
  if (auto v = get("run.cache")) c.cache = to_bool("run.cache", *v);
  c.out_dir = get("run.out").value_or("");

  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read config " + path);
  std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return parse_config(text);
}

void validate_config(const ExperimentConfig& c) {
  const auto& g = c.geometry;
  g.validate();
  auto presets = suite_presets(c.suite);
  if (std::find(presets.begin(), presets.end(), c.preset) == presets.end())
    throw ConfigError("preset '" + c.preset + "' is not available for suite " + to_string(c.suite));
  if (c.basis_size < 1 || c.basis_size > 256) throw ConfigError("basis.size must be in [1, 256]");
  if (c.basis_kind == BasisKind::probes) throw ConfigError("basis.kind = probes is reserved for exterior recovery");
  if (!g.has_region(c.basis_region) || c.basis_region == g.omega.name)
    throw ConfigError("basis.region '" + c.basis_region + "' is not a measurement set");
  for (const auto* r : {&c.rows_region, &c.cols_region})
    if (!r->empty() && (!g.has_region(*r) || *r == g.omega.name))
      throw ConfigError("partial-data region '" + *r + "' is not a measurement set");
  if (!c.full_data_region.empty() && c.suite == Suite::instability && !g.has_region(c.full_data_region))
    throw ConfigError("suite.full_data_region '" + c.full_data_region + "' is not a measurement set");
  if (!(c.solver_tol > 0 && c.solver_tol < 1e-3)) throw ConfigError("tolerances.solver must be in (0, 1e-3)");
  if (c.threads < 1 || c.threads > 256) throw ConfigError("run.threads must be in [1, 256]");
  if (c.a0 < 0) throw ConfigError("suite.a0 must be nonnegative");
  if (!(c.delta_fraction > 0 && c.delta_fraction < 1)) throw ConfigError("suite.delta_fraction must be in (0, 1)");
  if (c.theta0 != 0) check_theta0(g.n, g.s, c.theta0);
  if (c.suite == Suite::logmodulus) {
    double hi = q_index_upper(g.n, g.s);
    if (!(c.q_index >= 1 && c.q_index <= hi * (1 + 1e-12)))
      throw ConfigError("suite.q_index must lie in [1, 2n/(n-2s)] = [1, " + std::to_string(hi) + "]");
  }
  if (c.suite == Suite::instability) {
    validate_mandache(c.mandache, g.s);
    if (c.family_count < 2) throw ConfigError("mandache.count must be >= 2");
    if (c.basis_kind != BasisKind::harmonic) throw ConfigError("instability suite needs basis.kind = harmonic");
  }
}

}  // namespace fraccal
