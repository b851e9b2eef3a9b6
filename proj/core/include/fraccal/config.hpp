#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fraccal/conductivity.hpp"
#include "fraccal/dn_map.hpp"

namespace fraccal {

enum class Suite { residuals, exterior, reduction, logmodulus, instability };
std::string to_string(Suite s);
Suite suite_from_string(const std::string& s);

struct ExperimentConfig {
  std::string source_text;  // raw config text, echoed verbatim
  std::map<std::string, std::string> entries;  // "section.key" -> value as written

  GeometryConfig geometry;
  OperatorMode mode = OperatorMode::quadrature;

  Suite suite = Suite::residuals;
  std::string preset;
  std::uint64_t seed = 7;
  double theta0 = 0;  // 0: suite default
  double q_index = 2;
  double a0 = 0;      // 0: preset default
  double delta_fraction = 0.99;
  std::string rows_region, cols_region;

  BasisKind basis_kind = BasisKind::harmonic;
  int basis_size = 16;
  std::string basis_region = "annulus";

  MandacheParams mandache;
  int family_count = 32;
  std::string full_data_region;

  double solver_tol = 1e-12;
  int threads = 1;
  bool cache = false;
  std::string out_dir;
};

// parse INI text; every key is checked against the allow-list and every value validated
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
// suite-specific checks (theta0 range, Mandache admissibility, q index, regions, basis)
void validate_config(const ExperimentConfig& c);

// presets accepted per suite; the first entry is the default
std::vector<std::string> suite_presets(Suite s);

}  // namespace fraccal
