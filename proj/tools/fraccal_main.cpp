// fraccal: run stability experiments for the fractional conductivity equation.
#include <CLI11.hpp>
#include <iostream>

#include "fraccal/errors.hpp"
#include "fraccal/harness.hpp"
#include "fraccal/plots.hpp"

namespace {

int cmd_run(const std::string& config, const std::string& out, int threads, long long seed) {
  fraccal::RunOptions opt;
  opt.out_dir = out;
  if (threads > 0) opt.threads = threads;
  if (seed >= 0) opt.seed = static_cast<std::uint64_t>(seed);
  auto res = fraccal::run_file(config, opt);
  std::cout << res.status << " " << res.report_path << " payload " << res.payload_hash << "\n";
  if (!res.message.empty()) std::cerr << "fraccal: " << res.message << "\n";
  return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fraccal - fractional Calderon stability experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", fraccal::library_version());

  std::string config, out, report;
  int threads = 0;
  long long seed = -1;

  auto* run = app.add_subcommand("run", "run the suite selected by a config file");
  run->add_option("--config", config, "experiment config (INI)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "output directory")->required();
  run->add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 256));
  run->add_option("--seed", seed, "override the config seed")->check(CLI::NonNegativeNumber);

  auto* plots = app.add_subcommand("plots", "emit plot data and SVG figures for a report");
  plots->add_option("--report", report, "report.json written by run")->required()->check(CLI::ExistingFile);
  plots->add_option("--out", out, "output directory")->required();

  auto* validate = app.add_subcommand("validate", "check a config without computing");
  validate->add_option("--config", config, "experiment config (INI)")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : fraccal::kExitConfig;
  }

  try {
    if (*run) return cmd_run(config, out, threads, seed);
    if (*plots) {
      auto res = fraccal::emit_plots(report, out);
      for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
      for (const auto& f : res.files) std::cout << f << "\n";
      return fraccal::kExitOk;
    }
    if (*validate) {
      auto c = fraccal::load_config(config);
      std::cout << "ok " << fraccal::to_string(c.suite) << " preset=" << c.preset << "\n";
      return fraccal::kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "fraccal: " << e.what() << "\n";
    return fraccal::exit_code_for(e);
  }
  return fraccal::kExitOk;
}
