#pragma once

#include <string>
#include <vector>

namespace fraccal {

struct PlotOutput {
  std::vector<std::string> files;
  std::vector<std::string> warnings;
};

// Two-column .dat sidecars plus SVG figures for a report.json written by run().
PlotOutput emit_plots(const std::string& report_path, const std::string& out_dir);

// minimal SVG line/marker chart; used by emit_plots
struct Series {
  std::vector<double> x, y;
  std::string label;
  bool markers = true;
  std::string color = "#1f77b4";
};
void write_svg_chart(const std::string& path, const std::string& title, const std::string& xlabel,
                     const std::string& ylabel, const std::vector<Series>& series, bool logx, bool logy);

}  // namespace fraccal
