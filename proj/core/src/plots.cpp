#include "fraccal/plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "fraccal/errors.hpp"

namespace fraccal {

using json = nlohmann::ordered_json;

namespace {

struct Writer {
  std::filesystem::path dir;
  PlotOutput* out;

  void dat(const std::string& name, const std::string& header, const std::vector<std::vector<double>>& rows) {
    auto p = dir / name;
    std::ofstream os(p, std::ios::trunc);
    if (!os) throw Error("cannot write " + p.string());
    os << "# " << header << '\n';
    char buf[64];
    for (const auto& r : rows) {
      for (std::size_t k = 0; k < r.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g", r[k]);
        os << (k ? " " : "") << buf;
      }
      os << '\n';
    }
    out->files.push_back(p.string());
  }

  void svg(const std::string& name, const std::string& title, const std::string& xl, const std::string& yl,
           const std::vector<Series>& s, bool logx, bool logy) {
    bool any = false;
    for (const auto& x : s) any = any || !x.x.empty();
    if (!any) {
      out->warnings.push_back(name + ": no data, image skipped");
      return;
    }
    auto p = dir / name;
    write_svg_chart(p.string(), title, xl, yl, s, logx, logy);
    out->files.push_back(p.string());
  }
};

double num(const json& j) { return j.is_number() ? j.get<double>() : std::nan(""); }

void plot_logmodulus(const json& pl, Writer& w) {
  std::vector<std::vector<double>> kept, flagged;
  Series sk{{}, {}, "retained", true, "#1f77b4"}, sf{{}, {}, "flagged", true, "#d62728"};
  if (pl.contains("data_points"))
    for (const auto& p : pl["data_points"]) {
      double x = num(p["x"]), y = num(p["y"]);
      if (p["retained"].get<bool>()) {
        kept.push_back({x, y});
        sk.x.push_back(x);
        sk.y.push_back(y);
      } else {
        flagged.push_back({x, y});
        if (x > 0 && y > 0) {
          sf.x.push_back(x);
          sf.y.push_back(y);
        }
      }
    }
  w.dat("scatter.dat", "x=||dLambda||_* y=||g1-g2||_Lq (retained pairs)", kept);
  w.dat("flagged.dat", "x y (gate, floor or range exclusions)", flagged);
  Series fit{{}, {}, "C |log x|^-sigma", false, "#2ca02c"};
  if (!kept.empty() && pl.contains("fit")) {
    double C = num(pl["fit"]["C"]), sig = num(pl["fit"]["sigma"]);
    double lo = *std::min_element(sk.x.begin(), sk.x.end()), hi = *std::max_element(sk.x.begin(), sk.x.end());
    std::vector<std::vector<double>> rows;
    for (int k = 0; k <= 40; ++k) {
      double x = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * k / 40.0);
      double y = C * std::pow(std::abs(std::log(x)), -sig);
      rows.push_back({x, y});
      fit.x.push_back(x);
      fit.y.push_back(y);
    }
    w.dat("fit.dat", "x modulus", rows);
  }
  w.svg("logmodulus.svg", "stability scatter", "||dLambda||_*", "||g1^1/2 - g2^1/2||_Lq", {sk, sf, fit}, true, true);
}

void plot_instability(const json& pl, Writer& w) {
  std::vector<std::vector<double>> env, line;
  Series se{{}, {}, "max |a| (interior part)", true, "#1f77b4"}, sl{{}, {}, "fit", false, "#d62728"};
  if (pl.contains("measured")) {
    const auto& d = pl["measured"]["decay_fit"];
    for (const auto& e : d["envelope"]) {
      double o = e[0].get<double>(), v = num(e[1]);
      env.push_back({o, v});
      se.x.push_back(o);
      se.y.push_back(v);
    }
    double A = num(d["amplitude"]), c = num(d["rate"]);
    for (const auto& e : env) {
      // natural log of the fitted envelope: slope -c
      line.push_back({e[0], std::log(A) - c * e[0]});
      sl.x.push_back(e[0]);
      sl.y.push_back(A * std::exp(-c * e[0]));
    }
  }
  w.dat("decay.dat", "max_order max|a_ij|", env);
  w.dat("decay_fit.dat", "max_order ln(A)-c*order", line);
  w.svg("decay.svg", "coefficient decay", "max harmonic order", "|a|", {se, sl}, false, true);
}

void plot_exterior(const json& pl, Writer& w) {
  std::vector<std::vector<double>> scan, rec, truth;
  Series st{{}, {}, "true gamma", false, "#7f7f7f"}, sr{{}, {}, "recovered", true, "#d62728"};
  if (pl.contains("scan"))
    for (const auto& p : pl["scan"]["points"])
      if (!p["excluded"].get<bool>()) scan.push_back({num(p["gamma_gap"]), num(p["dn_gap"])});
  if (pl.contains("recovery"))
    for (const auto& r : pl["recovery"])
      if (r["conductivity"] == "exterior bump") {
        double x = r["point"][0].get<double>();
        rec.push_back({x, num(r["estimate"])});
        sr.x.push_back(x);
        sr.y.push_back(num(r["estimate"]));
      }
  if (pl.contains("profile"))
    for (std::size_t k = 0; k < pl["profile"]["x"].size(); ++k) {
      double x = pl["profile"]["x"][k].get<double>(), g = num(pl["profile"]["gamma"][k]);
      truth.push_back({x, g});
      st.x.push_back(x);
      st.y.push_back(g);
    }
  w.dat("scan.dat", "||g1-g2||_Linf(ext) ||dLambda||_*", scan);
  w.dat("recovery.dat", "probe_x gamma_hat", rec);
  w.dat("truth.dat", "x gamma", truth);
  w.svg("recovery.svg", "exterior recovery", "x", "gamma", {st, sr}, false, false);
}

void plot_reduction(const json& pl, Writer& w) {
  std::vector<std::vector<double>> rows;
  Series s{{}, {}, "lhs", true, "#1f77b4"}, f{{}, {}, "fitted constant", true, "#ff7f0e"};
  if (pl.contains("checks"))
    for (const auto& c : pl["checks"]) {
      double x = num(c["x"]);
      if (!(x > 0)) continue;
      rows.push_back({x, num(c["lhs"])});
      s.x.push_back(x);
      s.y.push_back(num(c["lhs"]));
      f.x.push_back(x);
      f.y.push_back(num(c["fitted_constant"]));
    }
  w.dat("reduction.dat", "x lhs", rows);
  w.svg("reduction.svg", "reduction", "x", "value", {s, f}, true, true);
}

void plot_residuals(const json& pl, Writer& w) {
  std::vector<std::vector<double>> rows;
  Series s{{}, {}, "residual", true, "#1f77b4"};
  std::vector<double> vals;
  if (pl.contains("liouville_residuals"))
    for (const auto& v : pl["liouville_residuals"]) vals.push_back(num(v));
  if (pl.contains("conductivities"))
    for (const auto& c : pl["conductivities"]) vals.push_back(num(c["liouville_max"]));
  for (std::size_t k = 0; k < vals.size(); ++k) {
    rows.push_back({static_cast<double>(k), vals[k]});
    if (vals[k] > 0) {
      s.x.push_back(static_cast<double>(k));
      s.y.push_back(vals[k]);
    }
  }
  w.dat("residuals.dat", "index residual", rows);
  w.svg("residuals.svg", "identity residuals", "index", "relative residual", {s}, false, true);
}

std::string esc(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '<') o += "&lt;";
    else if (c == '>') o += "&gt;";
    else if (c == '&') o += "&amp;";
    else o += c;
  }
  return o;
}

}  // namespace

void write_svg_chart(const std::string& path, const std::string& title, const std::string& xlabel,
                     const std::string& ylabel, const std::vector<Series>& series, bool logx, bool logy) {
  const double W = 640, H = 440, ml = 80, mr = 20, mt = 40, mb = 60;
  auto tx = [&](double v) { return logx ? std::log10(v) : v; };
  auto ty = [&](double v) { return logy ? std::log10(v) : v; };
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& s : series)
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if ((logx && !(s.x[k] > 0)) || (logy && !(s.y[k] > 0)) || !std::isfinite(s.x[k]) || !std::isfinite(s.y[k]))
        continue;
      x0 = std::min(x0, tx(s.x[k]));
      x1 = std::max(x1, tx(s.x[k]));
      y0 = std::min(y0, ty(s.y[k]));
      y1 = std::max(y1, ty(s.y[k]));
    }
  if (x0 > x1) x0 = 0, x1 = 1;
  if (y0 > y1) y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-12) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
  double padx = 0.05 * (x1 - x0), pady = 0.05 * (y1 - y0);
  x0 -= padx, x1 += padx, y0 -= pady, y1 += pady;
  auto px = [&](double v) { return ml + (tx(v) - x0) / (x1 - x0) * (W - ml - mr); };
  auto py = [&](double v) { return H - mb - (ty(v) - y0) / (y1 - y0) * (H - mt - mb); };

  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error("cannot write " + path);
  char buf[256];
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf, "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" fill=\"none\" stroke=\"black\"/>\n",
                ml, mt, W - ml - mr, H - mt - mb);
  os << buf;
  for (int k = 0; k <= 4; ++k) {
    double vx = x0 + (x1 - x0) * k / 4, vy = y0 + (y1 - y0) * k / 4;
    double sx = ml + (W - ml - mr) * k / 4, sy = H - mb - (H - mt - mb) * k / 4;
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">%.3g</text>\n", sx, H - mb + 16,
                  logx ? std::pow(10, vx) : vx);
    os << buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" text-anchor=\"end\">%.3g</text>\n", ml - 6, sy + 4,
                  logy ? std::pow(10, vy) : vy);
    os << buf;
  }
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << esc(title) << "</text>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">" << esc(xlabel) << "</text>\n";
  os << "<text transform=\"translate(18," << H / 2 << ") rotate(-90)\" text-anchor=\"middle\">" << esc(ylabel)
     << "</text>\n";
  int li = 0;
  for (const auto& s : series) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if ((logx && !(s.x[k] > 0)) || (logy && !(s.y[k] > 0)) || !std::isfinite(s.y[k])) continue;
      pts.emplace_back(px(s.x[k]), py(s.y[k]));
    }
    if (pts.empty()) continue;
    if (s.markers) {
      for (auto [a, b] : pts) {
        std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3.5\" fill=\"%s\"/>\n", a, b, s.color.c_str());
        os << buf;
      }
    } else {
      os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
      for (auto [a, b] : pts) {
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ", a, b);
        os << buf;
      }
      os << "\"/>\n";
    }
    std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"%g\" fill=\"%s\">%s</text>\n", ml + 10, mt + 16 + 16.0 * li,
                  s.color.c_str(), esc(s.label).c_str());
    os << buf;
    ++li;
  }
  os << "</svg>\n";
}

PlotOutput emit_plots(const std::string& report_path, const std::string& out_dir) {
  std::ifstream is(report_path);
  if (!is) throw ConfigError("cannot read report " + report_path);
  json rep;
  try {
    rep = json::parse(is);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed report: ") + e.what());
  }
  if (!rep.contains("suite") || !rep.contains("payload")) throw ConfigError("report lacks suite/payload");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) throw Error("cannot create output directory " + out_dir);
  PlotOutput out;
  Writer w{out_dir, &out};
  const auto suite = rep["suite"].get<std::string>();
  const auto& pl = rep["payload"];
  if (suite == "logmodulus") plot_logmodulus(pl, w);
  else if (suite == "instability") plot_instability(pl, w);
  else if (suite == "exterior") plot_exterior(pl, w);
  else if (suite == "reduction") plot_reduction(pl, w);
  else plot_residuals(pl, w);
  return out;
}

}  // namespace fraccal
