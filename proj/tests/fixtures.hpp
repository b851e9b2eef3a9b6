#pragma once

#include <fraccal/conductivity.hpp>
#include <fraccal/geometry.hpp>

#include <cmath>
#include <numbers>
#include <random>

namespace fx {

inline fraccal::GeometryPtr line(int N = 256, double s = 0.4) {
  auto g = fraccal::default_geometry_1d(N);
  g.s = s;
  return fraccal::make_geometry(g);
}

inline fraccal::GeometryPtr plane(int N = 64) { return fraccal::make_geometry(fraccal::default_geometry_2d(N)); }

// grid cosine cos(k x) with k = 2 pi m / P
inline fraccal::GridField cosine(const fraccal::GeometryPtr& g, int m) {
  const double k = 2 * std::numbers::pi * m / g->period();
  return fraccal::sample(g, [k](double x, double) { return std::cos(k * x); });
}

inline fraccal::GridField bump_field(const fraccal::GeometryPtr& g, double c, double r, double a = 1.0) {
  return fraccal::sample(g, [&](double x, double y) { return a * fraccal::bump({x, y}, {c, 0.0}, r, g->n); });
}

inline double rel_l2(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

}  // namespace fx
