#include "fraccal/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fraccal/errors.hpp"
#include "hash.hpp"

namespace fraccal {

namespace {

double angle_of(const double* x) {
  double t = std::atan2(x[1], x[0]);
  return t < 0 ? t + 2 * std::numbers::pi : t;
}

}  // namespace

Region Region::interval_union(std::string name, std::vector<std::pair<double, double>> iv) {
  Region r;
  r.name = std::move(name);
  r.kind = Kind::intervals;
  for (auto& [a, b] : iv)
    if (!(a < b)) throw ConfigError("region " + r.name + ": empty interval");
  std::sort(iv.begin(), iv.end());
  r.intervals = std::move(iv);
  return r;
}

Region Region::annulus(std::string name, double r_in, double r_out) {
  if (!(r_in >= 0 && r_in < r_out)) throw ConfigError("region " + name + ": need 0 <= r_in < r_out");
  Region r;
  r.name = std::move(name);
  r.kind = Kind::annulus;
  r.r_in = r_in;
  r.r_out = r_out;
  return r;
}

Region Region::sector(std::string name, double r_in, double r_out, double t0, double t1) {
  Region r = annulus(std::move(name), r_in, r_out);
  if (!(t0 >= 0 && t0 < t1 && t1 <= 2 * std::numbers::pi + 1e-12))
    throw ConfigError("region " + r.name + ": need 0 <= theta0 < theta1 <= 2pi");
  r.kind = Kind::sector;
  r.theta0 = t0;
  r.theta1 = t1;
  return r;
}

bool Region::contains(const double* x, int n) const {
  switch (kind) {
    case Kind::intervals:
      for (auto& [a, b] : intervals)
        if (x[0] > a && x[0] < b) return true;
      return false;
    case Kind::annulus: {
      double r = n == 1 ? std::abs(x[0]) : std::hypot(x[0], x[1]);
      return r > r_in && r < r_out;
    }
    case Kind::sector: {
      if (n != 2) return false;
      double r = std::hypot(x[0], x[1]);
      if (!(r > r_in && r < r_out)) return false;
      double t = angle_of(x);
      return t > theta0 && t < theta1;
    }
  }
  return false;
}

bool Region::contains_closure(const double* x, int n, double slack) const {
  switch (kind) {
    case Kind::intervals:
      for (auto& [a, b] : intervals)
        if (x[0] >= a - slack && x[0] <= b + slack) return true;
      return false;
    case Kind::annulus: {
      double r = n == 1 ? std::abs(x[0]) : std::hypot(x[0], x[1]);
      return r >= r_in - slack && r <= r_out + slack;
    }
    case Kind::sector: {
      if (n != 2) return false;
      double r = std::hypot(x[0], x[1]);
      if (!(r >= r_in - slack && r <= r_out + slack)) return false;
      if (r <= slack) return true;
      double t = angle_of(x);
      return t >= theta0 - slack && t <= theta1 + slack;
    }
  }
  return false;
}

double Region::extent() const {
  if (kind == Kind::intervals) {
    double e = 0;
    for (auto& [a, b] : intervals) e = std::max({e, std::abs(a), std::abs(b)});
    return e;
  }
  return r_out;
}

std::string Region::describe() const {
  std::ostringstream os;
  os << name << ":";
  switch (kind) {
    case Kind::intervals:
      os << "intervals";
      for (auto& [a, b] : intervals) os << " " << detail::fmt_double(a) << " " << detail::fmt_double(b);
      break;
    case Kind::annulus:
      os << "annulus " << detail::fmt_double(r_in) << " " << detail::fmt_double(r_out);
      break;
    case Kind::sector:
      os << "sector " << detail::fmt_double(r_in) << " " << detail::fmt_double(r_out) << " "
         << detail::fmt_double(theta0) << " " << detail::fmt_double(theta1);
      break;
  }
  return os.str();
}

std::size_t GeometryConfig::size() const {
  return n == 1 ? static_cast<std::size_t>(N) : static_cast<std::size_t>(N) * N;
}

double GeometryConfig::cell() const { return n == 1 ? h() : h() * h(); }

std::array<double, 2> GeometryConfig::node(std::size_t idx) const {
  if (n == 1) return {coord(static_cast<int>(idx)), 0.0};
  return {coord(static_cast<int>(idx / N)), coord(static_cast<int>(idx % N))};
}

void GeometryConfig::validate() const {
  if (n != 1 && n != 2) throw ConfigError("dimension n must be 1 or 2");
  double smax = std::min(1.0, n / 2.0);
  if (!(s > 0 && s < smax))
    throw ConfigError("order s must lie in (0, min(1, n/2)) = (0, " + detail::fmt_double(smax) + ")");
  if (!(L > 0) || !std::isfinite(L)) throw ConfigError("box half-width L must be positive");
  if (N < 64 || (N & (N - 1)) != 0) throw ConfigError("grid_points N must be a power of two >= 64");
  auto check_region = [&](const Region& r) {
    if (r.kind == Region::Kind::intervals && n != 1)
      throw ConfigError("region " + r.name + ": intervals only exist in 1D");
    if (r.kind == Region::Kind::sector && n != 2)
      throw ConfigError("region " + r.name + ": sectors only exist in 2D");
    if (!(r.extent() < L)) throw ConfigError("region " + r.name + " is not strictly inside the box");
  };
  check_region(omega);
  std::vector<std::string> seen;
  for (const auto& m : measurement_sets) {
    check_region(m);
    if (m.name == omega.name) throw ConfigError("measurement set may not reuse the domain name");
    if (std::find(seen.begin(), seen.end(), m.name) != seen.end())
      throw ConfigError("duplicate measurement set " + m.name);
    seen.push_back(m.name);
    // measurement sets must avoid the closed domain; checked on the grid nodes
    bool any = false;
    for (std::size_t i = 0; i < size(); ++i) {
      auto x = node(i);
      if (m.contains(x.data(), n)) {
        any = true;
        if (omega.contains_closure(x.data(), n))
          throw ConfigError("measurement set " + m.name + " intersects the closed domain");
      }
    }
    if (!any) throw ConfigError("measurement set " + m.name + " contains no grid nodes");
  }
  if (interior_nodes().empty()) throw ConfigError("domain contains no grid nodes");
}

const Region& GeometryConfig::region(std::string_view name) const {
  if (name == omega.name) return omega;
  for (const auto& m : measurement_sets)
    if (m.name == name) return m;
  throw ConfigError("unknown region '" + std::string(name) + "'");
}

bool GeometryConfig::has_region(std::string_view name) const {
  if (name == omega.name) return true;
  for (const auto& m : measurement_sets)
    if (m.name == name) return true;
  return false;
}

std::vector<std::size_t> GeometryConfig::nodes_in(const Region& r) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < size(); ++i) {
    auto x = node(i);
    if (r.contains(x.data(), n)) out.push_back(i);
  }
  return out;
}

std::vector<char> GeometryConfig::closure_mask(const Region& r) const {
  std::vector<char> out(size());
  for (std::size_t i = 0; i < size(); ++i) {
    auto x = node(i);
    out[i] = r.contains_closure(x.data(), n) ? 1 : 0;
  }
  return out;
}

GeometryConfig GeometryConfig::with_N(int newN) const {
  GeometryConfig g = *this;
  g.N = newN;
  return g;
}

std::string GeometryConfig::describe() const {
  std::ostringstream os;
  os << "n=" << n << " s=" << detail::fmt_double(s) << " L=" << detail::fmt_double(L) << " N=" << N
     << " omega=" << omega.describe();
  for (const auto& m : measurement_sets) os << " set=" << m.describe();
  return os.str();
}

std::uint64_t GeometryConfig::hash() const { return detail::fnv1a(describe()); }

GeometryPtr make_geometry(GeometryConfig g) {
  g.validate();
  return std::make_shared<const GeometryConfig>(std::move(g));
}

GeometryConfig default_geometry_1d(int N) {
  GeometryConfig g;
  g.n = 1;
  g.s = 0.4;
  g.L = 6.0;
  g.N = N;
  g.omega = Region::interval_union("omega", {{-1.0, 1.0}});
  g.measurement_sets = {
      Region::annulus("annulus", 2.0, 3.0),
      Region::interval_union("left", {{-3.0, -2.0}}),
      Region::interval_union("right", {{2.0, 3.0}}),
      Region::annulus("exterior", 1.05, 5.5),
  };
  return g;
}

GeometryConfig default_geometry_2d(int N) {
  GeometryConfig g;
  g.n = 2;
  g.s = 0.5;
  g.L = 6.0;
  g.N = N;
  g.omega = Region::ball("omega", 1.0);
  g.measurement_sets = {
      Region::annulus("annulus", 2.0, 3.0),
      Region::sector("upper", 2.0, 3.0, 0.0, std::numbers::pi),
      Region::sector("lower", 2.0, 3.0, std::numbers::pi, 2 * std::numbers::pi),
  };
  return g;
}

GridField::GridField(GeometryPtr g, std::vector<double> v) : geo(std::move(g)), values(std::move(v)) {
  if (!geo) throw ConfigError("GridField without geometry");
  if (values.size() != geo->size())
    throw GeometryMismatch("GridField length " + std::to_string(values.size()) + " does not match N^n = " +
                           std::to_string(geo->size()));
}

GridField::GridField(GeometryPtr g) : geo(std::move(g)) {
  if (!geo) throw ConfigError("GridField without geometry");
  values.assign(geo->size(), 0.0);
}

void GridField::check_finite() const {
  for (double v : values)
    if (!std::isfinite(v)) throw ConfigError("non-finite grid value");
}

void require_same_geometry(const GeometryConfig& a, const GeometryConfig& b) {
  if (&a == &b) return;
  if (a.n != b.n || a.N != b.N || a.L != b.L || a.hash() != b.hash())
    throw GeometryMismatch("fields live on different geometries");
}

double bump_profile(double r) {
  if (r >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - r * r));
}

double bump(const std::array<double, 2>& x, const std::array<double, 2>& c, double radius, int n) {
  double d = n == 1 ? std::abs(x[0] - c[0]) : std::hypot(x[0] - c[0], x[1] - c[1]);
  return bump_profile(d / radius);
}

}  // namespace fraccal
