#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace fraccal {

// An open subset of R^n used for the domain and for measurement sets.
//   intervals: union of open intervals (n = 1 only)
//   annulus:   r_in < |x| < r_out (r_in = 0 gives a ball; in 1D the symmetric pair of intervals)
//   sector:    annulus restricted to theta0 < arg x < theta1 (n = 2 only)
struct Region {
  enum class Kind { intervals, annulus, sector };

  std::string name;
  Kind kind = Kind::annulus;
  std::vector<std::pair<double, double>> intervals;
  double r_in = 0.0;
  double r_out = 0.0;
  double theta0 = 0.0;
  double theta1 = 0.0;

  static Region interval_union(std::string name, std::vector<std::pair<double, double>> iv);
  static Region annulus(std::string name, double r_in, double r_out);
  static Region ball(std::string name, double r) { return annulus(std::move(name), 0.0, r); }
  static Region sector(std::string name, double r_in, double r_out, double t0, double t1);

  bool contains(const double* x, int n) const;
  // closure test with a small absolute slack
  bool contains_closure(const double* x, int n, double slack = 1e-12) const;
  // sup of |x| over the region
  double extent() const;
  std::string describe() const;
};

struct GeometryConfig {
  int n = 1;
  double s = 0.4;
  double L = 6.0;
  int N = 1024;
  Region omega = Region::interval_union("omega", {{-1.0, 1.0}});
  std::vector<Region> measurement_sets;

  void validate() const;

  double h() const { return 2.0 * L / N; }
  double period() const { return 2.0 * L; }
  std::size_t size() const;
  std::array<int, 2> dims() const { return {N, n == 2 ? N : 1}; }
  // cell volume h^n
  double cell() const;

  // coordinates of flat node index (row-major, axis 0 slowest in 2D)
  std::array<double, 2> node(std::size_t idx) const;
  double coord(int j) const { return -L + j * h(); }

  const Region& region(std::string_view name) const;
  bool has_region(std::string_view name) const;

  std::vector<std::size_t> nodes_in(const Region& r) const;
  std::vector<std::size_t> interior_nodes() const { return nodes_in(omega); }
  std::vector<char> closure_mask(const Region& r) const;

  // same geometry with N replaced (used by refinement studies)
  GeometryConfig with_N(int newN) const;

  std::uint64_t hash() const;
  std::string describe() const;
};

using GeometryPtr = std::shared_ptr<const GeometryConfig>;

GeometryPtr make_geometry(GeometryConfig g);

// default 1D geometry: n=1, s=0.4, L=6, N=1024, omega=(-1,1),
// measurement sets annulus=(-3,-2)u(2,3), left=(-3,-2), right=(2,3), exterior=1.05<|x|<5.5
GeometryConfig default_geometry_1d(int N = 1024);
// default 2D geometry: n=2, s=0.5, L=6, N=128, omega=B1, annulus B3\B2, half-annuli upper/lower
GeometryConfig default_geometry_2d(int N = 128);

struct GridField {
  GeometryPtr geo;
  std::vector<double> values;

  GridField() = default;
  GridField(GeometryPtr g, std::vector<double> v);
  explicit GridField(GeometryPtr g);

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  void check_finite() const;
};

// throws GeometryMismatch unless both geometries describe the same grid
void require_same_geometry(const GeometryConfig& a, const GeometryConfig& b);

template <class F>
GridField sample(GeometryPtr g, F&& f) {
  GridField out(g);
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto x = g->node(i);
    out.values[i] = f(x[0], x[1]);
  }
  return out;
}

// C-infinity bump exp(1 - 1/(1-r^2)) for r < 1, value 1 at the centre
double bump_profile(double r);
double bump(const std::array<double, 2>& x, const std::array<double, 2>& c, double radius, int n);

}  // namespace fraccal
