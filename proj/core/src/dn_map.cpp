#include "fraccal/dn_map.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <filesystem>
#include <numbers>
#include <sstream>

#include "fraccal/errors.hpp"
#include "fraccal/serialize.hpp"
#include "hash.hpp"

namespace fraccal {

std::string to_string(BasisKind k) {
  switch (k) {
    case BasisKind::bumps: return "bumps";
    case BasisKind::harmonic: return "harmonic";
    case BasisKind::probes: return "probes";
  }
  return "?";
}

BasisKind basis_kind_from_string(const std::string& s) {
  if (s == "bumps") return BasisKind::bumps;
  if (s == "harmonic") return BasisKind::harmonic;
  if (s == "probes") return BasisKind::probes;
  throw ConfigError("unknown basis kind '" + s + "' (bumps | harmonic)");
}

std::vector<int> ExteriorBasis::functions_in(const Region& r) const {
  std::vector<int> out;
  for (std::size_t k = 0; k < functions.size(); ++k) {
    bool inside = true;
    const auto& f = functions[k].f;
    for (std::size_t i = 0; i < f.size() && inside; ++i)
      if (f[i] != 0.0) {
        auto x = geo->node(i);
        inside = r.contains(x.data(), geo->n);
      }
    if (inside) out.push_back(static_cast<int>(k));
  }
  return out;
}

std::uint64_t ExteriorBasis::content_hash() const {
  std::uint64_t h = geo->hash();
  for (const auto& f : functions) h = detail::fnv1a_bytes(f.f.data(), f.f.size() * sizeof(double), h);
  return h;
}

std::string ExteriorBasis::descriptor() const {
  std::ostringstream os;
  os << to_string(kind) << " region=" << region << " size=" << size() << " content=" << detail::hex64(content_hash());
  return os.str();
}

namespace {

std::vector<std::pair<double, double>> components_1d(const Region& r) {
  if (r.kind == Region::Kind::intervals) return r.intervals;
  if (r.kind == Region::Kind::annulus) {
    if (r.r_in == 0) return {{-r.r_out, r.r_out}};
    return {{-r.r_out, -r.r_in}, {r.r_in, r.r_out}};
  }
  throw ConfigError("region " + r.name + " has no 1D components");
}

ExteriorDatum bump_datum(const GeometryPtr& geo, std::array<double, 2> c, double radius, const std::string& label) {
  std::vector<double> v(geo->size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = bump(geo->node(i), c, radius, geo->n);
  return make_exterior_datum(geo, std::move(v), label);
}

void normalize_hs(std::vector<ExteriorDatum>& fs, double s) {
  for (auto& f : fs) {
    double nrm = hs_norm(f.field(), s);
    if (!(nrm > 0)) throw ConfigError("basis function " + f.label + " has no grid support; region too small");
    for (auto& v : f.f) v /= nrm;
  }
}

std::vector<ExteriorDatum> bumps_1d(const GeometryPtr& geo, const Region& r, int size,
                                    std::vector<BasisFunctionInfo>& info) {
  auto comps = components_1d(r);
  double total = 0;
  for (auto& [a, b] : comps) total += b - a;
  std::vector<int> count(comps.size());
  int assigned = 0;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    count[c] = static_cast<int>(std::floor(size * (comps[c].second - comps[c].first) / total));
    assigned += count[c];
  }
  for (std::size_t c = 0; assigned < size; c = (c + 1) % comps.size(), ++assigned) ++count[c];
  std::vector<ExteriorDatum> out;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    auto [a, b] = comps[c];
    double sp = (b - a) / std::max(count[c], 1);
    for (int j = 0; j < count[c]; ++j) {
      std::array<double, 2> ctr{a + (j + 0.5) * sp, 0.0};
      out.push_back(bump_datum(geo, ctr, 0.5 * sp, "bump" + std::to_string(out.size())));
      BasisFunctionInfo fi;
      fi.center = ctr;
      fi.width = 0.5 * sp;
      info.push_back(fi);
    }
  }
  return out;
}

std::vector<ExteriorDatum> bumps_2d(const GeometryPtr& geo, const Region& r, int size,
                                    std::vector<BasisFunctionInfo>& info) {
  if (r.kind == Region::Kind::intervals) throw ConfigError("interval regions are 1D only");
  const double w = r.r_out - r.r_in;
  const double t0 = r.kind == Region::Kind::sector ? r.theta0 : 0.0;
  const double t1 = r.kind == Region::Kind::sector ? r.theta1 : 2 * std::numbers::pi;
  const double r_mid = 0.5 * (r.r_in + r.r_out);
  int rings = 1;
  while (true) {
    int per = (size + rings - 1) / rings;
    if ((t1 - t0) * r_mid / per >= w / rings || rings >= size) break;
    ++rings;
  }
  std::vector<ExteriorDatum> out;
  int left = size;
  for (int k = 0; k < rings; ++k) {
    int per = (left + (rings - k) - 1) / (rings - k);
    left -= per;
    double rr = r.r_in + (k + 0.5) * w / rings;
    double dth = (t1 - t0) / per;
    double radius = 0.5 * std::min(w / rings, 2 * rr * std::sin(std::min(dth, std::numbers::pi) / 2));
    for (int j = 0; j < per; ++j) {
      double th = t0 + (j + 0.5) * dth;
      std::array<double, 2> ctr{rr * std::cos(th), rr * std::sin(th)};
      out.push_back(bump_datum(geo, ctr, radius, "bump" + std::to_string(out.size())));
      BasisFunctionInfo fi;
      fi.center = ctr;
      fi.width = radius;
      info.push_back(fi);
    }
  }
  return out;
}

std::vector<ExteriorDatum> harmonic_1d(const GeometryPtr& geo, const Region& r, int size,
                                       std::vector<BasisFunctionInfo>& info) {
  const auto& g = *geo;
  auto comps = components_1d(r);
  bool paired = r.kind == Region::Kind::annulus && r.r_in > 0;
  std::pair<double, double> base = paired ? comps[1] : comps[0];
  if (!paired && comps.size() != 1)
    throw ConfigError("harmonic basis in 1D needs a single interval or a symmetric annulus");
  std::vector<std::size_t> nodes;
  for (int j = 0; j < g.N; ++j) {
    double x = g.coord(j);
    if (x > base.first && x < base.second) nodes.push_back(static_cast<std::size_t>(j));
  }
  const int parities = paired ? 2 : 1;
  const int R = (size + parities - 1) / parities;
  if (R > static_cast<int>(nodes.size()))
    throw ConfigError("region " + r.name + " has too few nodes for " + std::to_string(size) + " harmonic functions");
  // discrete orthonormal polynomials on the nodes via QR of the Vandermonde matrix
  const double mid = 0.5 * (base.first + base.second), half = 0.5 * (base.second - base.first);
  Eigen::MatrixXd V(nodes.size(), R);
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    double t = (g.coord(static_cast<int>(nodes[a])) - mid) / half;
    double p = 1.0;
    for (int k = 0; k < R; ++k, p *= t) V(static_cast<Eigen::Index>(a), k) = p;
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(V);
  Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(nodes.size()), R);
  Eigen::MatrixXd Rm = qr.matrixQR().topLeftCorner(R, R).triangularView<Eigen::Upper>();
  for (int k = 0; k < R; ++k)
    if (Rm(k, k) < 0) Q.col(k) *= -1.0;
  std::vector<ExteriorDatum> out;
  const double scale = 1.0 / std::sqrt(parities * g.h());
  for (int h = 0; h < R && static_cast<int>(out.size()) < size; ++h)
    for (int p = 0; p < parities && static_cast<int>(out.size()) < size; ++p) {
      std::vector<double> v(g.size(), 0.0);
      for (std::size_t a = 0; a < nodes.size(); ++a) {
        double val = scale * Q(static_cast<Eigen::Index>(a), h);
        v[nodes[a]] = val;
        if (paired) v[(g.N - nodes[a]) % g.N] = p == 0 ? val : -val;
      }
      out.push_back(make_exterior_datum(geo, std::move(v), "h" + std::to_string(h) + "p" + std::to_string(p)));
      BasisFunctionInfo fi;
      fi.radial = h;
      fi.angular = p;
      fi.order = h + p;
      info.push_back(fi);
    }
  return out;
}

std::vector<ExteriorDatum> harmonic_2d(const GeometryPtr& geo, const Region& r, int size,
                                       std::vector<BasisFunctionInfo>& info) {
  const auto& g = *geo;
  if (r.kind != Region::Kind::annulus || r.r_in <= 0)
    throw ConfigError("harmonic basis in 2D needs an annulus region");
  const int A = std::min(8, size);
  const int R = (size + A - 1) / A;
  // angular index a -> (k, sign): 0 -> (0,0), 1 -> (1,+), 2 -> (1,-), 3 -> (2,+), ...
  auto angular = [](int a) { return std::pair<int, int>{(a + 1) / 2, a == 0 ? 0 : (a % 2 == 1 ? 1 : -1)}; };
  std::vector<std::pair<int, int>> labels;  // (h, a)
  for (int h = 0; h < R; ++h)
    for (int a = 0; a < A; ++a) labels.emplace_back(h, a);
  labels.resize(size);
  std::vector<ExteriorDatum> raw;
  const double w = r.r_out - r.r_in;
  for (auto [h, a] : labels) {
    auto [k, sg] = angular(a);
    std::vector<double> v(g.size(), 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) {
      auto x = g.node(i);
      double rr = std::hypot(x[0], x[1]);
      if (!(rr > r.r_in && rr < r.r_out)) continue;
      double th = std::atan2(x[1], x[0]);
      double ang = sg == 0 ? 1.0 : sg > 0 ? std::cos(k * th) : std::sin(k * th);
      v[i] = std::sin(std::numbers::pi * (h + 1) * (rr - r.r_in) / w) * ang;
    }
    raw.push_back(make_exterior_datum(geo, std::move(v), "h" + std::to_string(h) + "k" + std::to_string(sg * k)));
    BasisFunctionInfo fi;
    fi.radial = h;
    fi.angular = k;
    fi.sign = sg;
    fi.order = h + k;
    info.push_back(fi);
  }
  // H^s-orthogonalize each angular order against all lower orders (square-lattice aliasing)
  const double s = g.s;
  std::vector<int> order(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return info[x].angular < info[y].angular; });
  std::vector<int> lower;
  std::size_t pos = 0;
  while (pos < order.size()) {
    int k = info[order[pos]].angular;
    std::vector<int> group;
    while (pos < order.size() && info[order[pos]].angular == k) group.push_back(order[pos++]);
    if (!lower.empty()) {
      std::vector<GridField> low;
      for (int j : lower) low.push_back(raw[j].field());
      auto Gl = hs_gram(low, s);
      Eigen::MatrixXd G(lower.size(), lower.size());
      for (std::size_t a = 0; a < lower.size(); ++a)
        for (std::size_t b = 0; b < lower.size(); ++b) G(a, b) = Gl[a][b];
      Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
      for (int i : group) {
        Eigen::VectorXd rhs(lower.size());
        for (std::size_t a = 0; a < lower.size(); ++a) rhs[a] = hs_inner(raw[lower[a]].field(), raw[i].field(), s);
        Eigen::VectorXd c = ldlt.solve(rhs);
        for (std::size_t a = 0; a < lower.size(); ++a)
          for (std::size_t n = 0; n < raw[i].f.size(); ++n) raw[i].f[n] -= c[a] * raw[lower[a]].f[n];
      }
    }
    lower.insert(lower.end(), group.begin(), group.end());
  }
  // unit L^2 norm
  for (auto& f : raw) {
    double acc = 0;
    for (double v : f.f) acc += v * v;
    double nrm = std::sqrt(acc * g.cell());
    for (auto& v : f.f) v /= nrm;
  }
  return raw;
}

}  // namespace

BasisPtr make_basis(GeometryPtr geo, const std::string& region, BasisKind kind, std::vector<ExteriorDatum> functions,
                    std::vector<BasisFunctionInfo> info) {
  if (functions.empty()) throw ConfigError("empty exterior basis");
  const Region& r = geo->region(region);
  auto b = std::make_shared<ExteriorBasis>();
  b->geo = geo;
  b->region = region;
  b->kind = kind;
  b->functions = std::move(functions);
  b->info = std::move(info);
  b->info.resize(b->functions.size());
  if (b->functions_in(r).size() != b->functions.size())
    throw ConfigError("basis function escapes measurement region " + region);
  std::vector<GridField> fields;
  for (const auto& f : b->functions) fields.push_back(f.field());
  auto G = hs_gram(fields, geo->s);
  const auto n = static_cast<Eigen::Index>(G.size());
  b->gram.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) b->gram(i, j) = G[i][j];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b->gram, Eigen::EigenvaluesOnly);
  b->gram_min_eig = es.eigenvalues()[0];
  b->gram_max_eig = es.eigenvalues()[n - 1];
  if (!(b->gram_min_eig > 1e-10 * b->gram_max_eig))
    throw ConfigError("exterior basis on " + region + " is rank deficient (Gram condition " +
                      detail::fmt_double(b->gram_max_eig / b->gram_min_eig) + "); region too small for size " +
                      std::to_string(n));
  return b;
}

BasisPtr build_exterior_basis(GeometryPtr geo, const std::string& region, int size, BasisKind kind) {
  if (size < 1) throw ConfigError("basis size must be >= 1");
  const Region& r = geo->region(region);
  if (region == geo->omega.name) throw ConfigError("exterior basis cannot live in the domain");
  std::vector<BasisFunctionInfo> info;
  std::vector<ExteriorDatum> fs;
  if (kind == BasisKind::bumps) {
    fs = geo->n == 1 ? bumps_1d(geo, r, size, info) : bumps_2d(geo, r, size, info);
    normalize_hs(fs, geo->s);
  } else if (kind == BasisKind::harmonic) {
    fs = geo->n == 1 ? harmonic_1d(geo, r, size, info) : harmonic_2d(geo, r, size, info);
  } else {
    throw ConfigError("probe bases are built with build_probe_basis");
  }
  return make_basis(geo, region, kind, std::move(fs), std::move(info));
}

BasisPtr build_probe_basis(GeometryPtr geo, const std::string& region, const std::vector<Probe>& probes) {
  const Region& r = geo->region(region);
  std::vector<ExteriorDatum> fs;
  std::vector<BasisFunctionInfo> info;
  for (const auto& p : probes) {
    if (geo->omega.contains_closure(p.point.data(), geo->n)) throw ConfigError("probe point lies in the closed domain");
    if (!r.contains(p.point.data(), geo->n)) throw ConfigError("probe point outside measurement region " + region);
    for (double w : p.widths) {
      auto f = bump_datum(geo, p.point, w, "probe");
      for (std::size_t i = 0; i < f.f.size(); ++i)
        if (f.f[i] != 0.0) {
          auto x = geo->node(i);
          if (!r.contains(x.data(), geo->n))
            throw ConfigError("probe bump of width " + detail::fmt_double(w) + " escapes measurement region " + region);
        }
      fs.push_back(std::move(f));
      BasisFunctionInfo fi;
      fi.center = p.point;
      fi.width = w;
      info.push_back(fi);
    }
  }
  normalize_hs(fs, geo->s);
  return make_basis(geo, region, BasisKind::probes, std::move(fs), std::move(info));
}

namespace {

std::string cache_key(const Coefficient& c, const ExteriorBasis& b, const FracOperator& op, double tol,
                      SolveRoute route) {
  const auto& v = std::holds_alternative<Conductivity>(c) ? std::get<Conductivity>(c).gamma : std::get<Potential>(c).q;
  std::uint64_t h = detail::fnv1a(equation_tag(c) + "|" + op.describe() + "|" + detail::fmt_double(tol) + "|" +
                                  (route == SolveRoute::cholesky ? "llt" : "ldlt"));
  h = detail::fnv1a_bytes(v.data(), v.size() * sizeof(double), h);
  h ^= b.content_hash() * 0x9e3779b97f4a7c15ull;
  return "dn-" + detail::hex64(h) + ".bin";
}

DnMatrix assemble_uncached(const Coefficient& c, BasisPtr basis, const FracOperator& op, double tol,
                           SolveRoute route);

}  // namespace

DnMatrix assemble_dn(const Coefficient& c, BasisPtr basis, const FracOperator& op, double tol, SolveRoute route) {
  auto dir = dn_cache();
  if (!dir) return assemble_uncached(c, basis, op, tol, route);
  auto path = (std::filesystem::path(*dir) / cache_key(c, *basis, op, tol, route)).string();
  if (std::filesystem::exists(path)) {
    try {
      return load_dn(path, basis);
    } catch (const CacheError&) {
      // stale or damaged entry: rebuild below
    }
  }
  auto M = assemble_uncached(c, basis, op, tol, route);
  cache_dn(path, M);
  return M;
}

namespace {

DnMatrix assemble_uncached(const Coefficient& c, BasisPtr basis, const FracOperator& op, double tol,
                           SolveRoute route) {
  GalerkinSystem sys(c, op, route);
  require_same_geometry(*sys.geometry(), *basis->geo);
  const int B = static_cast<int>(basis->size());
  DnMatrix out;
  out.basis = basis;
  out.equation = sys.tag();
  out.M.resize(B, B);
  for (int i = 0; i < B; ++i) {
    out.rows.push_back(i);
    out.cols.push_back(i);
  }
  std::vector<std::exception_ptr> errors(B);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < B; ++i) {
    try {
      auto sol = sys.solve(basis->functions[i], tol);
      auto au = sys.apply(sol.u.values);
      for (int j = 0; j < B; ++j) {
        double acc = 0.0;
        const auto& fj = basis->functions[j].f;
        for (std::size_t n = 0; n < au.size(); ++n) acc += au[n] * fj[n];
        out.M(i, j) = acc;
      }
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (int i = 0; i < B; ++i)
    if (errors[i]) {
      try {
        std::rethrow_exception(errors[i]);
      } catch (const Error& e) {
        throw SolverError("DN assembly failed at basis column " + std::to_string(i) + ": " + e.what());
      }
    }
  return out;
}

}  // namespace

DnMatrix dn_difference(const DnMatrix& a, const DnMatrix& b) {
  if (a.basis.get() != b.basis.get() && a.basis->content_hash() != b.basis->content_hash())
    throw GeometryMismatch("DN matrices refer to different bases");
  if (a.rows != b.rows || a.cols != b.cols) throw GeometryMismatch("DN matrices have different index sets");
  DnMatrix d = a;
  d.M = a.M - b.M;
  d.equation = a.equation + " - " + b.equation;
  return d;
}

namespace {

Eigen::MatrixXd inv_sqrt(const Eigen::MatrixXd& G) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  const auto& ev = es.eigenvalues();
  if (!(ev[0] > 1e-12 * ev[ev.size() - 1])) throw ConfigError("singular Gram matrix in operator norm");
  return es.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd sub(const Eigen::MatrixXd& G, const std::vector<int>& r, const std::vector<int>& c) {
  Eigen::MatrixXd out(r.size(), c.size());
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = 0; j < c.size(); ++j) out(i, j) = G(r[i], c[j]);
  return out;
}

}  // namespace

double dn_operator_norm(const DnMatrix& delta) {
  if (delta.M.rows() != static_cast<Eigen::Index>(delta.rows.size()) ||
      delta.M.cols() != static_cast<Eigen::Index>(delta.cols.size()))
    throw GeometryMismatch("DN matrix and index sets disagree");
  auto Gr = inv_sqrt(sub(delta.basis->gram, delta.rows, delta.rows));
  auto Gc = inv_sqrt(sub(delta.basis->gram, delta.cols, delta.cols));
  Eigen::MatrixXd T = Gr * delta.M * Gc;
  if (T.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(T);
  return svd.singularValues()[0];
}

DnMatrix restrict_dn(const DnMatrix& M, const std::string& rows_region, const std::string& cols_region) {
  const auto& geo = *M.basis->geo;
  auto pick = [&](const std::string& name, const std::vector<int>& have) {
    auto in = M.basis->functions_in(geo.region(name));
    std::vector<int> pos;
    for (std::size_t k = 0; k < have.size(); ++k)
      if (std::find(in.begin(), in.end(), have[k]) != in.end()) pos.push_back(static_cast<int>(k));
    if (pos.empty()) throw ConfigError("region " + name + " has no basis functions");
    return pos;
  };
  auto rp = pick(rows_region, M.rows), cp = pick(cols_region, M.cols);
  DnMatrix out;
  out.basis = M.basis;
  out.equation = M.equation + " |" + rows_region + "x" + cols_region;
  out.M.resize(rp.size(), cp.size());
  for (std::size_t i = 0; i < rp.size(); ++i) {
    out.rows.push_back(M.rows[rp[i]]);
    for (std::size_t j = 0; j < cp.size(); ++j) out.M(i, j) = M.M(rp[i], cp[j]);
  }
  for (int j : cp) out.cols.push_back(M.cols[j]);
  return out;
}

DnMatrix exterior_multiplication(const Potential& q, BasisPtr basis) {
  require_same_geometry(*q.geo, *basis->geo);
  const auto& g = *q.geo;
  auto mask = g.closure_mask(g.omega);
  const int B = static_cast<int>(basis->size());
  DnMatrix out;
  out.basis = basis;
  out.equation = "mult(" + q.label + "|ext)";
  out.M.resize(B, B);
  for (int i = 0; i < B; ++i) {
    out.rows.push_back(i);
    out.cols.push_back(i);
    for (int j = 0; j < B; ++j) {
      double acc = 0.0;
      const auto& fi = basis->functions[i].f;
      const auto& fj = basis->functions[j].f;
      for (std::size_t n = 0; n < fi.size(); ++n)
        if (!mask[n]) acc += q.q[n] * fi[n] * fj[n];
      out.M(i, j) = acc * g.cell();
    }
  }
  return out;
}

double symmetry_defect(const DnMatrix& M) {
  double mx = M.M.cwiseAbs().maxCoeff();
  if (mx == 0) return 0.0;
  return (M.M - M.M.transpose()).cwiseAbs().maxCoeff() / mx;
}

}  // namespace fraccal
