#include "fraccal/forward_solver.hpp"

#include <cmath>

#include "fraccal/errors.hpp"
#include "fraccal/fft.hpp"

namespace fraccal {

ExteriorDatum make_exterior_datum(GeometryPtr geo, std::vector<double> f, std::string label) {
  if (f.size() != geo->size()) throw GeometryMismatch("exterior datum length does not match the grid");
  auto mask = geo->closure_mask(geo->omega);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!std::isfinite(f[i])) throw ConfigError("non-finite exterior datum");
    if (mask[i] && f[i] != 0.0) throw ConfigError("exterior datum does not vanish on the closed domain");
  }
  return ExteriorDatum{std::move(geo), std::move(f), std::move(label)};
}

std::string equation_tag(const Coefficient& c) {
  if (auto* g = std::get_if<Conductivity>(&c)) return "conductivity(" + g->label + ")";
  return "schrodinger(" + std::get<Potential>(c).label + ")";
}

GalerkinSystem::GalerkinSystem(const Conductivity& gamma, const FracOperator& op, SolveRoute route)
    : geo_(gamma.geo), route_(route) {
  require_same_geometry(*gamma.geo, *op.geometry());
  g_ = gamma.sqrt_gamma();
  auto lm = op.apply(gamma.m);
  c_.resize(lm.size());
  for (std::size_t i = 0; i < lm.size(); ++i) c_[i] = -g_[i] * lm[i];
  tag_ = equation_tag(gamma);
  assemble(op);
}

GalerkinSystem::GalerkinSystem(const Potential& q, const FracOperator& op, SolveRoute route)
    : geo_(q.geo), route_(route) {
  require_same_geometry(*q.geo, *op.geometry());
  g_.assign(q.q.size(), 1.0);
  c_ = q.q;
  for (double v : c_)
    if (!std::isfinite(v)) throw ConfigError("non-finite potential");
  tag_ = equation_tag(q);
  assemble(op);
}

GalerkinSystem::GalerkinSystem(const Coefficient& c, const FracOperator& op, SolveRoute route) : route_(route) {
  if (auto* g = std::get_if<Conductivity>(&c))
    *this = GalerkinSystem(*g, op, route);
  else
    *this = GalerkinSystem(std::get<Potential>(c), op, route);
}

void GalerkinSystem::assemble(const FracOperator& op) {
  const auto& g = *geo_;
  symbol_ = op.symbol();
  const auto& l = op.row();
  interior_ = g.interior_nodes();
  const int M = static_cast<int>(interior_.size());
  const int N = g.N;
  const double cell = g.cell();
  A_.resize(M, M);
#pragma omp parallel for schedule(static)
  for (int a = 0; a < M; ++a) {
    const std::size_t ia = interior_[a];
    for (int b = 0; b < M; ++b) {
      const std::size_t ib = interior_[b];
      double lv;
      if (g.n == 1) {
        lv = l[(ia + N - ib) % N];
      } else {
        std::size_t di = (ia / N + N - ib / N) % N, dj = (ia % N + N - ib % N) % N;
        lv = l[di * N + dj];
      }
      A_(a, b) = cell * g_[ia] * lv * g_[ib];
    }
    A_(a, a) += cell * c_[ia];
  }
  // symmetrize away roundoff in the circulant row
  A_ = 0.5 * (A_ + A_.transpose()).eval();
  if (route_ == SolveRoute::cholesky) {
    llt_ = std::make_shared<Eigen::LLT<Eigen::MatrixXd>>(A_);
    if (llt_->info() != Eigen::Success)
      throw SolverError("interior Galerkin matrix of " + tag_ + " is not positive definite (non-coercive)");
  } else {
    ldlt_ = std::make_shared<Eigen::LDLT<Eigen::MatrixXd>>(A_);
    if (ldlt_->info() != Eigen::Success || !ldlt_->isPositive())
      throw SolverError("interior Galerkin matrix of " + tag_ + " is not positive definite (non-coercive)");
  }
}

std::vector<double> GalerkinSystem::apply(const std::vector<double>& v) const {
  const auto& g = *geo_;
  if (v.size() != g.size()) throw GeometryMismatch("apply: field of the wrong size");
  std::vector<double> gv(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) gv[i] = g_[i] * v[i];
  auto d = g.dims();
  cvec V = fft_forward(gv, d[0], d[1]);
  for (std::size_t k = 0; k < V.size(); ++k) V[k] *= symbol_[k];
  auto lv = fft_inverse_real(V, d[0], d[1]);
  const double cell = g.cell();
  for (std::size_t i = 0; i < v.size(); ++i) lv[i] = cell * (g_[i] * lv[i] + c_[i] * v[i]);
  return lv;
}

double GalerkinSystem::form(const std::vector<double>& u, const std::vector<double>& v) const {
  auto au = apply(u);
  double acc = 0.0;
  for (std::size_t i = 0; i < au.size(); ++i) acc += au[i] * v[i];
  return acc;
}

Solution GalerkinSystem::solve(const ExteriorDatum& f, double tol) const {
  require_same_geometry(*f.geo, *geo_);
  const int M = static_cast<int>(interior_.size());
  auto af = apply(f.f);
  Eigen::VectorXd b(M);
  for (int a = 0; a < M; ++a) b[a] = -af[interior_[a]];
  auto factor_solve = [&](const Eigen::VectorXd& rhs) -> Eigen::VectorXd {
    return route_ == SolveRoute::cholesky ? Eigen::VectorXd(llt_->solve(rhs)) : Eigen::VectorXd(ldlt_->solve(rhs));
  };
  Eigen::VectorXd w = Eigen::VectorXd::Zero(M);
  double residual = 0.0;
  const double bn = b.norm();
  if (bn > 0) {
    w = factor_solve(b);
    residual = (A_ * w - b).norm() / bn;
    if (residual > tol) {
      w += factor_solve(b - A_ * w);
      residual = (A_ * w - b).norm() / bn;
    }
    if (!(residual <= tol))
      throw SolverError("Galerkin solve for " + tag_ + " stalled at relative residual " + std::to_string(residual));
  }
  Solution sol;
  sol.u = GridField(geo_, f.f);
  for (int a = 0; a < M; ++a) sol.u.values[interior_[a]] = w[a];
  sol.residual = residual;
  sol.energy = form(sol.u.values, sol.u.values);
  return sol;
}

double GalerkinSystem::smallest_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A_, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

Solution solve_conductivity(const Conductivity& gamma, const ExteriorDatum& f, const FracOperator& op, double tol) {
  return GalerkinSystem(gamma, op).solve(f, tol);
}

Solution solve_schrodinger(const Potential& q, const ExteriorDatum& f, const FracOperator& op, double tol) {
  return GalerkinSystem(q, op).solve(f, tol);
}

double coercivity_check(const Coefficient& c, const FracOperator& op) {
  // eigenvalues only; a non-coercive matrix must still report its (negative) smallest eigenvalue
  const auto& geo = std::visit([](const auto& v) -> const GeometryPtr& { return v.geo; }, c);
  require_same_geometry(*geo, *op.geometry());
  try {
    return GalerkinSystem(c, op).smallest_eigenvalue();
  } catch (const SolverError&) {
    GalerkinSystem sys(zero_potential(geo), op);
    Eigen::MatrixXd A = sys.interior_matrix();
    std::vector<double> extra;
    if (auto* g = std::get_if<Potential>(&c)) {
      for (std::size_t a = 0; a < sys.interior().size(); ++a)
        A(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) += geo->cell() * g->q[sys.interior()[a]];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    return es.eigenvalues()[0];
  }
}

}  // namespace fraccal
