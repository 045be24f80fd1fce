#include "fsi/solid.hpp"

#include <string>

#include "fsi/errors.hpp"

namespace fsi {

namespace {

SpMat extract(const SpMat& A, const std::vector<int>& row_map, const std::vector<int>& col_map,
              int rows, int cols) {
  std::vector<Eigen::Triplet<double>> t;
  for (int c = 0; c < A.outerSize(); ++c) {
    const int cc = col_map[static_cast<std::size_t>(c)];
    if (cc < 0) continue;
    for (SpMat::InnerIterator it(A, c); it; ++it) {
      const int rr = row_map[static_cast<std::size_t>(it.row())];
      if (rr >= 0) t.emplace_back(rr, cc, it.value());
    }
  }
  SpMat out(rows, cols);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

constexpr double kBeta = 0.25;
constexpr double kGamma = 0.5;

}  // namespace

NewmarkIntegrator::NewmarkIntegrator(SpMat M, SpMat K, std::vector<char> prescribed, double dt)
    : M_(std::move(M)), K_(std::move(K)), prescribed_(std::move(prescribed)), dt_(dt) {
  const int n = static_cast<int>(M_.rows());
  if (M_.cols() != n || K_.rows() != n || K_.cols() != n ||
      prescribed_.size() != static_cast<std::size_t>(n)) {
    throw ShapeError("Newmark operators have inconsistent sizes");
  }
  if (!(dt > 0.0)) throw ConfigError("Newmark step must be positive");
  S_ = K_ + M_ / (kBeta * dt * dt);
  std::vector<int> free_map(static_cast<std::size_t>(n), -1), pres_map(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    if (prescribed_[static_cast<std::size_t>(i)]) {
      pres_map[static_cast<std::size_t>(i)] = static_cast<int>(prescribed_ids_.size());
      prescribed_ids_.push_back(i);
    } else {
      free_map[static_cast<std::size_t>(i)] = static_cast<int>(free_.size());
      free_.push_back(i);
    }
  }
  const int nf = static_cast<int>(free_.size()), np = static_cast<int>(prescribed_ids_.size());
  S_ff_ = extract(S_, free_map, free_map, nf, nf);
  S_fp_ = extract(S_, free_map, pres_map, nf, np);
  M_ff_ = extract(M_, free_map, free_map, nf, nf);
  M_fp_ = extract(M_, free_map, pres_map, nf, np);
  s_solver_ = std::make_unique<Eigen::SimplicialLDLT<SpMat>>(S_ff_);
  m_solver_ = std::make_unique<Eigen::SimplicialLDLT<SpMat>>(M_ff_);
  if (s_solver_->info() != Eigen::Success || m_solver_->info() != Eigen::Success) {
    throw AssemblyError("constrained Newmark system is singular");
  }
}

Vec NewmarkIntegrator::gather_free(const Vec& full) const {
  Vec out(static_cast<Eigen::Index>(free_.size()));
  for (std::size_t k = 0; k < free_.size(); ++k) out[static_cast<Eigen::Index>(k)] = full[free_[k]];
  return out;
}

Vec NewmarkIntegrator::gather_prescribed(const Vec& full) const {
  Vec out(static_cast<Eigen::Index>(prescribed_ids_.size()));
  for (std::size_t k = 0; k < prescribed_ids_.size(); ++k) {
    out[static_cast<Eigen::Index>(k)] = full[prescribed_ids_[k]];
  }
  return out;
}

NewmarkIntegrator::State NewmarkIntegrator::initial(const Vec& u0, const Vec& v0, const Vec& f0,
                                                    const Vec& a_prescribed) const {
  State s{u0, v0, a_prescribed};
  const Vec r = f0 - K_ * u0;
  const Vec rhs = gather_free(r) - M_fp_ * gather_prescribed(a_prescribed);
  const Vec af = m_solver_->solve(rhs);
  for (std::size_t k = 0; k < free_.size(); ++k) s.a[free_[k]] = af[static_cast<Eigen::Index>(k)];
  return s;
}

NewmarkIntegrator::State NewmarkIntegrator::step(const State& prev, const Vec& f_next,
                                                 const Vec& u_prescribed) const {
  const double c = 1.0 / (kBeta * dt_ * dt_);
  const Vec predictor = prev.u + dt_ * prev.v + (0.5 - kBeta) * dt_ * dt_ * prev.a;
  State next;
  next.u = u_prescribed;
  const Vec up = gather_prescribed(u_prescribed);
  const Vec rhs = gather_free(f_next + c * (M_ * predictor)) - S_fp_ * up;
  const Vec uf = s_solver_->solve(rhs);
  for (std::size_t k = 0; k < free_.size(); ++k) next.u[free_[k]] = uf[static_cast<Eigen::Index>(k)];
  next.a = c * (next.u - predictor);
  next.v = prev.v + dt_ * ((1.0 - kGamma) * prev.a + kGamma * next.a);
  return next;
}

SolidOperators::SolidOperators(const Discretization& disc, const SolidParams& params) {
  params.validate();
  const FeSpace& V = disc.solid();
  mass = vectorize(assemble_scalar_mass(V));
  stiffness = assemble_elasticity(V, params.mu, params.lambda);
  clamped.assign(static_cast<std::size_t>(V.vector_dofs()), 0);
  interface.assign(static_cast<std::size_t>(V.vector_dofs()), 0);
  for (int i = 0; i < V.node_count(); ++i) {
    for (int c = 0; c < 2; ++c) {
      clamped[static_cast<std::size_t>(2 * i + c)] = V.on_dirichlet(i);
      interface[static_cast<std::size_t>(2 * i + c)] = V.on_interface(i);
    }
  }
}

SolidSeries solve_lame(const NewmarkIntegrator& integrator, const TimeGrid& grid,
                       const std::vector<Vec>& boundary, const std::vector<Vec>& loads) {
  const int levels = grid.n_steps() + 1;
  const auto n = integrator.mass().rows();
  if (static_cast<int>(boundary.size()) != levels) throw ShapeError("boundary data needs one entry per level");
  if (!loads.empty() && static_cast<int>(loads.size()) != levels) {
    throw ShapeError("loads need one entry per level");
  }
  const Vec zero = Vec::Zero(n);
  const auto load = [&](int k) -> const Vec& { return loads.empty() ? zero : loads[static_cast<std::size_t>(k)]; };
  for (int i = 0; i < n; ++i) {
    if (integrator.prescribed(i) && boundary[0][i] != 0.0) {
      throw PreconditionError("prescribed displacement must vanish at t = 0");
    }
  }

  const double dt = grid.dt();
  Vec a_pres = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (integrator.prescribed(i)) a_pres[i] = 2.0 * boundary[1][i] / (dt * dt);
  }
  SolidSeries out;
  auto state = integrator.initial(zero, zero, load(0), a_pres);
  for (int k = 0;; ++k) {
    out.u.push_back(state.u);
    out.v.push_back(state.v);
    out.a.push_back(state.a);
    if (k + 1 == levels) break;
    state = integrator.step(state, load(k + 1), boundary[static_cast<std::size_t>(k + 1)]);
    if (!state.u.allFinite()) throw NumericalFailure("solid solve produced non-finite values");
  }
  return out;
}

namespace {

std::vector<char> interface_or_clamped(const SolidOperators& ops) {
  std::vector<char> mask(ops.clamped.size());
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = ops.clamped[i] || ops.interface[i];
  return mask;
}

}  // namespace

LameSolver::LameSolver(const Discretization& disc, const SolidParams& params, const TimeGrid& grid)
    : disc_(&disc),
      ops_(disc, params),
      grid_(grid),
      integrator_(ops_.mass, ops_.stiffness, interface_or_clamped(ops_), grid.dt()) {}

SolidSeries LameSolver::solve(const TraceSeries& u_d, const std::vector<Vec>& loads) const {
  if (u_d.levels() != grid_.n_steps() + 1 || u_d.dofs() != disc_->trace_dofs()) {
    throw ShapeError("Dirichlet trace does not match the grid or interface");
  }
  if (u_d.role() != TraceRole::Displacement) throw PreconditionError("Dirichlet data must be a displacement trace");
  if (u_d[0].cwiseAbs().maxCoeff() != 0.0) {
    throw PreconditionError("incompatible Dirichlet data: u_d(t_0) must vanish");
  }
  std::vector<Vec> boundary;
  boundary.reserve(static_cast<std::size_t>(u_d.levels()));
  for (int n = 0; n < u_d.levels(); ++n) boundary.push_back(disc_->lift(Side::Solid, u_d[n]));
  return solve_lame(integrator_, grid_, boundary, loads);
}

TraceSeries LameSolver::traction(const SolidSeries& state, const std::vector<Vec>& loads) const {
  if (!loads.empty() && loads.size() != state.u.size()) throw ShapeError("loads and state lengths differ");
  if (state.a.size() != state.u.size()) throw ShapeError("state series lengths differ");
  TraceSeries g(TraceRole::TractionLoad, state.levels(), disc_->trace_dofs());
  for (int n = 0; n < state.levels(); ++n) {
    const auto k = static_cast<std::size_t>(n);
    Vec residual = ops_.mass * state.a[k] + ops_.stiffness * state.u[k];
    if (!loads.empty()) residual -= loads[k];
    g[n] = -disc_->restrict(Side::Solid, residual);
  }
  return g;
}

TraceSeries LameSolver::operator_T1(const TraceSeries& u_s) const { return traction(solve(u_s)); }

SolidSeries solve_lame_dirichlet(const Discretization& disc, const SolidParams& params,
                                 const TimeGrid& grid, const TraceSeries& u_d,
                                 const std::vector<Vec>& loads) {
  return LameSolver(disc, params, grid).solve(u_d, loads);
}

TraceSeries recover_traction(const Discretization& disc, const SolidParams& params,
                             const TimeGrid& grid, const SolidSeries& state,
                             const std::vector<Vec>& loads) {
  if (state.levels() != grid.n_steps() + 1) throw ShapeError("state does not match the time grid");
  return LameSolver(disc, params, grid).traction(state, loads);
}

TraceSeries operator_T1(const Discretization& disc, const SolidParams& params,
                        const TimeGrid& grid, const TraceSeries& u_s) {
  return LameSolver(disc, params, grid).operator_T1(u_s);
}

}  // namespace fsi
