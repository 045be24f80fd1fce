#include "fsi/fluid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fsi/errors.hpp"

namespace fsi {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// Gradient of velocity component c at quadrature point q of element k.
Vec2 component_gradient(const FeSpace& V, const Vec& v, int k, int q, int c) {
  const auto& e = V.element(k);
  const auto& g = V.grad_at(k, q);
  Vec2 grad = Vec2::Zero();
  for (int i = 0; i < kP2Local; ++i) grad += v[2 * e[i] + c] * g[i];
  return grad;
}

}  // namespace

FluidOperators::FluidOperators(const Discretization& d) : disc(&d) {
  const FeSpace& V = d.fluid();
  if (d.interface().facets.empty()) {
    // Without a traction boundary the pressure would carry a constant nullspace.
    throw AssemblyError("fluid problem needs an interface with positive length");
  }
  mass = vectorize(assemble_scalar_mass(V));
  viscous = assemble_strain_gram(V);
  laplace = vectorize(assemble_scalar_laplace(V));
  hessian = vectorize(assemble_scalar_broken_hessian(V));
  divergence = assemble_divergence(V);
  pressure_mass = assemble_p1_mass(V);
  fixed.assign(static_cast<std::size_t>(V.vector_dofs()), 0);
  for (int i = 0; i < V.node_count(); ++i) {
    for (int c = 0; c < 2; ++c) {
      fixed[static_cast<std::size_t>(2 * i + c)] = V.on_dirichlet(i);
      if (!V.on_dirichlet(i)) free.push_back(2 * i + c);
    }
  }
}

Vec FluidOperators::law_term(const DiffusionLaw& law, double t, const Vec& v) const {
  const FeSpace& V = disc->fluid();
  const auto& rule = triangle_rule();
  Vec out = Vec::Zero(V.vector_dofs());
  for (int k = 0; k < V.element_count(); ++k) {
    const auto& e = V.element(k);
    for (int q = 0; q < static_cast<int>(rule.points.size()); ++q) {
      const auto& g = V.grad_at(k, q);
      const double w = rule.weights[static_cast<std::size_t>(q)] * V.area(k);
      for (int c = 0; c < 2; ++c) {
        const Vec2 flux = law.eval(t, component_gradient(V, v, k, q, c));
        for (int j = 0; j < kP2Local; ++j) out[2 * e[j] + c] += w * flux.dot(g[j]);
      }
    }
  }
  return out;
}

SpMat FluidOperators::law_jacobian(const DiffusionLaw& law, double t, const Vec& v) const {
  const FeSpace& V = disc->fluid();
  const auto& rule = triangle_rule();
  Triplets trip;
  for (int k = 0; k < V.element_count(); ++k) {
    const auto& e = V.element(k);
    for (int q = 0; q < static_cast<int>(rule.points.size()); ++q) {
      const auto& g = V.grad_at(k, q);
      const double w = rule.weights[static_cast<std::size_t>(q)] * V.area(k);
      for (int c = 0; c < 2; ++c) {
        const Mat2 J = law.jacobian(t, component_gradient(V, v, k, q, c));
        for (int j = 0; j < kP2Local; ++j) {
          const Vec2 Jt_gj = J.transpose() * g[j];
          for (int i = 0; i < kP2Local; ++i) {
            trip.emplace_back(2 * e[j] + c, 2 * e[i] + c, w * Jt_gj.dot(g[i]));
          }
        }
      }
    }
  }
  SpMat out(V.vector_dofs(), V.vector_dofs());
  out.setFromTriplets(trip.begin(), trip.end());
  return out;
}

double FluidOperators::law_potential(const DiffusionLaw& law, double t, const Vec& v) const {
  const FeSpace& V = disc->fluid();
  const auto& rule = triangle_rule();
  double sum = 0.0;
  for (int k = 0; k < V.element_count(); ++k) {
    for (int q = 0; q < static_cast<int>(rule.points.size()); ++q) {
      const double w = rule.weights[static_cast<std::size_t>(q)] * V.area(k);
      for (int c = 0; c < 2; ++c) sum += w * law.potential(t, component_gradient(V, v, k, q, c));
    }
  }
  return sum;
}

double FluidOperators::law_distance_squared(const DiffusionLaw& law, double t, const Vec& v,
                                            const Vec& w) const {
  const FeSpace& V = disc->fluid();
  const auto& rule = triangle_rule();
  double sum = 0.0;
  for (int k = 0; k < V.element_count(); ++k) {
    for (int q = 0; q < static_cast<int>(rule.points.size()); ++q) {
      const double wq = rule.weights[static_cast<std::size_t>(q)] * V.area(k);
      for (int c = 0; c < 2; ++c) {
        const Vec2 d = law.eval(t, component_gradient(V, v, k, q, c)) - law.eval(t, component_gradient(V, w, k, q, c));
        sum += wq * d.squaredNorm();
      }
    }
  }
  return sum;
}

Vec FluidOperators::neumann_load(const Vec& g) const { return disc->lift(Side::Fluid, g); }

StepSolver::StepSolver(const FluidOperators& ops, const DiffusionLaw& law, double dt, double eps,
                       StepOptions options)
    : ops_(&ops), law_(law), dt_(dt), eps_(eps), options_(options) {
  if (!(dt > 0.0)) throw ConfigError("fluid step must be positive");
  if (!(eps >= 0.0)) throw ConfigError("regularization weight must be nonnegative");
  if (!(options.tol > 0.0) || options.max_it < 1) throw ConfigError("fluid solver needs tol > 0, max_it >= 1");
  const double ratio = law.c_m() / law.L();
  tau_ = ratio * ratio;
  step_linear_ = ops.mass / dt + ops.viscous;
  if (eps > 0.0) step_linear_ += eps * ops.hessian;
  P_ = step_linear_ + law.c_m() * ops.laplace;
  free_index_.assign(ops.fixed.size(), -1);
  for (std::size_t k = 0; k < ops.free.size(); ++k) free_index_[static_cast<std::size_t>(ops.free[k])] = static_cast<int>(k);
  {
    Triplets t;
    for (int c = 0; c < P_.outerSize(); ++c) {
      const int fc = free_index_[static_cast<std::size_t>(c)];
      if (fc < 0) continue;
      for (SpMat::InnerIterator it(P_, c); it; ++it) {
        const int fr = free_index_[static_cast<std::size_t>(it.row())];
        if (fr >= 0) t.emplace_back(fr, fc, it.value());
      }
    }
    SpMat Pff(static_cast<Eigen::Index>(ops.free.size()), static_cast<Eigen::Index>(ops.free.size()));
    Pff.setFromTriplets(t.begin(), t.end());
    free_solver_ = std::make_unique<Eigen::SimplicialLDLT<SpMat>>(Pff);
    if (free_solver_->info() != Eigen::Success) throw AssemblyError("fluid step operator is not positive definite");
  }
  lu_ = std::make_unique<Eigen::SparseLU<SpMat>>();
  const SpMat K = saddle_matrix(P_);
  lu_->analyzePattern(K);
  lu_->factorize(K);
  if (lu_->info() != Eigen::Success) throw AssemblyError("singular fluid saddle-point system");
}

SpMat StepSolver::saddle_matrix(const SpMat& block) const {
  const int nf = static_cast<int>(ops_->free.size());
  const int np = ops_->pressure_dofs();
  Triplets t;
  t.reserve(static_cast<std::size_t>(block.nonZeros() + 2 * ops_->divergence.nonZeros()));
  for (int c = 0; c < block.outerSize(); ++c) {
    const int fc = free_index_[static_cast<std::size_t>(c)];
    if (fc < 0) continue;
    for (SpMat::InnerIterator it(block, c); it; ++it) {
      const int fr = free_index_[static_cast<std::size_t>(it.row())];
      if (fr >= 0) t.emplace_back(fr, fc, it.value());
    }
  }
  for (int q = 0; q < ops_->divergence.outerSize(); ++q) {
    for (SpMat::InnerIterator it(ops_->divergence, q); it; ++it) {
      const int fr = free_index_[static_cast<std::size_t>(it.row())];
      if (fr < 0) continue;
      t.emplace_back(fr, nf + q, it.value());
      t.emplace_back(nf + q, fr, it.value());
    }
  }
  SpMat K(nf + np, nf + np);
  K.setFromTriplets(t.begin(), t.end());
  K.makeCompressed();
  return K;
}

std::pair<Vec, Vec> StepSolver::saddle_solve(const Eigen::SparseLU<SpMat>& lu, const Vec& rhs,
                                             const Vec& div_rhs) const {
  const int nf = static_cast<int>(ops_->free.size());
  const int np = ops_->pressure_dofs();
  Vec b(nf + np);
  for (int k = 0; k < nf; ++k) b[k] = rhs[ops_->free[static_cast<std::size_t>(k)]];
  b.tail(np) = div_rhs;
  const Vec x = lu.solve(b);
  Vec w = Vec::Zero(ops_->velocity_dofs());
  for (int k = 0; k < nf; ++k) w[ops_->free[static_cast<std::size_t>(k)]] = x[k];
  return {w, x.tail(np)};
}

std::pair<Vec, Vec> StepSolver::precondition(const Vec& rhs, const Vec& div_rhs) const {
  return saddle_solve(*lu_, rhs, div_rhs);
}

double StepSolver::data_norm(const Vec& rhs) const {
  Vec b(static_cast<Eigen::Index>(ops_->free.size()));
  for (std::size_t k = 0; k < ops_->free.size(); ++k) b[static_cast<Eigen::Index>(k)] = rhs[ops_->free[k]];
  return std::sqrt(std::max(0.0, b.dot(free_solver_->solve(b))));
}

double StepSolver::p_norm(const Vec& w) const { return std::sqrt(std::max(0.0, w.dot(P_ * w))); }

Vec StepSolver::residual(double t, const Vec& v_prev, const Vec& loads, const Vec& v) const {
  return ops_->mass * (v - v_prev) / dt_ + (step_linear_ - ops_->mass / dt_) * v +
         ops_->law_term(law_, t, v) - loads;
}

double StepSolver::functional(double t, const Vec& v_prev, const Vec& loads, const Vec& v) const {
  const Vec d = v - v_prev;
  const SpMat stiff = step_linear_ - ops_->mass / dt_;
  return 0.5 * d.dot(ops_->mass * d) / dt_ + 0.5 * v.dot(stiff * v) +
         ops_->law_potential(law_, t, v) - loads.dot(v);
}

StepResult StepSolver::solve(double t, const Vec& v_prev, const Vec& loads) const {
  const Vec zero_div = Vec::Zero(ops_->pressure_dofs());
  StepResult out;
  std::tie(out.v, out.p) = precondition(loads + ops_->mass * v_prev / dt_, zero_div);
  out.iterations = 1;
  // Measured against the data as well: gradient body forces are balanced by the
  // pressure alone and leave v ~ 0.
  const double data_scale = data_norm(loads + ops_->mass * v_prev / dt_);
  for (;;) {
    const Vec r = residual(t, v_prev, loads, out.v);
    auto [w, q] = precondition(r, zero_div);
    const double rho = p_norm(w);
    out.residuals.push_back(rho);
    if (!std::isfinite(rho)) throw NumericalFailure("fluid step produced a non-finite residual");
    if (rho <= options_.tol * std::max(p_norm(out.v), data_scale)) {
      out.p = -q;
      return out;
    }
    if (out.iterations >= options_.max_it) {
      throw NonlinearDivergenceError("fluid step did not converge in " +
                                         std::to_string(options_.max_it) + " iterations at t = " +
                                         std::to_string(t),
                                     rho);
    }
    bool stepped = false;
    if (options_.newton) {
      Eigen::SparseLU<SpMat> jlu;
      const SpMat K = saddle_matrix(step_linear_ + ops_->law_jacobian(law_, t, out.v));
      jlu.analyzePattern(K);
      jlu.factorize(K);
      if (jlu.info() == Eigen::Success) {
        const Vec trial = out.v - saddle_solve(jlu, r, zero_div).first;
        const Vec r_trial = residual(t, v_prev, loads, trial);
        if (p_norm(precondition(r_trial, zero_div).first) < rho) {
          out.v = trial;
          stepped = true;
        }
      }
    }
    if (!stepped) out.v -= tau_ * w;
    ++out.iterations;
  }
}

int FluidSeries::picard_total() const {
  int total = 0;
  for (int it : iterations) total += it;
  return total;
}

StokesSolver::StokesSolver(const Discretization& disc, const FluidParams& params,
                           const TimeGrid& grid, StepOptions options)
    : disc_(&disc),
      ops_(disc),
      law_(params.law.with_horizon(grid.t_final())),
      grid_(grid),
      options_(options) {}

const StepSolver& StokesSolver::step_solver(double eps) const {
  auto it = steps_.find(eps);
  if (it == steps_.end()) {
    it = steps_.emplace(eps, std::make_unique<StepSolver>(ops_, law_, grid_.dt(), eps, options_)).first;
  }
  return *it->second;
}

FluidSeries StokesSolver::solve(const TraceSeries& g, const FluidData& data, double eps) const {
  const int levels = grid_.n_steps() + 1;
  if (g.levels() != levels || g.dofs() != disc_->trace_dofs()) {
    throw ShapeError("traction series does not match the grid or interface");
  }
  if (g.role() != TraceRole::TractionLoad) throw PreconditionError("fluid Neumann data must be traction loads");
  if (!data.body_loads.empty() && static_cast<int>(data.body_loads.size()) != levels) {
    throw ShapeError("body loads need one entry per level");
  }
  const int nv = ops_.velocity_dofs();
  if (data.v0.size() != 0 && data.v0.size() != nv) throw ShapeError("initial velocity size mismatch");
  const StepSolver& step = step_solver(eps);

  FluidSeries out;
  out.v.push_back(data.v0.size() ? data.v0 : Vec::Zero(nv));
  out.p.push_back(Vec::Zero(ops_.pressure_dofs()));
  for (int n = 1; n < levels; ++n) {
    Vec loads = ops_.neumann_load(g[n]);
    if (!data.body_loads.empty()) loads += data.body_loads[static_cast<std::size_t>(n)];
    auto res = step.solve(grid_.time(n), out.v.back(), loads);
    out.v.push_back(std::move(res.v));
    out.p.push_back(std::move(res.p));
    out.iterations.push_back(res.iterations);
    out.final_residual.push_back(res.residuals.back());
  }
  return out;
}

TraceSeries StokesSolver::accumulate_displacement(const FluidSeries& state) const {
  return fsi::accumulate_displacement(*disc_, grid_, state);
}

TraceSeries StokesSolver::operator_T2eps(const TraceSeries& g, const FluidData& data, double eps) const {
  return accumulate_displacement(solve(g, data, eps));
}

TraceSeries StokesSolver::consistent_traction(const FluidSeries& state, const FluidData& data) const {
  TraceSeries g = disc_->zero_trace(TraceRole::TractionLoad, grid_);
  const double dt = grid_.dt();
  for (int n = 1; n < state.levels(); ++n) {
    const auto k = static_cast<std::size_t>(n);
    Vec r = ops_.mass * (state.v[k] - state.v[k - 1]) / dt + ops_.viscous * state.v[k] +
            ops_.law_term(law_, grid_.time(n), state.v[k]) + ops_.divergence * state.p[k];
    if (!data.body_loads.empty()) r -= data.body_loads[k];
    g[n] = disc_->restrict(Side::Fluid, r);
  }
  return g;
}

TraceSeries StokesSolver::flux_traction(const FluidSeries& state) const {
  if (state.levels() != grid_.n_steps() + 1 || state.p.size() != state.v.size()) {
    throw ShapeError("fluid state does not match the grid");
  }
  const FeSpace& V = disc_->fluid();
  const InterfaceDofs& dofs = disc_->interface();
  struct Adjacent {
    int element;
    int local_a, local_b;
  };
  std::vector<Adjacent> adjacent;
  for (const auto& f : dofs.facets) {
    const int mid = dofs.fluid_node[static_cast<std::size_t>(f.mid)];
    const int a = dofs.fluid_node[static_cast<std::size_t>(f.a)];
    Adjacent adj{-1, -1, -1};
    for (int k = 0; k < V.element_count() && adj.element < 0; ++k) {
      const auto& e = V.element(k);
      for (int m = 0; m < 3; ++m) {
        if (e[static_cast<std::size_t>(3 + m)] != mid) continue;
        const int i = m, j = (m + 1) % 3;
        adj = e[static_cast<std::size_t>(i)] == a ? Adjacent{k, i, j} : Adjacent{k, j, i};
      }
    }
    if (adj.element < 0) throw AssemblyError("interface facet has no adjacent fluid element");
    adjacent.push_back(adj);
  }

  const auto& rule = line_rule();
  TraceSeries g = disc_->zero_trace(TraceRole::TractionLoad, grid_);
  for (int n = 1; n < state.levels(); ++n) {
    const Vec& v = state.v[static_cast<std::size_t>(n)];
    const Vec& p = state.p[static_cast<std::size_t>(n)];
    const double t = grid_.time(n);
    Vec load = Vec::Zero(V.vector_dofs());
    for (std::size_t fi = 0; fi < dofs.facets.size(); ++fi) {
      const auto& f = dofs.facets[fi];
      const auto& adj = adjacent[fi];
      const auto& e = V.element(adj.element);
      const std::array<int, 3> local{f.a, f.mid, f.b};
      for (std::size_t q = 0; q < rule.points.size(); ++q) {
        const double s = rule.points[q];
        std::array<double, 3> bary{0.0, 0.0, 0.0};
        bary[static_cast<std::size_t>(adj.local_a)] = 1 - s;
        bary[static_cast<std::size_t>(adj.local_b)] = s;
        const auto grads = p2_gradients(bary, V.grad_lambda(adj.element));
        Mat2 G = Mat2::Zero();
        for (int i = 0; i < kP2Local; ++i) {
          const int node = e[static_cast<std::size_t>(i)];
          G.row(0) += v[2 * node] * grads[static_cast<std::size_t>(i)].transpose();
          G.row(1) += v[2 * node + 1] * grads[static_cast<std::size_t>(i)].transpose();
        }
        double pressure = 0.0;
        for (int i = 0; i < 3; ++i) pressure += bary[static_cast<std::size_t>(i)] * p[e[static_cast<std::size_t>(i)]];
        Mat2 stress = 0.5 * (G + G.transpose()) - pressure * Mat2::Identity();
        stress.row(0) += law_.eval(t, G.row(0).transpose()).transpose();
        stress.row(1) += law_.eval(t, G.row(1).transpose()).transpose();
        const Vec2 traction = stress * f.normal;
        const std::array<double, 3> phi{(1 - s) * (1 - 2 * s), 4 * s * (1 - s), s * (2 * s - 1)};
        const double w = rule.weights[q] * f.length;
        for (int i = 0; i < 3; ++i) {
          const int node = dofs.fluid_node[static_cast<std::size_t>(local[static_cast<std::size_t>(i)])];
          load[2 * node] += w * phi[static_cast<std::size_t>(i)] * traction[0];
          load[2 * node + 1] += w * phi[static_cast<std::size_t>(i)] * traction[1];
        }
      }
    }
    g[n] = disc_->restrict(Side::Fluid, load);
  }
  return g;
}

FluidSeries solve_stokes_quasilinear(const Discretization& disc, const FluidParams& params,
                                     const TimeGrid& grid, const TraceSeries& g,
                                     const FluidData& data, double eps, StepOptions options) {
  return StokesSolver(disc, params, grid, options).solve(g, data, eps);
}

TraceSeries accumulate_displacement(const Discretization& disc, const TimeGrid& grid,
                                    const FluidSeries& state) {
  if (state.levels() != grid.n_steps() + 1) throw ShapeError("fluid state does not match the grid");
  TraceSeries u = disc.zero_trace(TraceRole::Displacement, grid);
  Vec prev = disc.restrict(Side::Fluid, state.v[0]);
  for (int n = 1; n < state.levels(); ++n) {
    const Vec cur = disc.restrict(Side::Fluid, state.v[static_cast<std::size_t>(n)]);
    u[n] = u[n - 1] + 0.5 * grid.dt() * (prev + cur);
    prev = cur;
  }
  return u;
}

TraceSeries operator_T2eps(const Discretization& disc, const FluidParams& params,
                           const TimeGrid& grid, const TraceSeries& g, double eps,
                           const FluidData& data) {
  return StokesSolver(disc, params, grid).operator_T2eps(g, data, eps);
}

}  // namespace fsi
