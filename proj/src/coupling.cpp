#include "fsi/coupling.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "fsi/norms.hpp"

namespace fsi {

void CouplingConfig::validate() const {
  if (eps_schedule.empty()) throw ConfigError("CouplingConfig: eps_schedule must not be empty");
  for (std::size_t k = 0; k < eps_schedule.size(); ++k) {
    const double e = eps_schedule[k];
    if (!std::isfinite(e) || e < 0.0) throw ConfigError("CouplingConfig: eps_schedule entries must be >= 0");
    if (e == 0.0 && k + 1 != eps_schedule.size()) {
      throw ConfigError("CouplingConfig: only the last eps_schedule entry may be 0");
    }
    if (k > 0 && !(e < eps_schedule[k - 1])) {
      throw ConfigError("CouplingConfig: eps_schedule must be strictly decreasing");
    }
  }
  if (!(omega > 0.0 && omega <= 1.0)) throw ConfigError("CouplingConfig: omega must lie in (0, 1]");
  if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("CouplingConfig: rho must lie in (0, 1]");
  if (!(tol_rel >= 0.0) || !(tol_abs >= 0.0) || tol_rel + tol_abs <= 0.0) {
    throw ConfigError("CouplingConfig: tolerances must be nonnegative and not both zero");
  }
  if (max_outer < 1) throw ConfigError("CouplingConfig: max_outer must be positive");
}

CoupledProblem::CoupledProblem(const Discretization& disc, const SolidParams& solid,
                               const FluidParams& fluid, const TimeGrid& grid, FluidData data,
                               StepOptions options)
    : disc_(&disc),
      grid_(grid),
      lame_(disc, solid, grid),
      stokes_(disc, fluid, grid, options),
      data_(std::move(data)) {
  const auto levels = static_cast<std::size_t>(grid.n_steps() + 1);
  if (!data_.body_loads.empty() && data_.body_loads.size() != levels) {
    throw ShapeError("fluid body loads need one entry per level");
  }
}

CoupledProblem::Evaluation CoupledProblem::evaluate(const TraceSeries& u, double eps) const {
  Evaluation ev;
  ev.solid = lame_.solve(u);
  ev.traction = lame_.traction(ev.solid);
  ev.fluid = stokes_.solve(ev.traction, data_, eps);
  ev.image = stokes_.accumulate_displacement(ev.fluid);
  return ev;
}

CoupledSolution CoupledProblem::fixed_point_solve(const CouplingConfig& config,
                                                  const TraceSeries& initial) const {
  config.validate();
  if (initial.role() != TraceRole::Displacement) throw PreconditionError("initial guess must be a displacement trace");
  if (initial.levels() != grid_.n_steps() + 1 || initial.dofs() != disc_->trace_dofs()) {
    throw ShapeError("initial guess does not match the grid or interface");
  }
  if (initial[0].cwiseAbs().maxCoeff() != 0.0) throw PreconditionError("initial guess must vanish at t = 0");

  const InterfaceGram& gram = disc_->gram();
  CoupledSolution sol;
  TraceSeries u = initial;
  for (const double eps : config.eps_schedule) {
    double prev_update = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;
    int k = 1;
    for (; k <= config.max_outer; ++k) {
      Evaluation ev = evaluate(u, eps);
      TraceSeries image = config.rho * ev.image;
      const TraceSeries next = (1.0 - config.omega) * u + config.omega * image;
      const double update = x_norm(gram, grid_, next - u).value;
      const double size = x_norm(gram, grid_, u).value;
      if (!std::isfinite(update) || !std::isfinite(size)) {
        throw NumericalFailure("fixed-point update is not finite at eps = " + std::to_string(eps));
      }
      sol.history.push_back({eps, k, update, update / prev_update, ev.fluid.picard_total()});
      prev_update = update;

      sol.input = u;
      sol.image = std::move(image);
      sol.traction = std::move(ev.traction);
      sol.solid = std::move(ev.solid);
      sol.fluid = std::move(ev.fluid);
      u = next;
      if (update <= config.tol_abs + config.tol_rel * size) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      throw IterationFailure("fixed-point iteration did not converge at eps = " + std::to_string(eps) +
                                 " within " + std::to_string(config.max_outer) + " iterations",
                             sol.history);
    }
    sol.stages.push_back({eps, k, u, sol.fluid});
  }
  sol.u_star = u;
  sol.residuals = coupling_residuals(sol);
  return sol;
}

CouplingResiduals CoupledProblem::coupling_residuals(const CoupledSolution& solution) const {
  const InterfaceGram& gram = disc_->gram();
  CouplingResiduals r;
  for (int n = 0; n < solution.input.levels(); ++n) {
    const double gap = std::sqrt(gram.l2_squared(solution.image[n] - solution.input[n]));
    r.displacement_gap = std::max(r.displacement_gap, gap);
  }
  const TraceSeries fluid_traction = stokes_.flux_traction(solution.fluid);
  r.traction_gap = dual_series_norm(gram, grid_, solution.traction - fluid_traction);
  return r;
}

std::vector<EpsStudyRow> CoupledProblem::epsilon_limit_study(const CoupledSolution& solution) const {
  if (solution.stages.empty()) throw PreconditionError("epsilon study needs at least one converged stage");
  const EpsStage& last = solution.stages.back();
  const FluidOperators& ops = stokes_.operators();
  const DiffusionLaw& law = stokes_.law();
  const double dt = grid_.dt();
  std::vector<EpsStudyRow> rows;
  for (const EpsStage& s : solution.stages) {
    EpsStudyRow row{s.eps, 0.0, 0.0, 0.0, 0.0, s.iterations};
    row.u_distance = x_norm(disc_->gram(), grid_, s.u_star - last.u_star).value;
    for (int n = 1; n <= grid_.n_steps(); ++n) {
      const auto k = static_cast<std::size_t>(n);
      const Vec& v = s.fluid.v[k];
      const Vec d = v - last.fluid.v[k];
      row.grad_distance += dt * d.dot(ops.laplace * d);
      row.law_distance += dt * ops.law_distance_squared(law, grid_.time(n), v, last.fluid.v[k]);
      row.reg_energy += dt * s.eps * v.dot(ops.hessian * v);
    }
    row.grad_distance = std::sqrt(std::max(row.grad_distance, 0.0));
    row.law_distance = std::sqrt(row.law_distance);
    rows.push_back(row);
  }
  return rows;
}

double eps_slope(const std::vector<EpsStudyRow>& rows) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& r : rows) {
    if (!(r.eps > 0.0) || !(r.u_distance > 0.0)) continue;
    const double x = std::log(r.eps), y = std::log(r.u_distance);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) throw PreconditionError("slope needs at least two rows with positive eps and distance");
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace fsi
