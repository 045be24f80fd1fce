#pragma once

#include <map>
#include <memory>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "fsi/discretization.hpp"
#include "fsi/laws.hpp"

namespace fsi {

/// Assembled operators of the fluid subproblem on the P2/P1 Taylor-Hood pair.
struct FluidOperators {
  explicit FluidOperators(const Discretization& disc);

  const Discretization* disc;
  SpMat mass;        // vector velocity mass
  SpMat viscous;     // (eps(v), eps(phi))
  SpMat laplace;     // (grad v, grad phi), componentwise
  SpMat hessian;     // broken second-derivative Gram, componentwise
  SpMat divergence;  // B(i, q) = -(psi_q, div phi_i)
  SpMat pressure_mass;
  std::vector<char> fixed;  // FLUID_DIRICHLET velocity dofs
  std::vector<int> free;    // free velocity dof ids

  int velocity_dofs() const { return static_cast<int>(mass.rows()); }
  int pressure_dofs() const { return static_cast<int>(divergence.cols()); }

  /// sum_c (a(t, grad v_c), grad phi) for every velocity dof.
  Vec law_term(const DiffusionLaw& law, double t, const Vec& v) const;
  /// Derivative of law_term at v.
  SpMat law_jacobian(const DiffusionLaw& law, double t, const Vec& v) const;
  /// sum over elements of the law potential applied to each velocity component gradient.
  double law_potential(const DiffusionLaw& law, double t, const Vec& v) const;
  /// Squared L2 distance sum_c |a(t, grad v_c) - a(t, grad w_c)|^2 over the fluid domain.
  double law_distance_squared(const DiffusionLaw& law, double t, const Vec& v, const Vec& w) const;
  /// Neumann load vector of a traction-role trace vector.
  Vec neumann_load(const Vec& g) const;
};

struct StepOptions {
  double tol = 1e-10;
  int max_it = 500;
  bool newton = false;
};

struct StepResult {
  Vec v;
  Vec p;
  int iterations = 0;
  std::vector<double> residuals;  // preconditioned residual norm at each check
};

/// Backward-Euler step solver for one (dt, eps) pair. The preconditioner is the
/// step operator with the law replaced by c_m xi, saddle-coupled with B, and is
/// factored once.
class StepSolver {
 public:
  StepSolver(const FluidOperators& ops, const DiffusionLaw& law, double dt, double eps,
             StepOptions options = {});

  /// Finds (v, p) with (1/dt) M (v - v_prev) + A v + N(v) + eps R v + B p = loads, B^T v = 0.
  /// The first iterate is the preconditioner solve; each further iterate is a
  /// damped Picard update with tau = c_m^2 / L^2, or a Newton step when enabled
  /// and it lowers the residual.
  StepResult solve(double t, const Vec& v_prev, const Vec& loads) const;

  /// (1/dt) M (v - v_prev) + A v + N(v) + eps R v - loads, without the pressure.
  Vec residual(double t, const Vec& v_prev, const Vec& loads, const Vec& v) const;
  /// Convex functional minimized over discretely divergence-free v by the step solution.
  double functional(double t, const Vec& v_prev, const Vec& loads, const Vec& v) const;
  /// Solves [P B; B^T 0] [w; q] = [rhs; div_rhs] on the free dofs (full-length w).
  std::pair<Vec, Vec> precondition(const Vec& rhs, const Vec& div_rhs) const;
  double p_norm(const Vec& w) const;
  /// Dual norm sqrt(b^T P_ff^-1 b) of a load on the free velocity dofs.
  double data_norm(const Vec& rhs) const;

  double damping() const { return tau_; }
  double dt() const { return dt_; }
  double eps() const { return eps_; }

 private:
  std::pair<Vec, Vec> saddle_solve(const Eigen::SparseLU<SpMat>& lu, const Vec& rhs,
                                   const Vec& div_rhs) const;
  SpMat saddle_matrix(const SpMat& velocity_block) const;

  const FluidOperators* ops_;
  DiffusionLaw law_;
  double dt_, eps_;
  StepOptions options_;
  double tau_;
  SpMat P_;  // full-size preconditioner velocity block
  SpMat step_linear_;  // M/dt + A + eps R
  std::unique_ptr<Eigen::SparseLU<SpMat>> lu_;
  std::unique_ptr<Eigen::SimplicialLDLT<SpMat>> free_solver_;
  std::vector<int> free_index_;  // velocity dof -> free index or -1
};

struct FluidSeries {
  std::vector<Vec> v;  // levels 0..N
  std::vector<Vec> p;  // levels 0..N (p[0] is zero)
  std::vector<int> iterations;            // per step 1..N
  std::vector<double> final_residual;     // per step 1..N
  int levels() const { return static_cast<int>(v.size()); }
  int picard_total() const;
};

struct FluidData {
  std::vector<Vec> body_loads;  // empty or one volume load per level
  Vec v0;                       // empty means zero
};

/// Cached sweep solver; keeps one factored step operator per eps.
class StokesSolver {
 public:
  StokesSolver(const Discretization& disc, const FluidParams& params, const TimeGrid& grid,
               StepOptions options = {});
  StokesSolver(const StokesSolver&) = delete;
  StokesSolver& operator=(const StokesSolver&) = delete;

  const FluidOperators& operators() const { return ops_; }
  const TimeGrid& grid() const { return grid_; }
  const DiffusionLaw& law() const { return law_; }
  const StepSolver& step_solver(double eps) const;

  /// Backward-Euler sweep with Neumann loads <g(t_n), phi> on the interface.
  FluidSeries solve(const TraceSeries& g, const FluidData& data, double eps) const;
  /// Interface displacement by trapezoidal accumulation of the velocity trace.
  TraceSeries accumulate_displacement(const FluidSeries& state) const;
  TraceSeries operator_T2eps(const TraceSeries& g, const FluidData& data, double eps) const;
  /// Fluid-side consistent flux: interface rows of the step residual with the
  /// regularization and Neumann terms removed.
  TraceSeries consistent_traction(const FluidSeries& state, const FluidData& data) const;
  /// Load of the pointwise Cauchy traction (a(t, grad v) + eps(v) - p I) n evaluated
  /// from the fluid elements adjacent to the interface.
  TraceSeries flux_traction(const FluidSeries& state) const;

 private:
  const Discretization* disc_;
  FluidOperators ops_;
  DiffusionLaw law_;
  TimeGrid grid_;
  StepOptions options_;
  mutable std::map<double, std::unique_ptr<StepSolver>> steps_;
};

FluidSeries solve_stokes_quasilinear(const Discretization& disc, const FluidParams& params,
                                     const TimeGrid& grid, const TraceSeries& g,
                                     const FluidData& data, double eps, StepOptions options = {});
TraceSeries accumulate_displacement(const Discretization& disc, const TimeGrid& grid,
                                    const FluidSeries& state);
TraceSeries operator_T2eps(const Discretization& disc, const FluidParams& params,
                           const TimeGrid& grid, const TraceSeries& g, double eps,
                           const FluidData& data = {});

}  // namespace fsi
