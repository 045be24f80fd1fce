#pragma once

#include <memory>
#include <vector>

#include <Eigen/SparseCholesky>

#include "fsi/discretization.hpp"
#include "fsi/laws.hpp"

namespace fsi {

/// Average-acceleration Newmark (beta = 1/4, gamma = 1/2) for M a + K u = f,
/// with a subset of dofs whose displacement is prescribed at every level.
/// Prescribed dofs follow the same Newmark update, so the discrete kinematics
/// stay consistent on them; their acceleration is implied by the data.
class NewmarkIntegrator {
 public:
  struct State {
    Vec u, v, a;
  };

  NewmarkIntegrator(SpMat M, SpMat K, std::vector<char> prescribed, double dt);

  /// Level-0 state: free accelerations solve M_ff a_f = f - K u0 - M_fp a_p.
  State initial(const Vec& u0, const Vec& v0, const Vec& f0, const Vec& a_prescribed) const;
  /// Advances one step; `u_prescribed` supplies the prescribed entries at the new level.
  State step(const State& prev, const Vec& f_next, const Vec& u_prescribed) const;

  double dt() const { return dt_; }
  const SpMat& mass() const { return M_; }
  const SpMat& stiffness() const { return K_; }
  bool prescribed(int dof) const { return prescribed_[static_cast<std::size_t>(dof)] != 0; }

 private:
  SpMat M_, K_, S_;
  std::vector<char> prescribed_;
  std::vector<int> free_;  // free dof ids
  double dt_;
  SpMat S_ff_, S_fp_, M_ff_, M_fp_;
  std::unique_ptr<Eigen::SimplicialLDLT<SpMat>> s_solver_;
  std::unique_ptr<Eigen::SimplicialLDLT<SpMat>> m_solver_;

  Vec gather_free(const Vec& full) const;
  Vec gather_prescribed(const Vec& full) const;
  std::vector<int> prescribed_ids_;
};

/// Mass, stiffness and dof masks of the solid subproblem.
struct SolidOperators {
  SolidOperators(const Discretization& disc, const SolidParams& params);

  SpMat mass;       // vector mass, unit density
  SpMat stiffness;  // 2 mu (eps, eps) + lambda (div, div)
  std::vector<char> clamped;    // dofs on SOLID_DIRICHLET facets
  std::vector<char> interface;  // dofs on INTERFACE facets (endpoints are clamped too)
};

struct SolidSeries {
  std::vector<Vec> u, v, a;
  int levels() const { return static_cast<int>(u.size()); }
};

/// Newmark sweep with every masked dof prescribed from `boundary[n]`; loads[n]
/// are volume load vectors (may be empty for no load). Initial state is zero
/// with prescribed acceleration 2 u_p(t_1) / dt^2.
SolidSeries solve_lame(const NewmarkIntegrator& integrator, const TimeGrid& grid,
                       const std::vector<Vec>& boundary, const std::vector<Vec>& loads);

/// Cached solver for the Dirichlet problem with interface data and clamped
/// outer boundary; the Newmark factorization is built once per (mesh, dt).
class LameSolver {
 public:
  LameSolver(const Discretization& disc, const SolidParams& params, const TimeGrid& grid);

  const Discretization& discretization() const { return *disc_; }
  const SolidOperators& operators() const { return ops_; }
  const TimeGrid& grid() const { return grid_; }

  /// Requires u_d(t_0) = 0.
  SolidSeries solve(const TraceSeries& u_d, const std::vector<Vec>& loads = {}) const;
  /// Consistent-flux traction loads <sigma(u) n, phi> for interior interface
  /// basis functions, n the fluid-outward normal: -phi^T (M a + K u - F).
  TraceSeries traction(const SolidSeries& state, const std::vector<Vec>& loads = {}) const;
  /// Dirichlet-to-Neumann map with zero body force.
  TraceSeries operator_T1(const TraceSeries& u_s) const;

 private:
  const Discretization* disc_;
  SolidOperators ops_;
  TimeGrid grid_;
  NewmarkIntegrator integrator_;
};

SolidSeries solve_lame_dirichlet(const Discretization& disc, const SolidParams& params,
                                 const TimeGrid& grid, const TraceSeries& u_d,
                                 const std::vector<Vec>& loads = {});
TraceSeries recover_traction(const Discretization& disc, const SolidParams& params,
                             const TimeGrid& grid, const SolidSeries& state,
                             const std::vector<Vec>& loads = {});
TraceSeries operator_T1(const Discretization& disc, const SolidParams& params,
                        const TimeGrid& grid, const TraceSeries& u_s);

}  // namespace fsi
