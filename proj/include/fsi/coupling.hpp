#pragma once

#include <vector>

#include "fsi/errors.hpp"
#include "fsi/fluid.hpp"
#include "fsi/solid.hpp"

namespace fsi {

struct CouplingConfig {
  std::vector<double> eps_schedule{1e-1, 1e-2, 1e-3, 1e-4};
  double omega = 0.7;  // relaxation, does not change the fixed point
  double rho = 1.0;    // scaling, the iteration solves u = rho T^eps(u)
  double tol_rel = 1e-8;
  double tol_abs = 1e-10;
  int max_outer = 200;

  /// Throws ConfigError naming the violated invariant.
  void validate() const;

  bool operator==(const CouplingConfig&) const = default;
};

struct HistoryRecord {
  double eps;
  int k;
  double update_norm;  // X-norm of u^{k} - u^{k-1}
  double contraction;  // update ratio, NaN at k = 1
  int picard_total;    // fluid nonlinear iterations in this evaluation
};

class IterationFailure : public Error {
 public:
  IterationFailure(const std::string& what, std::vector<HistoryRecord> history)
      : Error(what), history_(std::move(history)) {}
  const std::vector<HistoryRecord>& history() const noexcept { return history_; }

 private:
  std::vector<HistoryRecord> history_;
};

struct CouplingResiduals {
  double displacement_gap = 0.0;  // sup_n L2(Sigma) of rho T^eps(u) - u at the final evaluation
  double traction_gap = 0.0;      // L2(0,T; H^-1/2) of solid traction minus fluid flux traction
};

/// Converged state at one eps of the schedule.
struct EpsStage {
  double eps;
  int iterations;
  TraceSeries u_star;
  FluidSeries fluid;
};

struct CoupledSolution {
  TraceSeries u_star;
  TraceSeries input;      // trace fed to the solid at the final evaluation
  TraceSeries image;      // rho T^eps(input)
  TraceSeries traction;   // solid traction load T1(input)
  SolidSeries solid;
  FluidSeries fluid;
  std::vector<HistoryRecord> history;
  std::vector<EpsStage> stages;
  CouplingResiduals residuals;
};

struct EpsStudyRow {
  double eps;
  double u_distance;       // X-norm to the last stage
  double grad_distance;    // L2(L2) of the velocity gradient difference to the last stage
  double law_distance;     // L2(L2) of the law difference to the last stage
  double reg_energy;       // eps * sum_n dt v_n^T R v_n
  int outer_iterations;
};

/// Solid and fluid solvers on one discretization, sharing the interface trace.
class CoupledProblem {
 public:
  CoupledProblem(const Discretization& disc, const SolidParams& solid, const FluidParams& fluid,
                 const TimeGrid& grid, FluidData data = {}, StepOptions options = {});

  struct Evaluation {
    SolidSeries solid;
    TraceSeries traction;
    FluidSeries fluid;
    TraceSeries image;  // T^eps(u), unscaled
  };

  Evaluation evaluate(const TraceSeries& u, double eps) const;
  TraceSeries operator_Teps(const TraceSeries& u, double eps) const { return evaluate(u, eps).image; }

  /// Relaxed iteration u <- (1 - omega) u + omega rho T^eps(u), continued over the
  /// eps schedule with warm starts.
  CoupledSolution fixed_point_solve(const CouplingConfig& config, const TraceSeries& initial) const;
  CouplingResiduals coupling_residuals(const CoupledSolution& solution) const;
  /// Distances of each stage to the last stage of a full-schedule solve.
  std::vector<EpsStudyRow> epsilon_limit_study(const CoupledSolution& solution) const;

  const Discretization& discretization() const { return *disc_; }
  const TimeGrid& grid() const { return grid_; }
  const LameSolver& lame() const { return lame_; }
  const StokesSolver& stokes() const { return stokes_; }
  const FluidData& data() const { return data_; }

 private:
  const Discretization* disc_;
  TimeGrid grid_;
  LameSolver lame_;
  StokesSolver stokes_;
  FluidData data_;
};

/// Least-squares slope of log(u_distance) against log(eps) over rows with positive
/// eps and distance.
double eps_slope(const std::vector<EpsStudyRow>& rows);

}  // namespace fsi
