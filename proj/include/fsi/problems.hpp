#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "fsi/fluid.hpp"
#include "fsi/solid.hpp"

namespace fsi {

/// One refinement level of a manufactured-solution study. `order` is the observed
/// rate against the previous row (NaN on the first row).
struct SolidMmsRow {
  int refinement;
  double h;
  double l2_error;  // displacement, final time
  double order;
};

struct FluidMmsRow {
  int refinement;
  double h;
  double h1_error;        // velocity gradient, final time
  double order;
  double max_divergence;  // largest |B^T v_n| over the steps
  double flux_gap;        // largest H^-1/2 gap of the pointwise flux to the exact traction
};

/// Displacement t^2 (sin(pi x), 0) on the flat channel, Dirichlet data from the exact
/// field, n_steps = 4 * 2^r on [0, 1].
std::vector<SolidMmsRow> solid_mms_study(std::span<const int> refinements, const SolidParams& params);

/// Velocity t curl(sin^2(pi x) (1 - y)^2), pressure t cos(pi x) y, linear law with
/// kappa = 1, exact traction on the interface, n_steps = 4 * 2^r on [0, 1].
std::vector<FluidMmsRow> fluid_mms_study(std::span<const int> refinements, const StepOptions& options = {});

/// Body forces: "zero", "gravity" (0, -1) or "downward" (0, -sin(pi x)).
/// Initial velocities: "zero" or "swirl" (the interpolated curl of sin^2(pi x) (1 - y)^2).
FluidData make_fluid_data(const Discretization& disc, const TimeGrid& grid, std::string_view body_force,
                          std::string_view v0);

}  // namespace fsi
