#include "fsi/problems.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "fsi/errors.hpp"
#include "fsi/norms.hpp"

namespace fsi {

namespace {

constexpr double pi = std::numbers::pi;

template <class Row, class Err>
void fill_orders(std::vector<Row>& rows, Err err) {
  for (std::size_t k = 0; k < rows.size(); ++k) {
    rows[k].order = k == 0 ? std::numeric_limits<double>::quiet_NaN()
                           : std::log(err(rows[k - 1]) / err(rows[k])) / std::log(rows[k - 1].h / rows[k].h);
  }
}

void check_levels(std::span<const int> refinements) {
  if (refinements.empty()) throw ConfigError("a convergence study needs at least one refinement");
  for (int r : refinements) {
    if (r < 0 || r > kMaxRefinement) throw ConfigError("study refinement out of range");
  }
}

Vec2 swirl(double x, double y) {
  return {2 * (y - 1) * std::pow(std::sin(pi * x), 2), -pi * (y - 1) * (y - 1) * std::sin(2 * pi * x)};
}

Mat2 swirl_gradient(double x, double y) {
  Mat2 G;
  G << 2 * pi * (y - 1) * std::sin(2 * pi * x), 2 * std::pow(std::sin(pi * x), 2),
      -2 * pi * pi * (y - 1) * (y - 1) * std::cos(2 * pi * x), 2 * pi * (1 - y) * std::sin(2 * pi * x);
  return G;
}

// Residual of the linear-law momentum equation for v = t swirl, p = t cos(pi x) y.
Vec2 swirl_force(double t, double x, double y) {
  const double s = std::sin(pi * x), c = std::cos(pi * x);
  const double fx = -pi * t * y * s + 6 * pi * pi * t * (y - 1) * s * s - 6 * pi * pi * t * (y - 1) * c * c +
                    (2 * y - 2) * s * s;
  const double fy =
      -(12 * pi * pi * pi * t * (y - 1) * (y - 1) * s - 6 * pi * t * s - t + 2 * pi * (y - 1) * (y - 1) * s) * c;
  return {fx, fy};
}

}  // namespace

std::vector<SolidMmsRow> solid_mms_study(std::span<const int> refinements, const SolidParams& params) {
  check_levels(refinements);
  params.validate();
  const double mu = params.mu, lambda = params.lambda;
  const auto exact = [](double t) {
    return [t](double x, double) { return Vec2(t * t * std::sin(pi * x), 0.0); };
  };
  const auto force = [=](double t) {
    return [=](double x, double) {
      return Vec2((2.0 + (2 * mu + lambda) * pi * pi * t * t) * std::sin(pi * x), 0.0);
    };
  };
  std::vector<SolidMmsRow> rows;
  for (int r : refinements) {
    const Discretization disc(build_geometry(GeometryPreset::FlatChannel, 0.0, r));
    const int n = kBaseResolution << r;
    const TimeGrid grid(1.0, n);
    const SolidOperators ops(disc, params);
    std::vector<char> mask(ops.clamped.size());
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = ops.clamped[i] || ops.interface[i];
    const NewmarkIntegrator nm(ops.mass, ops.stiffness, mask, grid.dt());
    std::vector<Vec> boundary, loads;
    for (int k = 0; k <= n; ++k) {
      boundary.push_back(disc.solid().interpolate(exact(grid.time(k))));
      loads.push_back(assemble_body_load(disc.solid(), force(grid.time(k))));
    }
    const auto state = solve_lame(nm, grid, boundary, loads);
    rows.push_back({r, disc.mesh().h(), l2_error(disc.solid(), state.u.back(), exact(1.0)), 0.0});
  }
  fill_orders(rows, [](const SolidMmsRow& row) { return row.l2_error; });
  return rows;
}

std::vector<FluidMmsRow> fluid_mms_study(std::span<const int> refinements, const StepOptions& options) {
  check_levels(refinements);
  std::vector<FluidMmsRow> rows;
  for (int r : refinements) {
    const Discretization disc(build_geometry(GeometryPreset::FlatChannel, 0.0, r));
    const int n = kBaseResolution << r;
    const TimeGrid grid(1.0, n);
    FluidParams params;
    params.law = DiffusionLaw::linear(1.0);
    const StokesSolver solver(disc, params, grid, options);
    FluidData data;
    auto g = disc.zero_trace(TraceRole::TractionLoad, grid);
    for (int k = 0; k <= n; ++k) {
      const double t = grid.time(k);
      data.body_loads.push_back(
          assemble_body_load(disc.fluid(), [t](double x, double y) { return swirl_force(t, x, y); }));
      const Vec load = assemble_interface_traction(
          disc.interface(), disc.fluid(), Side::Fluid, [t](double x, double y, const Vec2& nrm) {
            const Mat2 G = t * swirl_gradient(x, y);
            const Mat2 S = G + 0.5 * (G + G.transpose()) - t * std::cos(pi * x) * y * Mat2::Identity();
            return Vec2(S * nrm);
          });
      g[k] = disc.restrict(Side::Fluid, load);
    }
    const auto state = solver.solve(g, data, 0.0);
    const auto flux = solver.flux_traction(state);
    FluidMmsRow row{r, disc.mesh().h(), 0.0, 0.0, 0.0, 0.0};
    for (int k = 1; k <= n; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      row.max_divergence =
          std::max(row.max_divergence, (solver.operators().divergence.transpose() * state.v[kk]).norm());
      row.flux_gap = std::max(row.flux_gap, dual_half_norm(disc.gram(), flux[k] - g[k]));
    }
    row.h1_error = h1_seminorm_error(disc.fluid(), state.v.back(), swirl_gradient);
    rows.push_back(row);
  }
  fill_orders(rows, [](const FluidMmsRow& row) { return row.h1_error; });
  return rows;
}

FluidData make_fluid_data(const Discretization& disc, const TimeGrid& grid, std::string_view body_force,
                          std::string_view v0) {
  FluidData data;
  if (body_force == "gravity" || body_force == "downward") {
    const bool uniform = body_force == "gravity";
    const Vec load = assemble_body_load(disc.fluid(), [uniform](double x, double) {
      return Vec2(0.0, uniform ? -1.0 : -std::sin(pi * x));
    });
    data.body_loads.assign(static_cast<std::size_t>(grid.n_steps() + 1), load);
  } else if (body_force != "zero") {
    throw ConfigError("unknown body force preset '" + std::string(body_force) + "'");
  }
  if (v0 == "swirl") {
    data.v0 = disc.fluid().interpolate(swirl);
  } else if (v0 != "zero") {
    throw ConfigError("unknown initial velocity preset '" + std::string(v0) + "'");
  }
  return data;
}

}  // namespace fsi
