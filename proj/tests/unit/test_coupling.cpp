#include <doctest.h>

#include <cmath>
#include <random>

#include "fsi/coupling.hpp"
#include "fsi/norms.hpp"
#include "fsi/verify.hpp"

using namespace fsi;

namespace {

FluidData downward_force(const Discretization& disc, const TimeGrid& grid, double scale = 1.0) {
  FluidData data;
  for (int n = 0; n <= grid.n_steps(); ++n) {
    data.body_loads.push_back(
        assemble_body_load(disc.fluid(), [=](double x, double) { return Vec2(0.0, -scale * std::sin(M_PI * x)); }));
  }
  return data;
}

FluidParams saturating() {
  FluidParams p;
  p.law = DiffusionLaw::saturating(1.0, 1.0);
  return p;
}

}  // namespace

TEST_CASE("coupling config invariants") {
  CouplingConfig c;
  CHECK_NOTHROW(c.validate());
  auto bad = c;
  bad.eps_schedule = {1e-2, 1e-1};
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("strictly decreasing"), ConfigError);
  bad = c;
  bad.eps_schedule = {1e-1, 0.0, 0.0};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.eps_schedule = {};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = c;
  bad.omega = 0.0;
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("omega"), ConfigError);
  bad = c;
  bad.rho = 1.5;
  CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("rho"), ConfigError);
  bad = c;
  bad.max_outer = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  c.eps_schedule = {1e-1, 1e-3, 0.0};
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("zero data gives the zero fixed point in one iteration") {
  const Discretization disc(build_geometry(GeometryPreset::FlatChannel, 0.0, 1));
  const TimeGrid grid(1.0, 8);
  const CoupledProblem problem(disc, SolidParams{}, saturating(), grid);
  const auto zero = disc.zero_trace(TraceRole::Displacement, grid);
  CHECK(problem.operator_Teps(zero, 1e-2).max_abs() == 0.0);
  const auto sol = problem.fixed_point_solve(CouplingConfig{}, zero);
  CHECK(sol.history.size() == 4);
  for (const auto& h : sol.history) CHECK(h.k == 1);
  CHECK(x_norm(disc.gram(), grid, sol.u_star).value <= 1e-12);
  CHECK(sol.residuals.displacement_gap == 0.0);
  CHECK(sol.residuals.traction_gap == 0.0);
}

TEST_CASE("fixed point preconditions") {
  const Discretization disc(build_geometry(GeometryPreset::FlatChannel, 0.0, 0));
  const TimeGrid grid(1.0, 4);
  const CoupledProblem problem(disc, SolidParams{}, FluidParams{}, grid);
  auto u = disc.zero_trace(TraceRole::Displacement, grid);
  u[0][0] = 1e-3;
  CHECK_THROWS_AS(problem.fixed_point_solve(CouplingConfig{}, u), PreconditionError);
  CHECK_THROWS_AS(problem.fixed_point_solve(CouplingConfig{}, disc.zero_trace(TraceRole::Velocity, grid)),
                  PreconditionError);
  CouplingConfig bad;
  bad.omega = 2.0;
  CHECK_THROWS_AS(problem.fixed_point_solve(bad, disc.zero_trace(TraceRole::Displacement, grid)), ConfigError);
}

TEST_CASE("relaxed iteration reaches a fixed point of T^eps") {
  const Discretization disc(build_geometry(GeometryPreset::CurvedInterface, 0.1, 1));
  const TimeGrid grid(1.0, 8);
  const CoupledProblem problem(disc, SolidParams{}, saturating(), grid, downward_force(disc, grid));
  CouplingConfig cfg;
  cfg.eps_schedule = {1e-2};
  const auto sol = problem.fixed_point_solve(cfg, disc.zero_trace(TraceRole::Displacement, grid));
  const double size = x_norm(disc.gram(), grid, sol.u_star).value;
  CHECK(size > 1e-4);
  const auto image = problem.operator_Teps(sol.u_star, 1e-2);
  const double defect = x_norm(disc.gram(), grid, image - sol.u_star).value;
  CHECK(defect <= 2 * (cfg.tol_abs + cfg.tol_rel * size) / cfg.omega);
  for (std::size_t k = 1; k < sol.history.size(); ++k) CHECK(sol.history[k].contraction < 1.0);
  CHECK(sol.residuals.displacement_gap <= 10 * (cfg.tol_abs + cfg.tol_rel * size));
  CHECK(std::isfinite(sol.residuals.traction_gap));
}

TEST_CASE("scaled iteration solves u = rho T^eps(u)") {
  const Discretization disc(build_geometry(GeometryPreset::FlatChannel, 0.0, 1));
  const TimeGrid grid(1.0, 8);
  const CoupledProblem problem(disc, SolidParams{}, FluidParams{}, grid, downward_force(disc, grid));
  CouplingConfig cfg;
  cfg.eps_schedule = {1e-3};
  cfg.rho = 0.4;
  cfg.omega = 1.0;
  const auto sol = problem.fixed_point_solve(cfg, disc.zero_trace(TraceRole::Displacement, grid));
  const double size = x_norm(disc.gram(), grid, sol.u_star).value;
  const auto image = cfg.rho * problem.operator_Teps(sol.u_star, 1e-3);
  CHECK(x_norm(disc.gram(), grid, image - sol.u_star).value <= 2 * (cfg.tol_abs + cfg.tol_rel * size));
}

TEST_CASE("eps continuation, study table and determinism") {
  const Discretization disc(build_geometry(GeometryPreset::FlatChannel, 0.0, 1));
  const TimeGrid grid(1.0, 8);
  const CoupledProblem problem(disc, SolidParams{}, saturating(), grid, downward_force(disc, grid));
  const CouplingConfig cfg;
  const auto zero = disc.zero_trace(TraceRole::Displacement, grid);
  const auto sol = problem.fixed_point_solve(cfg, zero);
  REQUIRE(sol.stages.size() == cfg.eps_schedule.size());

  // Warm-start steps: the largest change happens where eps crosses the element
  // scale h^2 (~1.6e-2 here); below it the steps shrink.
  std::vector<double> steps;
  for (std::size_t j = 1; j < sol.stages.size(); ++j) {
    steps.push_back(x_norm(disc.gram(), grid, sol.stages[j].u_star - sol.stages[j - 1].u_star).value);
  }
  CHECK(steps[2] < steps[1]);
  CHECK(steps[2] < steps[0]);

  const auto rows = problem.epsilon_limit_study(sol);
  REQUIRE(rows.size() == 4);
  CHECK(rows.back().u_distance == 0.0);
  CHECK(rows.back().grad_distance == 0.0);
  const double L = problem.stokes().law().L();
  for (const auto& r : rows) CHECK(r.law_distance <= L * r.grad_distance * (1 + 1e-12) + 1e-300);
  for (std::size_t j = 1; j < rows.size(); ++j) {
    CHECK(rows[j].u_distance <= 1.1 * rows[j - 1].u_distance);
    CHECK(rows[j].grad_distance <= 1.1 * rows[j - 1].grad_distance);
  }

  const auto again = problem.fixed_point_solve(cfg, zero);
  REQUIRE(again.history.size() == sol.history.size());
  for (std::size_t k = 0; k < sol.history.size(); ++k) {
    CHECK(again.history[k].update_norm == sol.history[k].update_norm);
    CHECK(again.history[k].picard_total == sol.history[k].picard_total);
  }
}

TEST_CASE("iteration cap raises a failure carrying the history") {
  const Discretization disc(build_geometry(GeometryPreset::FlatChannel, 0.0, 0));
  const TimeGrid grid(1.0, 4);
  const CoupledProblem problem(disc, SolidParams{}, FluidParams{}, grid, downward_force(disc, grid));
  CouplingConfig cfg;
  cfg.max_outer = 2;
  cfg.tol_rel = 0.0;
  cfg.tol_abs = 1e-30;
  try {
    problem.fixed_point_solve(cfg, disc.zero_trace(TraceRole::Displacement, grid));
    FAIL("expected an iteration failure");
  } catch (const IterationFailure& e) {
    REQUIRE(e.history().size() == 2);
    CHECK(e.history()[0].eps == cfg.eps_schedule[0]);
    CHECK(e.history()[1].k == 2);
  }
}

TEST_CASE("T^eps Lipschitz ratio is bounded by the product of the measured constants") {
  const Discretization disc(build_geometry(GeometryPreset::FlatChannel, 0.0, 2));
  const TimeGrid grid(1.0, 8);
  const CoupledProblem problem(disc, SolidParams{}, FluidParams{}, grid);
  std::mt19937_64 rng(11);
  const double cs = verify_lame_inverse(problem.lame(), 10, rng).constant;
  const double cf = verify_t2_lipschitz(problem.stokes(), 5, rng).constant;
  const auto lip = verify_teps_lipschitz(problem, 5, rng, {1e-2, 1e-4});
  REQUIRE(lip.size() == 2);
  CAPTURE(cs);
  CAPTURE(cf);
  CAPTURE(lip[0].constant);
  CAPTURE(lip[1].constant);
  for (const auto& m : lip) CHECK(m.constant <= cs * cf * 1.1);
  const double hi = std::max(lip[0].constant, lip[1].constant);
  const double lo = std::min(lip[0].constant, lip[1].constant);
  CHECK(hi <= 1.25 * lo);
}

TEST_CASE("eps slope fit") {
  std::vector<EpsStudyRow> rows;
  for (double e : {1e-1, 1e-2, 1e-3}) rows.push_back({e, 3.0 * std::pow(e, 0.9), 0, 0, 0, 1});
  rows.push_back({1e-4, 0.0, 0, 0, 0, 1});
  CHECK(eps_slope(rows) == doctest::Approx(0.9).epsilon(1e-12));
  rows.resize(1);
  CHECK_THROWS_AS(eps_slope(rows), PreconditionError);
}
