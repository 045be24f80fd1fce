#include "fsi/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>

#include "fsi/csv.hpp"
#include "fsi/problems.hpp"

namespace fsi {

namespace {

namespace fs = std::filesystem;

struct Workspace {
  const RunConfig& config;
  Discretization disc;
  TimeGrid grid;

  explicit Workspace(const RunConfig& c)
      : config(c), disc(build_geometry(c.preset, c.amplitude, c.refinement)), grid(c.grid()) {}
};

void prepare_output(const Invocation& inv) {
  const fs::path& out = inv.config.out;
  fs::create_directories(out);
  std::ofstream(out / "config.cfg", std::ios::binary) << inv.config_text;
  std::ofstream(out / "effective_config.cfg", std::ios::binary) << serialize(inv.config);
}

void write_trace(const fs::path& path, const Discretization& disc, const TimeGrid& grid, const TraceSeries& s,
                 std::string_view x, std::string_view y) {
  CsvWriter csv(path, {"t", "arclength", x, y});
  const auto arc = disc.trace_arclength();
  for (int n = 0; n < s.levels(); ++n) {
    for (std::size_t i = 0; i < arc.size(); ++i) {
      const auto k = static_cast<int>(2 * i);
      csv.row(grid.time(n), arc[i], s[n][k], s[n][k + 1]);
    }
  }
}

void write_history(const fs::path& path, const std::vector<HistoryRecord>& history) {
  CsvWriter csv(path, {"eps", "k", "update_norm_X", "contraction_factor", "picard_total"});
  for (const auto& h : history) csv.row(h.eps, h.k, h.update_norm, h.contraction, h.picard_total);
}

void write_fluid_iterations(const fs::path& path, const FluidSeries& fluid) {
  CsvWriter csv(path, {"step", "picard_its", "final_residual"});
  for (std::size_t k = 0; k < fluid.iterations.size(); ++k) {
    csv.row(k + 1, fluid.iterations[k], fluid.final_residual[k]);
  }
}

void write_norms(const fs::path& path, const std::vector<NormReport>& rows) {
  std::ofstream out(path, std::ios::binary);
  out << "name,value,component_0,component_1,component_2\n";
  for (const auto& r : rows) out << csv_row(r) << '\n';
}

std::string step_name(std::string_view prefix, int n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%04d.csv", std::string(prefix).c_str(), n);
  return buf;
}

void dump_solid(const fs::path& dir, const Discretization& disc, const SolidSeries& solid) {
  fs::create_directories(dir);
  for (int n = 0; n < solid.levels(); ++n) {
    CsvWriter csv(dir / step_name("solid_step", n), {"node", "u_x", "u_y"});
    const Vec& u = solid.u[static_cast<std::size_t>(n)];
    for (int i = 0; i < disc.solid().node_count(); ++i) csv.row(i, u[2 * i], u[2 * i + 1]);
  }
}

void dump_fluid(const fs::path& dir, const Discretization& disc, const FluidSeries& fluid) {
  fs::create_directories(dir);
  for (int n = 0; n < fluid.levels(); ++n) {
    const auto k = static_cast<std::size_t>(n);
    CsvWriter vel(dir / step_name("fluid_velocity_step", n), {"node", "v_x", "v_y"});
    for (int i = 0; i < disc.fluid().node_count(); ++i) vel.row(i, fluid.v[k][2 * i], fluid.v[k][2 * i + 1]);
    CsvWriter pre(dir / step_name("fluid_pressure_step", n), {"vertex", "p"});
    for (Eigen::Index i = 0; i < fluid.p[k].size(); ++i) pre.row(i, fluid.p[k][i]);
  }
}

void write_eps_study(const fs::path& path, const std::vector<EpsStudyRow>& rows) {
  CsvWriter csv(path, {"eps", "u_distance_X", "grad_distance_L2L2", "law_distance_L2L2", "reg_energy",
                       "outer_iterations"});
  for (const auto& r : rows) {
    csv.row(r.eps, r.u_distance, r.grad_distance, r.law_distance, r.reg_energy, r.outer_iterations);
  }
}

CoupledProblem make_problem(const Workspace& ws) {
  const auto& c = ws.config;
  return CoupledProblem(ws.disc, c.solid, c.fluid_params(), ws.grid,
                        make_fluid_data(ws.disc, ws.grid, c.body_force, c.v0), c.step_options());
}

std::vector<int> levels_from(int first, int count) {
  std::vector<int> out;
  for (int k = 0; k < count; ++k) out.push_back(first + k);
  return out;
}

}  // namespace

ResolvedRho resolve_rho(const RunConfig& config, const CoupledProblem& problem) {
  if (config.rho_mode == RhoMode::One) return {};
  std::mt19937_64 rng(config.seed);
  ResolvedRho r;
  r.c_s = verify_lame_inverse(problem.lame(), config.lame_samples, rng).constant;
  r.c_f = verify_t2_lipschitz(problem.stokes(), config.lipschitz_pairs, rng).constant;
  const double product = r.c_s * r.c_f;
  r.rho = product > 0.0 ? std::min(1.0, 0.5 / product) : 1.0;
  return r;
}

int cmd_run(const Invocation& inv, std::ostream& log) {
  const auto& c = inv.config;
  prepare_output(inv);
  const Workspace ws(c);
  write_mesh_csv(ws.disc.mesh(), c.out);
  const auto problem = make_problem(ws);

  const auto rho = resolve_rho(c, problem);
  {
    CsvWriter csv(c.out / "rho.csv", {"rho_mode", "c_s", "c_f", "rho"});
    csv.row(to_string(c.rho_mode), rho.c_s, rho.c_f, rho.rho);
  }
  auto coupling = c.coupling;
  coupling.rho = rho.rho;
  log << "run: " << to_string(c.preset) << " r=" << c.refinement << " N=" << c.n_steps
      << " law=" << to_string(c.law) << " rho=" << rho.rho << '\n';

  CoupledSolution sol;
  try {
    sol = problem.fixed_point_solve(coupling, ws.disc.zero_trace(TraceRole::Displacement, ws.grid));
  } catch (const IterationFailure& e) {
    write_history(c.out / "history.csv", e.history());
    throw;
  }
  write_history(c.out / "history.csv", sol.history);
  write_trace(c.out / "solution_trace.csv", ws.disc, ws.grid, sol.u_star, "u_x", "u_y");
  write_fluid_iterations(c.out / "fluid_iterations.csv", sol.fluid);
  {
    CsvWriter csv(c.out / "residuals.csv", {"displacement_gap", "traction_gap"});
    csv.row(sol.residuals.displacement_gap, sol.residuals.traction_gap);
  }
  write_eps_study(c.out / "eps_study.csv", problem.epsilon_limit_study(sol));

  const auto& gram = ws.disc.gram();
  auto xn = x_norm(gram, ws.grid, sol.u_star);
  xn.name = "u_star_X";
  write_norms(c.out / "norms.csv",
              {xn,
               {"u_star_L2L2", l2_series_norm(gram, ws.grid, sol.u_star), {}},
               {"traction_L2Hm12", dual_series_norm(gram, ws.grid, sol.traction), {}}});
  if (c.dump_fields) {
    dump_solid(c.out / "fields", ws.disc, sol.solid);
    dump_fluid(c.out / "fields", ws.disc, sol.fluid);
  }
  log << "run: converged, |u*|_X = " << xn.value << ", " << sol.stages.size() << " eps stages, " << sol.history.size()
      << " outer iterations in total\n";
  return kExitOk;
}

int cmd_solid(const Invocation& inv, std::ostream& log) {
  const auto& c = inv.config;
  prepare_output(inv);
  const Workspace ws(c);
  write_mesh_csv(ws.disc.mesh(), c.out);
  const LameSolver lame(ws.disc, c.solid, ws.grid);
  std::mt19937_64 rng(c.seed);
  const auto u = random_displacement_trace(ws.disc, ws.grid, rng);
  const auto state = lame.solve(u);
  const auto g = lame.traction(state);
  write_trace(c.out / "input_trace.csv", ws.disc, ws.grid, u, "u_x", "u_y");
  write_trace(c.out / "traction.csv", ws.disc, ws.grid, g, "g_x", "g_y");
  auto xn = x_norm(ws.disc.gram(), ws.grid, u);
  xn.name = "input_X";
  const double gn = dual_series_norm(ws.disc.gram(), ws.grid, g);
  write_norms(c.out / "norms.csv", {xn, {"traction_L2Hm12", gn, {}}, {"ratio", gn / xn.value, {}}});
  if (c.dump_fields) dump_solid(c.out / "fields", ws.disc, state);
  log << "solid: |T1 u| / |u|_X = " << gn / xn.value << '\n';
  return kExitOk;
}

int cmd_fluid(const Invocation& inv, std::ostream& log) {
  const auto& c = inv.config;
  prepare_output(inv);
  const Workspace ws(c);
  write_mesh_csv(ws.disc.mesh(), c.out);
  const StokesSolver stokes(ws.disc, c.fluid_params(), ws.grid, c.step_options());
  const auto data = make_fluid_data(ws.disc, ws.grid, c.body_force, c.v0);
  std::mt19937_64 rng(c.seed);
  const auto g = random_traction_trace(ws.disc, ws.grid, rng);
  const double eps = c.coupling.eps_schedule.back();
  const auto state = stokes.solve(g, data, eps);
  const auto u = stokes.accumulate_displacement(state);
  write_trace(c.out / "traction_input.csv", ws.disc, ws.grid, g, "g_x", "g_y");
  write_trace(c.out / "displacement.csv", ws.disc, ws.grid, u, "u_x", "u_y");
  write_fluid_iterations(c.out / "fluid_iterations.csv", state);
  auto xn = x_norm(ws.disc.gram(), ws.grid, u);
  xn.name = "displacement_X";
  write_norms(c.out / "norms.csv", {{"traction_L2Hm12", dual_series_norm(ws.disc.gram(), ws.grid, g), {}}, xn});
  if (c.dump_fields) dump_fluid(c.out / "fields", ws.disc, state);
  log << "fluid: eps = " << eps << ", |T2 g|_X = " << xn.value << ", " << state.picard_total()
      << " nonlinear iterations\n";
  return kExitOk;
}

int cmd_verify(const Invocation& inv, std::ostream& log) {
  const auto& c = inv.config;
  prepare_output(inv);
  const auto report = run_full_report(c.verify_config());
  report.write_csv(c.out / "estimate_report.csv");
  for (const auto& r : report.records) {
    log << "verify: " << to_string(r.id) << " r=" << r.refinement << " constant=" << r.constant
        << " pass=" << to_string(r.pass) << '\n';
  }
  return report.all_passed() ? kExitOk : kExitCheckFailed;
}

int cmd_study(const Invocation& inv, std::ostream& log) {
  const auto& c = inv.config;
  prepare_output(inv);
  const auto levels = levels_from(c.refinement, c.study_levels);

  const auto solid = solid_mms_study(levels, c.solid);
  {
    CsvWriter csv(c.out / "mms_solid.csv", {"refinement", "h", "l2_error", "order"});
    for (const auto& r : solid) csv.row(r.refinement, r.h, r.l2_error, r.order);
  }
  const auto fluid = fluid_mms_study(levels, c.step_options());
  {
    CsvWriter csv(c.out / "mms_fluid.csv",
                  {"refinement", "h", "h1_error", "order", "max_divergence", "flux_gap"});
    for (const auto& r : fluid) csv.row(r.refinement, r.h, r.h1_error, r.order, r.max_divergence, r.flux_gap);
  }

  double solid_order = INFINITY, fluid_order = INFINITY, divergence = 0.0;
  for (std::size_t k = 1; k < solid.size(); ++k) solid_order = std::min(solid_order, solid[k].order);
  for (std::size_t k = 1; k < fluid.size(); ++k) fluid_order = std::min(fluid_order, fluid[k].order);
  for (const auto& r : fluid) divergence = std::max(divergence, r.max_divergence);
  const double div_limit = 10 * c.fluid_tol;
  const bool solid_ok = solid_order >= 1.9;
  const bool fluid_ok = fluid_order >= 1.7 && divergence <= div_limit;
  {
    CsvWriter csv(c.out / "orders.csv", {"quantity", "observed", "threshold", "meets"});
    csv.row("solid_l2_order", solid_order, 1.9, solid_ok ? "true" : "false");
    csv.row("fluid_h1_order", fluid_order, 1.7, fluid_order >= 1.7 ? "true" : "false");
    csv.row("fluid_max_divergence", divergence, div_limit, divergence <= div_limit ? "true" : "false");
  }
  log << "study: solid order " << solid_order << ", fluid order " << fluid_order << '\n';

  // eps study on the configured coupled problem.
  const Workspace ws(c);
  const auto problem = make_problem(ws);
  auto coupling = c.coupling;
  coupling.rho = resolve_rho(c, problem).rho;
  CoupledSolution sol;
  try {
    sol = problem.fixed_point_solve(coupling, ws.disc.zero_trace(TraceRole::Displacement, ws.grid));
  } catch (const IterationFailure& e) {
    write_history(c.out / "history.csv", e.history());
    throw;
  }
  write_history(c.out / "history.csv", sol.history);
  const auto rows = problem.epsilon_limit_study(sol);
  write_eps_study(c.out / "eps_study.csv", rows);
  int fit_rows = 0;
  for (const auto& r : rows) fit_rows += r.eps > 0.0 && r.u_distance > 0.0;
  if (fit_rows >= 2) {
    const double slope = eps_slope(rows);
    CsvWriter csv(c.out / "eps_slope.csv", {"law", "u_distance_slope"});
    csv.row(to_string(c.law), slope);
    log << "study: eps slope of the u* distance " << slope << '\n';
  }
  return solid_ok && fluid_ok ? kExitOk : kExitCheckFailed;
}

int run_command(std::string_view name, const Invocation& inv, std::ostream& log, std::ostream& err) {
  try {
    inv.config.validate();
    if (name == "run") return cmd_run(inv, log);
    if (name == "solid") return cmd_solid(inv, log);
    if (name == "fluid") return cmd_fluid(inv, log);
    if (name == "verify") return cmd_verify(inv, log);
    if (name == "study") return cmd_study(inv, log);
    err << "unknown command '" << name << "'\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IterationFailure& e) {
    err << "iteration failure: " << e.what() << '\n';
    return kExitIteration;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const fs::filesystem_error& e) {
    err << "output error: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace fsi
