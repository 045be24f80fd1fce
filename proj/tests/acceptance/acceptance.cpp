// Acceptance run: one PASS/FAIL line per criterion. The exit status counts the
// failures that are not listed as known (see kKnownFailures).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include "fsi/commands.hpp"
#include "fsi/problems.hpp"

using namespace fsi;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

struct Criterion {
  std::string name;
  double budget_seconds;
  std::function<Outcome()> run;
};

// Criteria that cannot be met at desk refinements; they still run and print FAIL.
const std::vector<std::string> kKnownFailures{"eps-limit"};

std::string fmt(double x) {
  std::ostringstream s;
  s << std::setprecision(4) << x;
  return s.str();
}

std::vector<std::string> csv_lines(const fs::path& p) {
  std::vector<std::string> out;
  std::ifstream in(p);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream s(line);
  for (std::string f; std::getline(s, f, ',');) out.push_back(f);
  return out;
}

double geometric_factor(const std::vector<double>& r) {
  const int n = static_cast<int>(r.size());
  double sk = 0, sl = 0, skk = 0, skl = 0;
  for (int k = 0; k < n; ++k) {
    const double l = std::log(r[static_cast<std::size_t>(k)]);
    sk += k;
    sl += l;
    skk += k * k;
    skl += k * l;
  }
  return std::exp((n * skl - sk * sl) / (n * skk - sk * sk));
}

// ---------------------------------------------------------------------------

Outcome zero_data(GeometryPreset preset, double amplitude) {
  const auto dir = fs::temp_directory_path() / "fsi_acceptance_zero";
  fs::remove_all(dir);
  std::string text = "[geometry]\npreset = " + std::string(to_string(preset)) + "\namplitude = " + fmt(amplitude) +
                     "\nrefinement = 1\n";
  Invocation inv{parse_config_text(text), text};
  inv.config.out = dir;
  std::ostringstream log, err;
  const int code = run_command("run", inv, log, err);
  if (code != kExitOk) return {false, "exit " + std::to_string(code) + ": " + err.str()};
  int max_k = 0;
  const auto history = csv_lines(dir / "history.csv");
  for (std::size_t i = 1; i < history.size(); ++i) max_k = std::max(max_k, std::stoi(split(history[i])[1]));
  double norm = NAN;
  for (const auto& line : csv_lines(dir / "norms.csv")) {
    const auto f = split(line);
    if (f[0] == "u_star_X") norm = std::stod(f[1]);
  }
  fs::remove_all(dir);
  return {max_k == 1 && norm <= 1e-12, "outer iterations per eps " + std::to_string(max_k) + ", |u*|_X " + fmt(norm)};
}

Outcome solid_mms() {
  const std::vector<int> levels{1, 2, 3};
  const auto rows = solid_mms_study(levels, SolidParams{1.0, 2.0});
  double worst = INFINITY;
  std::string detail = "orders";
  for (std::size_t k = 1; k < rows.size(); ++k) {
    worst = std::min(worst, rows[k].order);
    detail += " " + fmt(rows[k].order);
  }
  return {worst >= 1.9, detail};
}

Outcome fluid_mms() {
  const std::vector<int> levels{1, 2, 3};
  const StepOptions options;
  const auto rows = fluid_mms_study(levels, options);
  double worst = INFINITY, divergence = 0.0;
  std::string detail = "H1 orders";
  for (std::size_t k = 1; k < rows.size(); ++k) {
    worst = std::min(worst, rows[k].order);
    detail += " " + fmt(rows[k].order);
  }
  for (const auto& r : rows) divergence = std::max(divergence, r.max_divergence);
  detail += ", max divergence " + fmt(divergence);
  return {worst >= 1.7 && divergence <= 10 * options.tol, detail};
}

Outcome picard_factor() {
  const Discretization disc(build_geometry(GeometryPreset::FlatChannel, 0.0, 1));
  const FluidOperators ops(disc);
  StepOptions opt;
  opt.tol = 1e-13;
  const TimeGrid grid(1.0, 16);
  const auto law = DiffusionLaw::saturating(1.0, 1.0);
  const StepSolver step(ops, law, grid.dt(), 0.0, opt);
  std::mt19937_64 rng(12);
  const double t = 0.25;
  const Vec body = assemble_body_load(disc.fluid(), [t](double x, double y) {
    return Vec2(20 * std::sin(std::numbers::pi * y) * (1 + t), -20 * std::sin(std::numbers::pi * x) * t);
  });
  const Vec loads = body + ops.neumann_load(5.0 * random_traction_trace(disc, grid, rng)[4]);
  const auto res = step.solve(t, Vec::Zero(ops.velocity_dofs()), loads);
  const double factor = geometric_factor(res.residuals);
  const double bound = std::sqrt(3.0) / 2 + 0.05;
  return {res.residuals.size() >= 8 && factor <= bound,
          "c_m " + fmt(law.c_m()) + ", L " + fmt(law.L()) + ", factor " + fmt(factor) + " over " +
              std::to_string(res.residuals.size()) + " iterations, bound " + fmt(bound)};
}

// Contraction replay: saturating law, downward body force, rho from the measured
// constants at r = 1 so that rho C_s C_f = 0.5, plain iteration (omega = 1).
struct Replay {
  double rho, c_s, c_f;
  CoupledSolution level1, level2;
  double interior_gap[2];  // traction gap restricted to the middle half of the interface
  std::string failure;
};

// Diagnostic only: the mixed no-slip/traction corners carry a stress singularity
// that limits the full-interface gap; away from them the flux converges faster.
double interior_traction_gap(const CoupledProblem& problem, const CoupledSolution& sol) {
  const auto& disc = problem.discretization();
  auto diff = sol.traction - problem.stokes().flux_traction(sol.fluid);
  const auto arc = disc.trace_arclength();
  const double len = disc.interface().arclength.back();
  for (int n = 0; n < diff.levels(); ++n) {
    for (std::size_t i = 0; i < arc.size(); ++i) {
      if (arc[i] < 0.25 * len || arc[i] > 0.75 * len) diff[n][2 * i] = diff[n][2 * i + 1] = 0.0;
    }
  }
  return dual_series_norm(disc.gram(), problem.grid(), diff);
}

Replay contraction_replay(GeometryPreset preset, double amplitude) {
  RunConfig cfg;
  cfg.preset = preset;
  cfg.amplitude = amplitude;
  cfg.refinement = 1;
  cfg.rho_mode = RhoMode::Paper;
  cfg.coupling.omega = 1.0;
  cfg.coupling.tol_rel = 1e-8;
  Replay out{};
  const auto solve = [&](int r, CoupledSolution& sol, bool measure) {
    const Discretization disc(build_geometry(preset, amplitude, r));
    const TimeGrid grid = cfg.grid();
    const CoupledProblem problem(disc, cfg.solid, cfg.fluid_params(), grid,
                                 make_fluid_data(disc, grid, "downward", "zero"), cfg.step_options());
    if (measure) {
      const auto rho = resolve_rho(cfg, problem);
      out.rho = rho.rho;
      out.c_s = rho.c_s;
      out.c_f = rho.c_f;
    }
    auto coupling = cfg.coupling;
    coupling.rho = out.rho;
    sol = problem.fixed_point_solve(coupling, disc.zero_trace(TraceRole::Displacement, grid));
    out.interior_gap[r - 1] = interior_traction_gap(problem, sol);
  };
  try {
    solve(1, out.level1, true);
    solve(2, out.level2, false);
  } catch (const Error& e) {
    out.failure = e.what();
  }
  return out;
}

Outcome contraction(const Replay& rp) {
  if (!rp.failure.empty()) return {false, rp.failure};
  double worst = 0.0;
  int max_k = 0;
  for (const auto& h : rp.level1.history) {
    max_k = std::max(max_k, h.k);
    if (h.k >= 2) worst = std::max(worst, h.contraction);
  }
  return {worst <= 0.6 && max_k <= 30,
          "rho " + fmt(rp.rho) + " (C_s " + fmt(rp.c_s) + ", C_f " + fmt(rp.c_f) + "), product " +
              fmt(rp.rho * rp.c_s * rp.c_f) + ", max factor " + fmt(worst) + ", max iterations per eps " +
              std::to_string(max_k)};
}

Outcome residuals(const Replay& rp) {
  if (!rp.failure.empty()) return {false, rp.failure};
  const double tol_abs = CouplingConfig{}.tol_abs;
  const double gap = rp.level1.residuals.displacement_gap;
  const double t1 = rp.level1.residuals.traction_gap, t2 = rp.level2.residuals.traction_gap;
  return {gap <= 10 * tol_abs && t1 >= 1.5 * t2,
          "displacement gap " + fmt(gap) + " (limit " + fmt(10 * tol_abs) + "), traction gap r1 " + fmt(t1) +
              " r2 " + fmt(t2) + " ratio " + fmt(t1 / t2) + " (middle half of the interface: ratio " +
              fmt(rp.interior_gap[0] / rp.interior_gap[1]) + ")"};
}

Outcome eps_limit() {
  RunConfig cfg;
  cfg.refinement = 1;
  cfg.law = LawId::Linear;
  const Discretization disc(build_geometry(cfg.preset, 0.0, cfg.refinement));
  const TimeGrid grid = cfg.grid();
  const CoupledProblem problem(disc, cfg.solid, cfg.fluid_params(), grid,
                               make_fluid_data(disc, grid, "downward", "zero"), cfg.step_options());
  const auto sol = problem.fixed_point_solve(cfg.coupling, disc.zero_trace(TraceRole::Displacement, grid));
  const auto rows = problem.epsilon_limit_study(sol);
  bool monotone = true;
  std::string detail = "u/grad/energy by eps:";
  for (std::size_t j = 0; j < rows.size(); ++j) {
    detail += " [" + fmt(rows[j].u_distance) + " " + fmt(rows[j].grad_distance) + " " + fmt(rows[j].reg_energy) + "]";
    if (j > 0) {
      monotone = monotone && rows[j].u_distance <= 1.1 * rows[j - 1].u_distance &&
                 rows[j].grad_distance <= 1.1 * rows[j - 1].grad_distance &&
                 rows[j].reg_energy <= 1.1 * rows[j - 1].reg_energy;
    }
  }
  const double slope = eps_slope(rows);
  detail += ", monotone " + std::string(monotone ? "yes" : "no") + ", slope " + fmt(slope) + " (needs 0.8)";
  return {monotone && slope >= 0.8, detail};
}

Outcome poincare() {
  const Discretization disc(build_geometry(GeometryPreset::FlatChannel, 0.0, 1));
  const double T = 1.0;
  const TimeGrid grid(T, 64);
  const Vec w = disc.gram().eigenvectors().col(0);
  TraceSeries mode(TraceRole::Velocity, grid.n_steps() + 1, disc.trace_dofs());
  for (int n = 0; n <= grid.n_steps(); ++n) {
    for (int i = 0; i < w.size(); ++i) mode[n][2 * i] = std::cos(std::numbers::pi * grid.time(n) / (2 * T)) * w[i];
  }
  const double bound = poincare_bound(grid);
  const double extremal = poincare_ratio(disc.gram(), grid, mode);
  std::mt19937_64 rng(1);
  const auto random = verify_poincare_time(disc, grid, 20, rng);
  return {std::abs(extremal / bound - 1) <= 0.05 && random.constant <= 1.1 * bound,
          "extremal/bound " + fmt(extremal / bound) + ", random max/bound " + fmt(random.constant / bound)};
}

Outcome estimate_stability() {
  const auto config = RunConfig{}.verify_config();
  const auto dir = fs::temp_directory_path() / "fsi_acceptance_verify";
  fs::create_directories(dir);
  const auto a = run_full_report(config);
  const auto b = run_full_report(config);
  a.write_csv(dir / "a.csv");
  b.write_csv(dir / "b.csv");
  const bool identical = csv_lines(dir / "a.csv") == csv_lines(dir / "b.csv");
  fs::remove_all(dir);
  std::string detail;
  bool stable = true;
  for (auto id : {EstimateId::LameInverse, EstimateId::T2Lipschitz}) {
    const auto* lo = a.find(id, config.refinements[0]);
    const auto* hi = a.find(id, config.refinements[1]);
    if (!lo || !hi) return {false, "missing " + to_string(id)};
    const double ratio = std::max(lo->constant, hi->constant) / std::min(lo->constant, hi->constant);
    stable = stable && ratio <= 2.0;
    detail += to_string(id) + " " + fmt(lo->constant) + " -> " + fmt(hi->constant) + ", ";
  }
  int failed = 0;
  for (const auto& r : a.records) failed += r.pass == PassState::Fail;
  detail += std::to_string(failed) + " failing records, reproducible " + (identical ? "yes" : "no");
  return {stable && a.all_passed() && identical, detail};
}

}  // namespace

int main() {
  std::optional<Replay> flat, curved;
  const auto flat_replay = [&]() -> const Replay& {
    if (!flat) flat = contraction_replay(GeometryPreset::FlatChannel, 0.0);
    return *flat;
  };
  const auto curved_replay = [&]() -> const Replay& {
    if (!curved) curved = contraction_replay(GeometryPreset::CurvedInterface, 0.1);
    return *curved;
  };

  const std::vector<Criterion> criteria{
      {"zero-data-fixed-point", 10, [] { return zero_data(GeometryPreset::FlatChannel, 0.0); }},
      {"solid-mms", 120, solid_mms},
      {"fluid-mms", 180, fluid_mms},
      {"monotone-step-solver", 60, picard_factor},
      {"contraction-replay", 300, [&] { return contraction(flat_replay()); }},
      {"eps-limit", 600, eps_limit},
      {"poincare-in-time", 60, poincare},
      {"estimate-stability", 300, estimate_stability},
      {"coupling-residuals", 300, [&] { return residuals(flat_replay()); }},
      {"curved-interface-parity", 600,
       [&] {
         const auto z = zero_data(GeometryPreset::CurvedInterface, 0.1);
         const auto c = contraction(curved_replay());
         const auto r = residuals(curved_replay());
         return Outcome{z.pass && c.pass && r.pass,
                        "zero data: " + z.detail + "; contraction: " + c.detail + "; residuals: " + r.detail};
       }},
  };

  int unexpected = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_seconds;
    const bool pass = o.pass && in_time;
    const bool known = std::find(kKnownFailures.begin(), kKnownFailures.end(), c.name) != kKnownFailures.end();
    std::cout << (pass ? "PASS " : "FAIL ") << c.name << ": " << o.detail << " [" << fmt(secs) << " s"
              << (in_time ? "" : ", over budget " + fmt(c.budget_seconds) + " s") << "]"
              << (!pass && known ? " (known failure)" : "") << std::endl;
    unexpected += !pass && !known;
  }
  std::cout << (unexpected == 0 ? "acceptance: no unexpected failures" : "acceptance: unexpected failures")
            << std::endl;
  return unexpected;
}
