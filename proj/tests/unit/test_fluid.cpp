#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include "fsi/errors.hpp"
#include "fsi/fluid.hpp"
#include "fsi/norms.hpp"
#include "test_support.hpp"

using namespace fsi;
using fsi::testing::random_traction;

namespace {

// Body loads of a smooth non-gradient field, scaled by a time envelope.
std::vector<Vec> swirl_loads(const Discretization& disc, const TimeGrid& grid, double scale) {
  std::vector<Vec> out;
  for (int n = 0; n <= grid.n_steps(); ++n) {
    const double t = grid.time(n);
    out.push_back(assemble_body_load(disc.fluid(), [=](double x, double y) {
      return Vec2(scale * std::sin(M_PI * y) * (1 + t), -scale * std::sin(M_PI * x) * t);
    }));
  }
  return out;
}

// Direct oracle for one linear step: Dirichlet rows replaced by identity rows.
Vec direct_linear_step(const FluidOperators& ops, double dt, double kappa, const Vec& v_prev,
                       const Vec& loads) {
  const int nv = ops.velocity_dofs(), np = ops.pressure_dofs();
  const SpMat A = ops.mass / dt + ops.viscous + kappa * ops.laplace;
  std::vector<Eigen::Triplet<double>> t;
  for (int c = 0; c < A.outerSize(); ++c)
    for (SpMat::InnerIterator it(A, c); it; ++it)
      if (!ops.fixed[it.row()]) t.emplace_back(it.row(), it.col(), it.value());
  for (int q = 0; q < ops.divergence.outerSize(); ++q)
    for (SpMat::InnerIterator it(ops.divergence, q); it; ++it) {
      if (!ops.fixed[it.row()]) t.emplace_back(it.row(), nv + q, it.value());
      t.emplace_back(nv + q, it.row(), it.value());
    }
  for (int i = 0; i < nv; ++i)
    if (ops.fixed[i]) t.emplace_back(i, i, 1.0);
  SpMat K(nv + np, nv + np);
  K.setFromTriplets(t.begin(), t.end());
  Vec b = Vec::Zero(nv + np);
  b.head(nv) = loads + ops.mass * v_prev / dt;
  for (int i = 0; i < nv; ++i)
    if (ops.fixed[i]) b[i] = 0.0;
  Eigen::SparseLU<SpMat> lu(K);
  return lu.solve(b).head(nv);
}

double geometric_factor(const std::vector<double>& r) {
  // Least-squares slope of log r_k against k.
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

}  // namespace

TEST_CASE("fluid operator properties") {
  const Discretization disc(build_geometry(GeometryPreset::CurvedInterface, 0.1, 1));
  const FluidOperators ops(disc);
  const SpMat Rt = ops.hessian.transpose();
  CHECK((Rt - ops.hessian).norm() <= 1e-12 * ops.hessian.norm());
  const Vec affine = disc.fluid().interpolate([](double x, double y) { return Vec2(x - 2 * y, 0.5 + y); });
  CHECK((ops.hessian * affine).norm() <= 1e-10 * ops.hessian.norm() * affine.norm());
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 5; ++k) {
    const Vec v = Vec::NullaryExpr(ops.velocity_dofs(), [&] { return nd(rng); });
    CHECK(v.dot(ops.hessian * v) >= -1e-10 * ops.hessian.norm() * v.squaredNorm());
    CHECK(v.dot(ops.viscous * v) >= -1e-12 * ops.viscous.norm() * v.squaredNorm());
  }
}

TEST_CASE("Taylor-Hood inf-sup constant is mesh stable") {
  std::vector<double> betas;
  for (int r = 0; r <= 2; ++r) {
    const Discretization disc(build_geometry(GeometryPreset::FlatChannel, 0.0, r));
    const FluidOperators ops(disc);
    const int nf = static_cast<int>(ops.free.size());
    Eigen::MatrixXd A(nf, nf), B(nf, ops.pressure_dofs());
    const Eigen::MatrixXd Afull = Eigen::MatrixXd(ops.laplace + ops.mass);
    const Eigen::MatrixXd Bfull = Eigen::MatrixXd(ops.divergence);
    for (int i = 0; i < nf; ++i) {
      B.row(i) = Bfull.row(ops.free[i]);
      for (int j = 0; j < nf; ++j) A(i, j) = Afull(ops.free[i], ops.free[j]);
    }
    const Eigen::MatrixXd S = B.transpose() * A.llt().solve(B);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::MatrixXd(ops.pressure_mass));
    betas.push_back(std::sqrt(es.eigenvalues()[0]));
  }
  for (std::size_t k = 1; k < betas.size(); ++k) {
    CAPTURE(betas[k - 1]);
    CAPTURE(betas[k]);
    CHECK(betas[k] >= 0.9 * betas[k - 1]);
  }
}

TEST_CASE("step solver basics") {
  const Discretization disc(build_geometry(GeometryPreset::FlatChannel, 0.0, 1));
  const FluidOperators ops(disc);
  const int nv = ops.velocity_dofs();
  const Vec zero = Vec::Zero(nv);

  SUBCASE("zero data") {
    const StepSolver step(ops, DiffusionLaw::saturating(1.0, 1.0), 0.1, 0.0);
    const auto res = step.solve(0.1, zero, zero);
    CHECK(res.v.norm() == 0.0);
    CHECK(res.p.norm() == 0.0);
    CHECK(res.iterations == 1);
  }
  SUBCASE("linear law converges in one iteration to the direct solve") {
    std::mt19937_64 rng(4);
    const TimeGrid grid(1.0, 4);
    const Vec loads = swirl_loads(disc, grid, 3.0)[2] + ops.neumann_load(random_traction(disc, grid, rng)[2]);
    const Vec v_prev = direct_linear_step(ops, 0.25, 1.0, zero, swirl_loads(disc, grid, 1.0)[1]);
    const StepSolver step(ops, DiffusionLaw::linear(1.0), 0.25, 0.0);
    const auto res = step.solve(0.5, v_prev, loads);
    CHECK(res.iterations == 1);
    const Vec oracle = direct_linear_step(ops, 0.25, 1.0, v_prev, loads);
    CHECK((res.v - oracle).cwiseAbs().maxCoeff() <= 1e-10);
  }
  SUBCASE("iteration cap raises a divergence error with the last residual") {
    StepOptions opt;
    opt.max_it = 2;
    opt.tol = 1e-14;
    const StepSolver step(ops, DiffusionLaw::saturating(1.0, 1.0), 0.1, 0.0, opt);
    const TimeGrid grid(1.0, 4);
    const auto loads = swirl_loads(disc, grid, 20.0)[1];
    try {
      step.solve(0.25, zero, loads);
      FAIL("expected divergence error");
    } catch (const NonlinearDivergenceError& e) {
      CHECK(e.last_residual() > 0.0);
    }
  }
}

TEST_CASE("saturating law Picard residuals decay within the Zarantonello bound") {
  const Discretization disc(build_geometry(GeometryPreset::FlatChannel, 0.0, 1));
  const FluidOperators ops(disc);
  StepOptions opt;
  opt.tol = 1e-13;
  const StepSolver step(ops, DiffusionLaw::saturating(1.0, 1.0), 1.0 / 16, 0.0, opt);
  CHECK(step.damping() == doctest::Approx(0.25));
  const TimeGrid grid(1.0, 16);
  std::mt19937_64 rng(12);
  const Vec loads = swirl_loads(disc, grid, 20.0)[4] + ops.neumann_load(random_traction(disc, grid, rng, 5.0)[4]);
  const auto res = step.solve(0.25, Vec::Zero(ops.velocity_dofs()), loads);
  REQUIRE(res.residuals.size() >= 8);
  const double factor = geometric_factor(res.residuals);
  CAPTURE(factor);
  CAPTURE(res.iterations);
  CHECK(factor <= std::sqrt(3.0) / 2 + 0.05);
}

TEST_CASE("newton and picard agree") {
  const Discretization disc(build_geometry(GeometryPreset::CurvedInterface, 0.1, 1));
  const FluidOperators ops(disc);
  const TimeGrid grid(1.0, 8);
  const Vec loads = swirl_loads(disc, grid, 10.0)[3];
  StepOptions picard, newton;
  picard.tol = newton.tol = 1e-12;
  newton.newton = true;
  const auto law = DiffusionLaw::saturating(1.0, 1.0);
  const auto a = StepSolver(ops, law, 0.125, 1e-2, picard).solve(0.375, Vec::Zero(ops.velocity_dofs()), loads);
  const auto b = StepSolver(ops, law, 0.125, 1e-2, newton).solve(0.375, Vec::Zero(ops.velocity_dofs()), loads);
  CHECK(b.iterations < a.iterations);
  CHECK((a.v - b.v).norm() <= 1e-9 * a.v.norm());
  CHECK((a.p - b.p).norm() <= 1e-8 * a.p.norm());
}

TEST_CASE("converged step minimizes the convex step functional") {
  const Discretization disc(build_geometry(GeometryPreset::FlatChannel, 0.0, 1));
  const FluidOperators ops(disc);
  const TimeGrid grid(1.0, 8);
  StepOptions opt;
  opt.tol = 1e-13;
  const StepSolver step(ops, DiffusionLaw::saturating(1.0, 1.0), 0.125, 1e-3, opt);
  std::mt19937_64 rng(21);
  const Vec loads = swirl_loads(disc, grid, 8.0)[2] + ops.neumann_load(random_traction(disc, grid, rng)[2]);
  const Vec v_prev = Vec::Zero(ops.velocity_dofs());
  const auto res = step.solve(0.25, v_prev, loads);
  const double j0 = step.functional(0.25, v_prev, loads, res.v);
  std::normal_distribution<double> nd;
  for (int k = 0; k < 10; ++k) {
    // Random discretely divergence-free direction through the saddle solve.
    const Vec rhs = Vec::NullaryExpr(ops.velocity_dofs(), [&] { return nd(rng); });
    Vec d = step.precondition(rhs, Vec::Zero(ops.pressure_dofs())).first;
    CHECK((ops.divergence.transpose() * d).norm() <= 1e-10 * d.norm());
    d *= 1e-4 / d.norm();
    CHECK(step.functional(0.25, v_prev, loads, res.v + d) >= j0 - 1e-10);
    CHECK(step.functional(0.25, v_prev, loads, res.v - d) >= j0 - 1e-10);
  }
}

TEST_CASE("sweep: zero data, energy inequality and divergence") {
  const Discretization disc(build_geometry(GeometryPreset::CurvedInterface, 0.1, 1));
  const TimeGrid grid(1.0, 8);
  FluidParams params;
  params.law = DiffusionLaw::saturating(1.0, 1.0);
  const StokesSolver solver(disc, params, grid);
  const auto zero = solver.solve(disc.zero_trace(TraceRole::TractionLoad, grid), {}, 0.0);
  for (const auto& v : zero.v) CHECK(v.norm() == 0.0);
  CHECK(solver.operator_T2eps(disc.zero_trace(TraceRole::TractionLoad, grid), {}, 1e-2).max_abs() == 0.0);

  std::mt19937_64 rng(5);
  const auto g = random_traction(disc, grid, rng, 3.0);
  FluidData data;
  data.body_loads = swirl_loads(disc, grid, 4.0);
  const auto& ops = solver.operators();
  for (double eps : {0.0, 1e-2}) {
    const auto state = solver.solve(g, data, eps);
    for (int n = 1; n <= grid.n_steps(); ++n) {
      const auto k = static_cast<std::size_t>(n);
      const Vec& v = state.v[k];
      const Vec& vp = state.v[k - 1];
      const double dt = grid.dt();
      const double lhs = 0.5 * v.dot(ops.mass * v) + dt * params.law.c_m() * v.dot(ops.laplace * v) +
                         dt * v.dot(ops.viscous * v);
      const Vec f = ops.neumann_load(g[n]) + data.body_loads[k];
      const double rhs = 0.5 * vp.dot(ops.mass * vp) + dt * f.dot(v);
      CHECK(lhs <= rhs + 1e-8 * std::abs(rhs));
      CHECK((ops.divergence.transpose() * v).norm() <= 10 * 1e-10 * (1 + v.norm()));
    }
  }
}

TEST_CASE("displacement accumulation is trapezoidal") {
  const Discretization disc(build_geometry(GeometryPreset::FlatChannel, 0.0, 0));
  const TimeGrid grid(2.0, 5);
  const int nv = disc.fluid().vector_dofs();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  const Vec w = Vec::NullaryExpr(nv, [&] { return nd(rng); });
  FluidSeries zero, constant, ramp;
  for (int n = 0; n <= 5; ++n) {
    zero.v.push_back(Vec::Zero(nv));
    constant.v.push_back(w);
    ramp.v.push_back(grid.time(n) * w);
  }
  CHECK(accumulate_displacement(disc, grid, zero).max_abs() == 0.0);
  const auto uc = accumulate_displacement(disc, grid, constant);
  const Vec wt = disc.restrict(Side::Fluid, w);
  for (int n = 0; n <= 5; ++n) CHECK((uc[n] - grid.time(n) * wt).norm() <= 1e-14 * (1 + wt.norm()));
  const auto ur = accumulate_displacement(disc, grid, ramp);
  CHECK((ur[5] - 0.5 * 4.0 * wt).norm() <= 1e-13 * wt.norm());
}

TEST_CASE("manufactured quasi-linear Stokes solution converges in H1") {
  // v = t curl(sin^2(pi x) (1-y)^2), p = t cos(pi x) y, linear law kappa = 1.
  const double pi = M_PI;
  const auto vel = [pi](double t) {
    return [=](double x, double y) {
      return Vec2(2 * t * (y - 1) * std::pow(std::sin(pi * x), 2),
                  -pi * t * (y - 1) * (y - 1) * std::sin(2 * pi * x));
    };
  };
  const auto grad = [pi](double t, double x, double y) {
    Mat2 G;
    G << 2 * pi * t * (y - 1) * std::sin(2 * pi * x), 2 * t * std::pow(std::sin(pi * x), 2),
        -2 * pi * pi * t * (y - 1) * (y - 1) * std::cos(2 * pi * x), 2 * pi * t * (1 - y) * std::sin(2 * pi * x);
    return G;
  };
  const auto force = [pi](double t) {
    return [=](double x, double y) {
      const double s = std::sin(pi * x), c = std::cos(pi * x);
      const double fx = -pi * t * y * s + 6 * pi * pi * t * (y - 1) * s * s -
                        6 * pi * pi * t * (y - 1) * c * c + (2 * y - 2) * s * s;
      const double fy = -(12 * pi * pi * pi * t * (y - 1) * (y - 1) * s - 6 * pi * t * s - t +
                          2 * pi * (y - 1) * (y - 1) * s) * c;
      return Vec2(fx, fy);
    };
  };
  std::vector<double> errors, hs, flux_gaps;
  for (int r = 1; r <= 3; ++r) {
    const Discretization disc(build_geometry(GeometryPreset::FlatChannel, 0.0, r));
    const int n = kBaseResolution << r;
    const TimeGrid grid(1.0, n);
    FluidParams params;
    params.law = DiffusionLaw::linear(1.0);
    const StokesSolver solver(disc, params, grid);
    FluidData data;
    auto g = disc.zero_trace(TraceRole::TractionLoad, grid);
    for (int k = 0; k <= n; ++k) {
      const double t = grid.time(k);
      data.body_loads.push_back(assemble_body_load(disc.fluid(), force(t)));
      const Vec load = assemble_interface_traction(
          disc.interface(), disc.fluid(), Side::Fluid, [&](double x, double y, const Vec2& nrm) {
            const Mat2 G = grad(t, x, y);
            const Mat2 S = G + 0.5 * (G + G.transpose()) - t * std::cos(pi * x) * y * Mat2::Identity();
            return Vec2(S * nrm);
          });
      g[k] = disc.restrict(Side::Fluid, load);
    }
    const auto state = solver.solve(g, data, 0.0);
    const auto consistent = solver.consistent_traction(state, data);
    const auto flux = solver.flux_traction(state);
    double flux_gap = 0.0;
    for (int k = 1; k <= n; ++k) {
      CHECK((consistent[k] - g[k]).norm() <= 1e-8 * (1 + g[k].norm()));
      flux_gap = std::max(flux_gap, dual_half_norm(disc.gram(), flux[k] - g[k]));
    }
    flux_gaps.push_back(flux_gap);
    for (int k = 1; k <= n; ++k) {
      CHECK((solver.operators().divergence.transpose() * state.v[k]).norm() <= 10 * 1e-10);
    }
    errors.push_back(h1_seminorm_error(disc.fluid(), state.v.back(),
                                       [&](double x, double y) { return grad(1.0, x, y); }));
    hs.push_back(disc.mesh().h());
    CHECK(l2_error(disc.fluid(), state.v.back(), vel(1.0)) <= errors.back());
  }
  for (std::size_t k = 1; k < errors.size(); ++k) {
    const double order = std::log(errors[k - 1] / errors[k]) / std::log(hs[k - 1] / hs[k]);
    CAPTURE(errors[k - 1]);
    CAPTURE(errors[k]);
    CHECK(order >= 1.7);
    CAPTURE(flux_gaps[k - 1]);
    CAPTURE(flux_gaps[k]);
    CHECK(flux_gaps[k] * 1.5 <= flux_gaps[k - 1]);
  }
}

TEST_CASE("regularization effects shrink with eps") {
  const Discretization disc(build_geometry(GeometryPreset::FlatChannel, 0.0, 1));
  const TimeGrid grid(1.0, 8);
  FluidParams params;
  params.law = DiffusionLaw::saturating(1.0, 1.0);
  const StokesSolver solver(disc, params, grid);
  const auto g = disc.zero_trace(TraceRole::TractionLoad, grid);
  FluidData data;
  data.body_loads = swirl_loads(disc, grid, 10.0);
  const auto base = solver.operator_T2eps(g, data, 0.0);
  // The broken second-derivative energy peaks near eps ~ h^2, where the
  // regularization stops suppressing element-scale modes; beyond it the energy is
  // O(eps). The X-gap to the unregularized trace decreases throughout.
  std::vector<double> gaps, energies;
  const std::vector<double> schedule{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  for (double eps : schedule) {
    const auto state = solver.solve(g, data, eps);
    double energy = 0.0;
    for (int n = 1; n <= grid.n_steps(); ++n) {
      const auto& v = state.v[static_cast<std::size_t>(n)];
      energy += grid.dt() * eps * v.dot(solver.operators().hessian * v);
    }
    gaps.push_back(x_norm(disc.gram(), grid, solver.accumulate_displacement(state) - base).value);
    energies.push_back(energy);
  }
  for (std::size_t k = 1; k < schedule.size(); ++k) {
    CAPTURE(schedule[k]);
    CHECK(gaps[k] < gaps[k - 1]);
    if (schedule[k] <= 1e-3) CHECK(energies[k] <= 1.05 * energies[k - 1]);
  }
  // Asymptotically linear in eps.
  CHECK(energies[5] / energies[4] == doctest::Approx(0.1).epsilon(0.5));
  CHECK(energies[5] <= 1e-2 * *std::max_element(energies.begin(), energies.end()));
}

TEST_CASE("fluid rejects malformed inputs") {
  const Discretization disc(build_geometry(GeometryPreset::FlatChannel, 0.0, 0));
  const TimeGrid grid(1.0, 4);
  const StokesSolver solver(disc, FluidParams{}, grid);
  CHECK_THROWS_AS(solver.solve(disc.zero_trace(TraceRole::Displacement, grid), {}, 0.0), PreconditionError);
  const TraceSeries short_g(TraceRole::TractionLoad, 3, disc.trace_dofs());
  CHECK_THROWS_AS(solver.solve(short_g, {}, 0.0), ShapeError);
  FluidData bad;
  bad.v0 = Vec::Zero(3);
  CHECK_THROWS_AS(solver.solve(disc.zero_trace(TraceRole::TractionLoad, grid), bad, 0.0), ShapeError);
}
