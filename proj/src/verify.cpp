#include "fsi/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "fsi/csv.hpp"

namespace fsi {

std::string to_string(EstimateId id) {
  switch (id) {
    case EstimateId::LameInverse: return "LAME_INVERSE";
    case EstimateId::FluidEnergy: return "FLUID_ENERGY";
    case EstimateId::PoincareTime: return "POINCARE_TIME";
    case EstimateId::T2Lipschitz: return "T2_LIPSCHITZ";
    case EstimateId::TepsLipschitz: return "TEPS_LIPSCHITZ";
    case EstimateId::EpsLimit: return "EPS_LIMIT";
    case EstimateId::LawCertification: return "LAW_CERTIFICATION";
  }
  return "?";
}

std::string to_string(PassState p) {
  switch (p) {
    case PassState::Pass: return "true";
    case PassState::Fail: return "false";
    case PassState::NotEvaluated: return "not-evaluated";
  }
  return "?";
}

bool EstimateReport::all_passed() const {
  return std::none_of(records.begin(), records.end(), [](const auto& r) { return r.pass == PassState::Fail; });
}

const EstimateRecord* EstimateReport::find(EstimateId id, int refinement) const {
  for (const auto& r : records) {
    if (r.id == id && r.refinement == refinement) return &r;
  }
  return nullptr;
}

void EstimateReport::write_csv(const std::filesystem::path& path) const {
  CsvWriter csv(path, {"estimate_id", "constant", "samples", "refinement", "pass", "slack"});
  for (const auto& r : records) {
    csv.row(to_string(r.id), r.constant, r.samples, r.refinement, to_string(r.pass), r.slack);
  }
}

namespace {

constexpr double kPi = std::numbers::pi;

// Writes scalar field values of component c into an interleaved trace vector.
void add_component(Vec& trace, int c, const Vec& values, double scale) {
  for (Eigen::Index i = 0; i < values.size(); ++i) trace[2 * i + c] += scale * values[i];
}

struct ModeEnvelope {
  int mode;
  int component;
  double weight;
  std::array<double, 3> coef;
};

std::vector<ModeEnvelope> draw_modes(const InterfaceGram& gram, std::mt19937_64& rng, int modes) {
  std::normal_distribution<double> nd;
  std::vector<ModeEnvelope> out;
  const int m = std::min(modes, gram.size());
  for (int j = 0; j < m; ++j) {
    for (int c = 0; c < 2; ++c) {
      ModeEnvelope e{j, c, nd(rng) / (1.0 + j), {nd(rng), nd(rng), nd(rng)}};
      out.push_back(e);
    }
  }
  return out;
}

// Envelope families: sine family vanishes at t = 0, squared-sine family also has
// zero slope there, cosine family does not vanish.
double sine_envelope(const std::array<double, 3>& c, double t, double T) {
  double e = 0.0;
  for (int m = 0; m < 3; ++m) e += c[static_cast<std::size_t>(m)] * std::sin((2 * m + 1) * kPi * t / (2 * T));
  return e;
}

double squared_sine_envelope(const std::array<double, 3>& c, double t, double T) {
  double e = 0.0;
  for (int m = 0; m < 3; ++m) {
    const double s = std::sin((2 * m + 1) * kPi * t / (4 * T));
    e += c[static_cast<std::size_t>(m)] * s * s;
  }
  return e;
}

enum class Envelope { Sine, SquaredSine, Cosine };

double cosine_envelope(const std::array<double, 3>& c, double t, double T) {
  double e = 0.0;
  for (int m = 0; m < 3; ++m) e += c[static_cast<std::size_t>(m)] * std::cos(m * kPi * t / T);
  return e;
}

TraceSeries modal_series(const Discretization& disc, const TimeGrid& grid, std::mt19937_64& rng, int modes,
                         TraceRole role, Envelope envelope) {
  const InterfaceGram& gram = disc.gram();
  const auto draws = draw_modes(gram, rng, modes);
  TraceSeries out = disc.zero_trace(role, grid);
  const double T = grid.t_final();
  for (int n = 0; n <= grid.n_steps(); ++n) {
    const double t = grid.time(n);
    for (const auto& d : draws) {
      const double e = envelope == Envelope::Sine          ? sine_envelope(d.coef, t, T)
                       : envelope == Envelope::SquaredSine ? squared_sine_envelope(d.coef, t, T)
                                                           : cosine_envelope(d.coef, t, T);
      add_component(out[n], d.component, gram.eigenvectors().col(d.mode), d.weight * e);
    }
  }
  return out;
}

double trapezoid_l2_squared(const InterfaceGram& gram, const TimeGrid& grid, const TraceSeries& s) {
  double sum = 0.0;
  for (int n = 0; n <= grid.n_steps(); ++n) {
    const double w = (n == 0 || n == grid.n_steps()) ? 0.5 : 1.0;
    sum += w * gram.l2_squared(s[n]);
  }
  return grid.dt() * sum;
}

}  // namespace

TraceSeries random_displacement_trace(const Discretization& disc, const TimeGrid& grid, std::mt19937_64& rng,
                                      int modes) {
  return modal_series(disc, grid, rng, modes, TraceRole::Displacement, Envelope::SquaredSine);
}

TraceSeries random_velocity_trace(const Discretization& disc, const TimeGrid& grid, std::mt19937_64& rng,
                                  int modes) {
  return modal_series(disc, grid, rng, modes, TraceRole::Velocity, Envelope::Cosine);
}

TraceSeries random_traction_trace(const Discretization& disc, const TimeGrid& grid, std::mt19937_64& rng,
                                  int modes) {
  TraceSeries field = modal_series(disc, grid, rng, modes, TraceRole::TractionLoad, Envelope::Sine);
  const Eigen::MatrixXd& M = disc.gram().mass();
  const int m = disc.gram().size();
  for (int n = 1; n <= grid.n_steps(); ++n) {
    Vec& g = field[n];
    for (int c = 0; c < 2; ++c) {
      Vec comp(m);
      for (int i = 0; i < m; ++i) comp[i] = g[2 * i + c];
      comp = M * comp;
      for (int i = 0; i < m; ++i) g[2 * i + c] = comp[i];
    }
  }
  field[0].setZero();
  return field;
}

TraceSeries top_mode_trace(const Discretization& disc, const TimeGrid& grid) {
  const InterfaceGram& gram = disc.gram();
  const Vec top = gram.eigenvectors().col(gram.size() - 1);
  TraceSeries out = disc.zero_trace(TraceRole::Displacement, grid);
  for (int n = 1; n <= grid.n_steps(); ++n) {
    const double e = std::sin(kPi * grid.time(n) / (2 * grid.t_final()));
    add_component(out[n], 0, top, e);
    add_component(out[n], 1, top, e);
  }
  return out;
}

TraceSeries integrate_trace(const TimeGrid& grid, const TraceSeries& v) {
  if (v.levels() != grid.n_steps() + 1) throw ShapeError("velocity trace does not match the grid");
  TraceSeries u(TraceRole::Displacement, v.levels(), v.dofs());
  for (int n = 1; n < v.levels(); ++n) u[n] = u[n - 1] + 0.5 * grid.dt() * (v[n - 1] + v[n]);
  return u;
}

double poincare_ratio(const InterfaceGram& gram, const TimeGrid& grid, const TraceSeries& v) {
  const double den = trapezoid_l2_squared(gram, grid, v);
  if (den == 0.0) return 0.0;
  return trapezoid_l2_squared(gram, grid, integrate_trace(grid, v)) / den;
}

double poincare_bound(const TimeGrid& grid) {
  const double c = 2 * grid.t_final() / kPi;
  return c * c;
}

Measurement verify_poincare_time(const Discretization& disc, const TimeGrid& grid, int samples,
                                 std::mt19937_64& rng) {
  if (samples < 20) throw PreconditionError("Poincare check needs at least 20 samples");
  Measurement m;
  for (int k = 0; k < samples; ++k) {
    m.constant = std::max(m.constant, poincare_ratio(disc.gram(), grid, random_velocity_trace(disc, grid, rng)));
    ++m.samples;
  }
  return m;
}

Measurement verify_lame_inverse(const LameSolver& lame, int samples, std::mt19937_64& rng) {
  const Discretization& disc = lame.discretization();
  const TimeGrid& grid = lame.grid();
  Measurement m;
  const auto ratio = [&](const TraceSeries& u) {
    return dual_series_norm(disc.gram(), grid, lame.operator_T1(u)) / x_norm(disc.gram(), grid, u).value;
  };
  for (int k = 0; k < samples; ++k) {
    m.constant = std::max(m.constant, ratio(random_displacement_trace(disc, grid, rng)));
    ++m.samples;
  }
  m.constant = std::max(m.constant, ratio(top_mode_trace(disc, grid)));
  ++m.samples;
  return m;
}

FluidNorms::FluidNorms(const FluidOperators& ops) : ops_(&ops) {
  const auto nf = static_cast<Eigen::Index>(ops.free.size());
  std::vector<int> index(ops.fixed.size(), -1);
  for (std::size_t k = 0; k < ops.free.size(); ++k) index[static_cast<std::size_t>(ops.free[k])] = static_cast<int>(k);
  const SpMat full = ops.laplace + ops.mass;
  std::vector<Eigen::Triplet<double>> t;
  for (int c = 0; c < full.outerSize(); ++c) {
    const int fc = index[static_cast<std::size_t>(c)];
    if (fc < 0) continue;
    for (SpMat::InnerIterator it(full, c); it; ++it) {
      const int fr = index[static_cast<std::size_t>(it.row())];
      if (fr >= 0) t.emplace_back(fr, fc, it.value());
    }
  }
  gram_.resize(nf, nf);
  gram_.setFromTriplets(t.begin(), t.end());
  solver_ = std::make_unique<Eigen::SimplicialLDLT<SpMat>>(gram_);
  if (solver_->info() != Eigen::Success) throw AssemblyError("fluid H1 Gram is not positive definite");
}

Vec FluidNorms::restrict_free(const Vec& v) const {
  Vec out(static_cast<Eigen::Index>(ops_->free.size()));
  for (std::size_t k = 0; k < ops_->free.size(); ++k) out[static_cast<Eigen::Index>(k)] = v[ops_->free[k]];
  return out;
}

double FluidNorms::h1(const Vec& v) const {
  const Vec f = restrict_free(v);
  return std::sqrt(std::max(0.0, f.dot(gram_ * f)));
}

double FluidNorms::dual(const Vec& load) const {
  const Vec f = restrict_free(load);
  return std::sqrt(std::max(0.0, f.dot(solver_->solve(f))));
}

double FluidNorms::energy_lhs(const TimeGrid& grid, const FluidSeries& s) const {
  const double dt = grid.dt();
  double dtv = 0.0, h1v = 0.0;
  for (int n = 1; n < s.levels(); ++n) {
    const auto k = static_cast<std::size_t>(n);
    const double d = dual(ops_->mass * (s.v[k] - s.v[k - 1]) / dt);
    const double h = h1(s.v[k]);
    dtv += dt * d * d;
    h1v += dt * h * h;
  }
  return std::sqrt(dtv) + std::sqrt(h1v);
}

namespace {

std::vector<Vec> random_body_loads(const Discretization& disc, const TimeGrid& grid, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::array<double, 8> a{};
  for (double& x : a) x = nd(rng);
  const std::array<double, 3> env{nd(rng), nd(rng), nd(rng)};
  std::vector<Vec> out;
  for (int n = 0; n <= grid.n_steps(); ++n) {
    const double e = cosine_envelope(env, grid.time(n), grid.t_final());
    out.push_back(assemble_body_load(disc.fluid(), [&](double x, double y) {
      Vec2 f = Vec2::Zero();
      for (int k = 0; k < 2; ++k) {
        for (int l = 0; l < 2; ++l) {
          const double s = std::sin((k + 1) * kPi * x) * std::sin((l + 1) * kPi * y);
          f[0] += a[static_cast<std::size_t>(2 * k + l)] * s;
          f[1] += a[static_cast<std::size_t>(4 + 2 * k + l)] * s;
        }
      }
      return Vec2(e * f);
    }));
  }
  return out;
}

}  // namespace

Measurement verify_fluid_energy(const StokesSolver& stokes, int samples, std::mt19937_64& rng) {
  const FluidOperators& ops = stokes.operators();
  const Discretization& disc = *ops.disc;
  const TimeGrid& grid = stokes.grid();
  const FluidNorms norms(ops);
  Measurement m;
  for (int k = 0; k < samples; ++k) {
    const int kind = k % 3;  // traction only, body force only, everything
    TraceSeries g = disc.zero_trace(TraceRole::TractionLoad, grid);
    FluidData data;
    if (kind != 1) g = random_traction_trace(disc, grid, rng);
    if (kind != 0) data.body_loads = random_body_loads(disc, grid, rng);
    if (kind == 2) {
      const auto load = random_body_loads(disc, grid, rng)[0];
      data.v0 = stokes.step_solver(0.0).precondition(load, Vec::Zero(ops.pressure_dofs())).first;
    }
    double f_norm = 0.0;
    for (int n = 1; n <= grid.n_steps() && !data.body_loads.empty(); ++n) {
      const double d = norms.dual(data.body_loads[static_cast<std::size_t>(n)]);
      f_norm += grid.dt() * d * d;
    }
    const double v0_norm = data.v0.size() ? std::sqrt(data.v0.dot(ops.mass * data.v0)) : 0.0;
    const double rhs = std::sqrt(f_norm) + dual_series_norm(disc.gram(), grid, g) + v0_norm;
    if (rhs == 0.0) continue;
    const FluidSeries s = stokes.solve(g, data, 0.0);
    m.constant = std::max(m.constant, norms.energy_lhs(grid, s) / rhs);
    ++m.samples;
  }
  return m;
}

Measurement verify_t2_lipschitz(const StokesSolver& stokes, int pairs, std::mt19937_64& rng, double eps) {
  const Discretization& disc = *stokes.operators().disc;
  const TimeGrid& grid = stokes.grid();
  Measurement m;
  for (int k = 0; k < pairs; ++k) {
    const TraceSeries g1 = random_traction_trace(disc, grid, rng);
    const TraceSeries g2 = random_traction_trace(disc, grid, rng);
    const double den = dual_series_norm(disc.gram(), grid, g1 - g2);
    if (den == 0.0) continue;
    const TraceSeries du = stokes.operator_T2eps(g1, {}, eps) - stokes.operator_T2eps(g2, {}, eps);
    m.constant = std::max(m.constant, x_norm(disc.gram(), grid, du).value / den);
    ++m.samples;
  }
  return m;
}

std::vector<Measurement> verify_teps_lipschitz(const CoupledProblem& problem, int pairs, std::mt19937_64& rng,
                                               const std::vector<double>& eps_values) {
  const Discretization& disc = problem.discretization();
  const TimeGrid& grid = problem.grid();
  std::vector<std::pair<TraceSeries, TraceSeries>> inputs;
  for (int k = 0; k < pairs; ++k) {
    auto u1 = random_displacement_trace(disc, grid, rng);
    auto u2 = random_displacement_trace(disc, grid, rng);
    inputs.emplace_back(std::move(u1), std::move(u2));
  }
  std::vector<Measurement> out;
  for (double eps : eps_values) {
    Measurement m;
    for (const auto& [u1, u2] : inputs) {
      const double den = x_norm(disc.gram(), grid, u1 - u2).value;
      if (den == 0.0) continue;
      const TraceSeries d = problem.operator_Teps(u1, eps) - problem.operator_Teps(u2, eps);
      m.constant = std::max(m.constant, x_norm(disc.gram(), grid, d).value / den);
      ++m.samples;
    }
    out.push_back(m);
  }
  return out;
}

std::vector<double> eps_limit_gaps(const CoupledProblem& problem, const TraceSeries& u,
                                   const std::vector<double>& eps_values) {
  const Discretization& disc = problem.discretization();
  const TraceSeries g = problem.lame().operator_T1(u);
  const TraceSeries base = problem.stokes().operator_T2eps(g, problem.data(), 0.0);
  std::vector<double> gaps;
  for (double eps : eps_values) {
    const TraceSeries ue = problem.stokes().operator_T2eps(g, problem.data(), eps);
    gaps.push_back(x_norm(disc.gram(), problem.grid(), ue - base).value);
  }
  return gaps;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kGrowthSlack = 1.0;  // constants may grow by 2x per refinement
constexpr double kPoincareSlack = 0.1;
constexpr double kLipschitzSlack = 0.1;
constexpr double kEpsMonotoneSlack = 0.1;

struct LevelResult {
  int refinement;
  Measurement poincare, lame, fluid, t2;
  std::vector<Measurement> teps;
  std::vector<double> gaps;
  bool poincare_ok = false, lame_ok = false, fluid_ok = false, t2_ok = false, teps_ok = false, gaps_ok = false;
};

template <typename F>
bool attempt(F&& f) {
  try {
    f();
    return true;
  } catch (const Error&) {
    return false;
  }
}

LevelResult measure_level(const VerifyConfig& cfg, int r) {
  LevelResult res;
  res.refinement = r;
  const Discretization disc(build_geometry(cfg.preset, cfg.amplitude, r));
  const TimeGrid grid(cfg.t_final, cfg.n_steps);
  const CoupledProblem problem(disc, cfg.solid, cfg.fluid, grid);
  // One independent stream per level so levels do not depend on each other.
  std::mt19937_64 rng(cfg.seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(r + 1));
  res.poincare_ok = attempt([&] { res.poincare = verify_poincare_time(disc, grid, cfg.poincare_samples, rng); });
  res.lame_ok = attempt([&] { res.lame = verify_lame_inverse(problem.lame(), cfg.lame_samples, rng); });
  res.fluid_ok = attempt([&] { res.fluid = verify_fluid_energy(problem.stokes(), cfg.fluid_samples, rng); });
  res.t2_ok = attempt([&] { res.t2 = verify_t2_lipschitz(problem.stokes(), cfg.lipschitz_pairs, rng); });
  res.teps_ok = attempt([&] { res.teps = verify_teps_lipschitz(problem, cfg.lipschitz_pairs, rng, cfg.lipschitz_eps); });
  res.gaps_ok = attempt([&] { res.gaps = eps_limit_gaps(problem, random_displacement_trace(disc, grid, rng), cfg.eps_schedule); });
  return res;
}

PassState to_pass(bool ok) { return ok ? PassState::Pass : PassState::Fail; }

}  // namespace

EstimateReport run_full_report(const VerifyConfig& cfg) {
  if (cfg.refinements.empty() || cfg.refinements.size() > 2) {
    throw ConfigError("verification needs one or two refinement levels");
  }
  EstimateReport report;
  const int r0 = cfg.refinements.front();
  bool certified = true;
  try {
    const auto c = certify_constants(cfg.fluid.law, cfg.certification_samples, cfg.seed);
    report.records.push_back({EstimateId::LawCertification, c.c_m_hat, cfg.certification_samples, r0, PassState::Pass, 0.0});
  } catch (const Error&) {
    certified = false;
    report.records.push_back({EstimateId::LawCertification, kNaN, cfg.certification_samples, r0, PassState::Fail, 0.0});
  }
  if (!certified) {
    // Monotonicity is a precondition of every fluid estimate; nothing else is run.
    for (int r : cfg.refinements) {
      for (EstimateId id : {EstimateId::LameInverse, EstimateId::FluidEnergy, EstimateId::PoincareTime,
                            EstimateId::T2Lipschitz, EstimateId::TepsLipschitz, EstimateId::EpsLimit}) {
        report.records.push_back({id, kNaN, 0, r, PassState::NotEvaluated, 0.0});
      }
    }
    return report;
  }

  std::vector<LevelResult> levels;
  for (int r : cfg.refinements) levels.push_back(measure_level(cfg, r));
  const bool two = levels.size() == 2;

  // Refinement-stability rule for the bounded-operator constants.
  const auto stable = [&](auto member, auto ok) {
    if (!two) return PassState::NotEvaluated;
    const LevelResult& a = levels[0];
    const LevelResult& b = levels[1];
    if (!(a.*ok) || !(b.*ok)) return PassState::Fail;
    const double ca = (a.*member).constant, cb = (b.*member).constant;
    return to_pass(std::isfinite(ca) && std::isfinite(cb) && ca > 0.0 && cb <= (1.0 + kGrowthSlack) * ca);
  };
  const PassState lame_pass = stable(&LevelResult::lame, &LevelResult::lame_ok);
  const PassState fluid_pass = stable(&LevelResult::fluid, &LevelResult::fluid_ok);
  const PassState t2_pass = stable(&LevelResult::t2, &LevelResult::t2_ok);

  for (const LevelResult& L : levels) {
    const int r = L.refinement;
    const auto value = [](bool ok, const Measurement& m) { return ok ? m.constant : kNaN; };
    report.records.push_back({EstimateId::LameInverse, value(L.lame_ok, L.lame), L.lame.samples, r,
                              L.lame_ok ? lame_pass : PassState::Fail, kGrowthSlack});
    report.records.push_back({EstimateId::FluidEnergy, value(L.fluid_ok, L.fluid), L.fluid.samples, r,
                              L.fluid_ok ? fluid_pass : PassState::Fail, kGrowthSlack});
    const double bound = poincare_bound(TimeGrid(cfg.t_final, cfg.n_steps));
    report.records.push_back({EstimateId::PoincareTime, value(L.poincare_ok, L.poincare), L.poincare.samples, r,
                              to_pass(L.poincare_ok && L.poincare.constant <= bound * (1 + kPoincareSlack)),
                              kPoincareSlack});
    report.records.push_back({EstimateId::T2Lipschitz, value(L.t2_ok, L.t2), L.t2.samples, r,
                              L.t2_ok ? t2_pass : PassState::Fail, kGrowthSlack});

    double lip = kNaN;
    bool lip_ok = L.teps_ok && L.lame_ok && L.t2_ok && !L.teps.empty();
    int lip_samples = 0;
    if (lip_ok) {
      double hi = 0.0;
      for (const auto& m : L.teps) {
        hi = std::max(hi, m.constant);
        lip_samples += m.samples;
      }
      lip = hi;
      lip_ok = hi <= L.lame.constant * L.t2.constant * (1 + kLipschitzSlack);
    }
    report.records.push_back({EstimateId::TepsLipschitz, lip, lip_samples, r, to_pass(lip_ok), kLipschitzSlack});

    bool gaps_ok = L.gaps_ok && !L.gaps.empty();
    for (std::size_t k = 1; gaps_ok && k < L.gaps.size(); ++k) {
      gaps_ok = L.gaps[k] <= (1 + kEpsMonotoneSlack) * L.gaps[k - 1];
    }
    report.records.push_back({EstimateId::EpsLimit, L.gaps_ok && !L.gaps.empty() ? L.gaps.back() : kNaN,
                              static_cast<int>(L.gaps.size()), r, to_pass(gaps_ok), kEpsMonotoneSlack});
  }
  return report;
}

}  // namespace fsi
