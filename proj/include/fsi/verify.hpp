#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "fsi/coupling.hpp"

namespace fsi {

enum class EstimateId {
  LameInverse,
  FluidEnergy,
  PoincareTime,
  T2Lipschitz,
  TepsLipschitz,
  EpsLimit,
  LawCertification,
};
std::string to_string(EstimateId id);

enum class PassState { Pass, Fail, NotEvaluated };
std::string to_string(PassState p);

struct EstimateRecord {
  EstimateId id;
  double constant;
  int samples;
  int refinement;
  PassState pass;
  double slack;
};

struct EstimateReport {
  std::vector<EstimateRecord> records;

  bool all_passed() const;
  /// First record with the given id and refinement, or nullptr.
  const EstimateRecord* find(EstimateId id, int refinement) const;
  /// estimate_id,constant,samples,refinement,pass,slack
  void write_csv(const std::filesystem::path& path) const;
};

// ---------------------------------------------------------------------------
// Random inputs. Spatial part: leading interface eigenvectors with decaying
// Gaussian weights; temporal part: random combinations of smooth envelopes.

/// Displacement trace vanishing with its time derivative at t = 0, compatible with
/// a solid starting from rest.
TraceSeries random_displacement_trace(const Discretization& disc, const TimeGrid& grid, std::mt19937_64& rng,
                                      int modes = 6);
/// Velocity trace with arbitrary value at t = 0.
TraceSeries random_velocity_trace(const Discretization& disc, const TimeGrid& grid, std::mt19937_64& rng,
                                  int modes = 6);
/// Traction load (interface mass applied to a random smooth field), zero at level 0.
TraceSeries random_traction_trace(const Discretization& disc, const TimeGrid& grid, std::mt19937_64& rng,
                                  int modes = 6);
/// Highest interface eigenvector in both components, modulated by sin(pi t / 2T).
TraceSeries top_mode_trace(const Discretization& disc, const TimeGrid& grid);

/// Trapezoidal time integral of a velocity trace, starting from zero.
TraceSeries integrate_trace(const TimeGrid& grid, const TraceSeries& v);

// ---------------------------------------------------------------------------
// Individual estimates; each returns the largest observed ratio.

struct Measurement {
  double constant = 0.0;
  int samples = 0;
};

/// int |u|^2 / int |v|^2 in L2(Sigma), trapezoidal in time, u the integral of v.
/// Zero v gives 0.
double poincare_ratio(const InterfaceGram& gram, const TimeGrid& grid, const TraceSeries& v);
/// Sharp constant (2T/pi)^2 for u(0) = 0.
double poincare_bound(const TimeGrid& grid);
Measurement verify_poincare_time(const Discretization& disc, const TimeGrid& grid, int samples,
                                 std::mt19937_64& rng);

/// |T1 u|_{L2(H^-1/2)} / |u|_X over random smooth traces plus the top mode.
Measurement verify_lame_inverse(const LameSolver& lame, int samples, std::mt19937_64& rng);

/// H^1 / H^-1 norms on the fluid velocity space (free dofs).
class FluidNorms {
 public:
  explicit FluidNorms(const FluidOperators& ops);
  double h1(const Vec& v) const;
  /// Dual norm of a load vector against the H^1 Gram.
  double dual(const Vec& load) const;
  /// (|d_t v|_{L2(H^-1)} + |v|_{L2(H^1)}) over levels 1..N.
  double energy_lhs(const TimeGrid& grid, const FluidSeries& s) const;

 private:
  const FluidOperators* ops_;
  SpMat gram_;
  std::unique_ptr<Eigen::SimplicialLDLT<SpMat>> solver_;
  Vec restrict_free(const Vec& v) const;
};

/// Ratio of the energy norms of the solution to the data norms
/// |F|_{L2(H^-1)} + |g|_{L2(H^-1/2)} + |v0|_{L2}.
Measurement verify_fluid_energy(const StokesSolver& stokes, int samples, std::mt19937_64& rng);

/// |T2eps g1 - T2eps g2|_X / |g1 - g2|_{L2(H^-1/2)} over random traction pairs.
Measurement verify_t2_lipschitz(const StokesSolver& stokes, int pairs, std::mt19937_64& rng, double eps = 0.0);

/// |T^eps u1 - T^eps u2|_X / |u1 - u2|_X over random trace pairs, one value per eps.
std::vector<Measurement> verify_teps_lipschitz(const CoupledProblem& problem, int pairs, std::mt19937_64& rng,
                                               const std::vector<double>& eps_values);

/// |T^eps u - T u|_X along a decreasing eps list for one fixed trace.
std::vector<double> eps_limit_gaps(const CoupledProblem& problem, const TraceSeries& u,
                                   const std::vector<double>& eps_values);

// ---------------------------------------------------------------------------

struct VerifyConfig {
  GeometryPreset preset = GeometryPreset::FlatChannel;
  double amplitude = 0.0;
  std::vector<int> refinements{1, 2};  // one or two levels
  double t_final = 1.0;
  int n_steps = 16;
  SolidParams solid;
  FluidParams fluid;
  std::uint64_t seed = 1;
  int poincare_samples = 20;
  int lame_samples = 10;
  int fluid_samples = 6;
  int lipschitz_pairs = 5;
  int certification_samples = 10000;
  std::vector<double> lipschitz_eps{1e-2, 1e-4};
  std::vector<double> eps_schedule{1e-1, 1e-2, 1e-3, 1e-4};
};

/// Runs every verifier; failures of individual verifiers are recorded, never thrown.
EstimateReport run_full_report(const VerifyConfig& config);

}  // namespace fsi
