#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "fsi/coupling.hpp"
#include "fsi/verify.hpp"

namespace fsi {

enum class RhoMode { One, Paper };
std::string_view to_string(RhoMode m);

/// Everything a command needs. Parsed from a sectioned key = value file:
///
///   [geometry] preset (required), amplitude = 0, refinement = 1
///   [time]     t_final = 1, n_steps = 16
///   [solid]    mu = 1, lambda = 1
///   [fluid]    law = saturating, kappa = 1, beta = 1, alpha_min = 1, alpha_max = 3,
///              tol = 1e-10, max_it = 500, newton = false
///   [coupling] eps_schedule = 0.1, 0.01, 0.001, 0.0001, omega = 0.7, rho_mode = one,
///              tol_rel = 1e-8, tol_abs = 1e-10, max_outer = 200
///   [data]     body_force = zero, v0 = zero
///   [output]   out = out, dump_fields = false, seed = 1
///   [verify]   levels = 2, poincare_samples = 20, lame_samples = 10,
///              fluid_samples = 6, lipschitz_pairs = 5
///   [study]    levels = 3
///
/// linear uses kappa; saturating uses kappa and beta; time-modulated uses
/// alpha_min, alpha_max and beta. '#' and ';' start comments.
struct RunConfig {
  GeometryPreset preset = GeometryPreset::FlatChannel;
  double amplitude = 0.0;
  int refinement = 1;

  double t_final = 1.0;
  int n_steps = 16;

  SolidParams solid;

  LawId law = LawId::Saturating;
  double kappa = 1.0;
  double beta = 1.0;
  double alpha_min = 1.0;
  double alpha_max = 3.0;
  double fluid_tol = 1e-10;
  int fluid_max_it = 500;
  bool newton = false;

  CouplingConfig coupling;
  RhoMode rho_mode = RhoMode::One;

  std::string body_force = "zero";  // zero | gravity | downward
  std::string v0 = "zero";          // zero | swirl

  std::filesystem::path out = "out";
  bool dump_fields = false;
  std::uint64_t seed = 1;

  int verify_levels = 2;
  int poincare_samples = 20;
  int lame_samples = 10;
  int fluid_samples = 6;
  int lipschitz_pairs = 5;

  int study_levels = 3;

  TimeGrid grid() const { return TimeGrid(t_final, n_steps); }
  DiffusionLaw make_law() const;
  FluidParams fluid_params() const;
  StepOptions step_options() const;
  VerifyConfig verify_config() const;

  /// Re-runs every range check; throws ConfigError naming the violated rule.
  void validate() const;

  bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config(const std::filesystem::path& path);
/// `source` names the input in error messages.
RunConfig parse_config_text(std::string_view text, const std::string& source = "<config>");
/// Full key = value form; parse_config_text(serialize(c)) == c.
std::string serialize(const RunConfig& config);

}  // namespace fsi
