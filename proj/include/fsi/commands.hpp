#pragma once

#include <iosfwd>
#include <string>
#include <string_view>

#include "fsi/config.hpp"

namespace fsi {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitIteration = 2,
  kExitCheckFailed = 3,  // verify report or study thresholds not met
  kExitNumerical = 4,    // any other library error
};

/// A validated configuration plus the text it was read from; the text is copied
/// verbatim into the output directory as config.cfg.
struct Invocation {
  RunConfig config;
  std::string config_text;
};

/// Each command writes only below config.out and logs progress to `log`.
/// Library errors propagate; run_command maps them to exit codes.
int cmd_run(const Invocation& inv, std::ostream& log);
int cmd_solid(const Invocation& inv, std::ostream& log);
int cmd_fluid(const Invocation& inv, std::ostream& log);
int cmd_verify(const Invocation& inv, std::ostream& log);
int cmd_study(const Invocation& inv, std::ostream& log);

/// Dispatches by name ("run", "solid", "fluid", "verify", "study") and converts
/// exceptions into exit codes with a message on `err`.
int run_command(std::string_view name, const Invocation& inv, std::ostream& log, std::ostream& err);

/// Coupling configuration with rho resolved. For rho_mode = paper this measures
/// C_s and C_f at the run refinement and sets rho = min(1, 0.5 / (C_s C_f)).
struct ResolvedRho {
  double rho = 1.0;
  double c_s = 0.0;  // zero when not measured
  double c_f = 0.0;
};
ResolvedRho resolve_rho(const RunConfig& config, const CoupledProblem& problem);

}  // namespace fsi
