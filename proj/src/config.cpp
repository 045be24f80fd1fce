#include "fsi/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace fsi {

std::string_view to_string(RhoMode m) { return m == RhoMode::One ? "one" : "paper"; }

DiffusionLaw RunConfig::make_law() const {
  switch (law) {
    case LawId::Linear: return DiffusionLaw::linear(kappa, t_final);
    case LawId::Saturating: return DiffusionLaw::saturating(kappa, beta, t_final);
    case LawId::TimeModulated: return DiffusionLaw::time_modulated(alpha_min, alpha_max, beta, t_final);
  }
  throw ConfigError("unknown law");
}

FluidParams RunConfig::fluid_params() const {
  FluidParams p;
  p.law = make_law();
  return p;
}

StepOptions RunConfig::step_options() const {
  StepOptions o;
  o.tol = fluid_tol;
  o.max_it = fluid_max_it;
  o.newton = newton;
  return o;
}

VerifyConfig RunConfig::verify_config() const {
  VerifyConfig v;
  v.preset = preset;
  v.amplitude = amplitude;
  v.refinements.clear();
  for (int k = 0; k < verify_levels; ++k) v.refinements.push_back(refinement + k);
  v.t_final = t_final;
  v.n_steps = n_steps;
  v.solid = solid;
  v.fluid = fluid_params();
  v.seed = seed;
  v.poincare_samples = poincare_samples;
  v.lame_samples = lame_samples;
  v.fluid_samples = fluid_samples;
  v.lipschitz_pairs = lipschitz_pairs;
  v.eps_schedule = coupling.eps_schedule;
  return v;
}

void RunConfig::validate() const {
  if (refinement < 0 || refinement > kMaxRefinement) {
    throw ConfigError("geometry.refinement must lie in [0, " + std::to_string(kMaxRefinement) + "]");
  }
  if (!(amplitude >= 0.0 && amplitude < 0.25)) throw ConfigError("geometry.amplitude must lie in [0, 0.25)");
  if (!(t_final > 0.0)) throw ConfigError("time.t_final must be positive");
  if (n_steps < 1) throw ConfigError("time.n_steps must be positive");
  solid.validate();
  (void)make_law();
  if (!(fluid_tol > 0.0) || fluid_max_it < 1) throw ConfigError("fluid.tol must be positive and fluid.max_it >= 1");
  coupling.validate();
  if (body_force != "zero" && body_force != "gravity" && body_force != "downward") {
    throw ConfigError("data.body_force must be zero, gravity or downward");
  }
  if (v0 != "zero" && v0 != "swirl") throw ConfigError("data.v0 must be zero or swirl");
  if (out.empty()) throw ConfigError("output.out must not be empty");
  if (verify_levels < 1 || verify_levels > 2) throw ConfigError("verify.levels must be 1 or 2");
  if (refinement + verify_levels - 1 > kMaxRefinement) throw ConfigError("verify levels exceed the refinement range");
  if (poincare_samples < 20) throw ConfigError("verify.poincare_samples must be at least 20");
  if (lame_samples < 1 || fluid_samples < 1 || lipschitz_pairs < 1) {
    throw ConfigError("verify sample counts must be positive");
  }
  if (study_levels < 2 || refinement + study_levels - 1 > kMaxRefinement) {
    throw ConfigError("study.levels must be >= 2 and stay within the refinement range");
  }
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& v) {
  double x = 0.0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end) throw ConfigError("'" + v + "' is not a number");
  return x;
}

long long to_integer(const std::string& v) {
  long long x = 0;
  const auto* end = v.data() + v.size();
  const auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end) throw ConfigError("'" + v + "' is not an integer");
  return x;
}

int to_int(const std::string& v) {
  const long long x = to_integer(v);
  if (x < -1000000000LL || x > 1000000000LL) throw ConfigError("'" + v + "' is out of range");
  return static_cast<int>(x);
}

bool to_bool(const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError("'" + v + "' is not true or false");
}

std::vector<double> to_list(const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(trim(item)));
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"geometry.preset", [](RunConfig& c, const std::string& v) { c.preset = parse_geometry_preset(v); }},
      {"geometry.amplitude", [](RunConfig& c, const std::string& v) { c.amplitude = to_double(v); }},
      {"geometry.refinement", [](RunConfig& c, const std::string& v) { c.refinement = to_int(v); }},
      {"time.t_final", [](RunConfig& c, const std::string& v) { c.t_final = to_double(v); }},
      {"time.n_steps", [](RunConfig& c, const std::string& v) { c.n_steps = to_int(v); }},
      {"solid.mu", [](RunConfig& c, const std::string& v) { c.solid.mu = to_double(v); }},
      {"solid.lambda", [](RunConfig& c, const std::string& v) { c.solid.lambda = to_double(v); }},
      {"fluid.law", [](RunConfig& c, const std::string& v) { c.law = parse_law_id(v); }},
      {"fluid.kappa", [](RunConfig& c, const std::string& v) { c.kappa = to_double(v); }},
      {"fluid.beta", [](RunConfig& c, const std::string& v) { c.beta = to_double(v); }},
      {"fluid.alpha_min", [](RunConfig& c, const std::string& v) { c.alpha_min = to_double(v); }},
      {"fluid.alpha_max", [](RunConfig& c, const std::string& v) { c.alpha_max = to_double(v); }},
      {"fluid.tol", [](RunConfig& c, const std::string& v) { c.fluid_tol = to_double(v); }},
      {"fluid.max_it", [](RunConfig& c, const std::string& v) { c.fluid_max_it = to_int(v); }},
      {"fluid.newton", [](RunConfig& c, const std::string& v) { c.newton = to_bool(v); }},
      {"coupling.eps_schedule", [](RunConfig& c, const std::string& v) { c.coupling.eps_schedule = to_list(v); }},
      {"coupling.omega", [](RunConfig& c, const std::string& v) { c.coupling.omega = to_double(v); }},
      {"coupling.rho_mode",
       [](RunConfig& c, const std::string& v) {
         if (v == "one") {
           c.rho_mode = RhoMode::One;
         } else if (v == "paper") {
           c.rho_mode = RhoMode::Paper;
         } else {
           throw ConfigError("'" + v + "' is not one or paper");
         }
       }},
      {"coupling.tol_rel", [](RunConfig& c, const std::string& v) { c.coupling.tol_rel = to_double(v); }},
      {"coupling.tol_abs", [](RunConfig& c, const std::string& v) { c.coupling.tol_abs = to_double(v); }},
      {"coupling.max_outer", [](RunConfig& c, const std::string& v) { c.coupling.max_outer = to_int(v); }},
      {"data.body_force", [](RunConfig& c, const std::string& v) { c.body_force = v; }},
      {"data.v0", [](RunConfig& c, const std::string& v) { c.v0 = v; }},
      {"output.out", [](RunConfig& c, const std::string& v) { c.out = v; }},
      {"output.dump_fields", [](RunConfig& c, const std::string& v) { c.dump_fields = to_bool(v); }},
      {"output.seed",
       [](RunConfig& c, const std::string& v) {
         const long long s = to_integer(v);
         if (s < 0) throw ConfigError("seed must be nonnegative");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"verify.levels", [](RunConfig& c, const std::string& v) { c.verify_levels = to_int(v); }},
      {"verify.poincare_samples", [](RunConfig& c, const std::string& v) { c.poincare_samples = to_int(v); }},
      {"verify.lame_samples", [](RunConfig& c, const std::string& v) { c.lame_samples = to_int(v); }},
      {"verify.fluid_samples", [](RunConfig& c, const std::string& v) { c.fluid_samples = to_int(v); }},
      {"verify.lipschitz_pairs", [](RunConfig& c, const std::string& v) { c.lipschitz_pairs = to_int(v); }},
      {"study.levels", [](RunConfig& c, const std::string& v) { c.study_levels = to_int(v); }},
  };
  return table;
}

std::string fmt(double x) {
  std::ostringstream s;
  s.imbue(std::locale::classic());
  s.precision(17);
  s << x;
  return s.str();
}

}  // namespace

RunConfig parse_config_text(std::string_view text, const std::string& source) {
  RunConfig c;
  std::set<std::string> seen;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto where = source + ":" + std::to_string(line_no) + ": ";
    std::string line = raw.substr(0, raw.find_first_of("#;"));
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "malformed section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string name = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (section.empty()) throw ConfigError(where + "key '" + name + "' outside any section");
    const std::string key = section + "." + name;
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(where + "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(where + "duplicate key '" + key + "'");
    try {
      it->second(c, value);
    } catch (const Error& e) {
      throw ConfigError(where + key + ": " + e.what());
    }
  }
  if (!seen.count("geometry.preset")) {
    throw ConfigError(source + ": missing required key 'geometry.preset'; every other key has a default:\n" +
                      serialize(RunConfig{}));
  }
  try {
    c.validate();
  } catch (const Error& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return c;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

std::string serialize(const RunConfig& c) {
  std::ostringstream s;
  s << "[geometry]\n"
    << "preset = " << to_string(c.preset) << "\n"
    << "amplitude = " << fmt(c.amplitude) << "\n"
    << "refinement = " << c.refinement << "\n\n"
    << "[time]\n"
    << "t_final = " << fmt(c.t_final) << "\n"
    << "n_steps = " << c.n_steps << "\n\n"
    << "[solid]\n"
    << "mu = " << fmt(c.solid.mu) << "\n"
    << "lambda = " << fmt(c.solid.lambda) << "\n\n"
    << "[fluid]\n"
    << "law = " << to_string(c.law) << "\n"
    << "kappa = " << fmt(c.kappa) << "\n"
    << "beta = " << fmt(c.beta) << "\n"
    << "alpha_min = " << fmt(c.alpha_min) << "\n"
    << "alpha_max = " << fmt(c.alpha_max) << "\n"
    << "tol = " << fmt(c.fluid_tol) << "\n"
    << "max_it = " << c.fluid_max_it << "\n"
    << "newton = " << (c.newton ? "true" : "false") << "\n\n"
    << "[coupling]\n"
    << "eps_schedule = ";
  for (std::size_t k = 0; k < c.coupling.eps_schedule.size(); ++k) {
    s << (k ? ", " : "") << fmt(c.coupling.eps_schedule[k]);
  }
  s << "\n"
    << "omega = " << fmt(c.coupling.omega) << "\n"
    << "rho_mode = " << to_string(c.rho_mode) << "\n"
    << "tol_rel = " << fmt(c.coupling.tol_rel) << "\n"
    << "tol_abs = " << fmt(c.coupling.tol_abs) << "\n"
    << "max_outer = " << c.coupling.max_outer << "\n\n"
    << "[data]\n"
    << "body_force = " << c.body_force << "\n"
    << "v0 = " << c.v0 << "\n\n"
    << "[output]\n"
    << "out = " << c.out.string() << "\n"
    << "dump_fields = " << (c.dump_fields ? "true" : "false") << "\n"
    << "seed = " << c.seed << "\n\n"
    << "[verify]\n"
    << "levels = " << c.verify_levels << "\n"
    << "poincare_samples = " << c.poincare_samples << "\n"
    << "lame_samples = " << c.lame_samples << "\n"
    << "fluid_samples = " << c.fluid_samples << "\n"
    << "lipschitz_pairs = " << c.lipschitz_pairs << "\n\n"
    << "[study]\n"
    << "levels = " << c.study_levels << "\n";
  return s.str();
}

}  // namespace fsi
