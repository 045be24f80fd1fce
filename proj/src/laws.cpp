#include "fsi/laws.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "fsi/errors.hpp"

namespace fsi {

std::string_view to_string(LawId id) {
  switch (id) {
    case LawId::Linear: return "linear";
    case LawId::Saturating: return "saturating";
    case LawId::TimeModulated: return "time-modulated";
  }
  return "?";
}

LawId parse_law_id(std::string_view name) {
  if (name == "linear") return LawId::Linear;
  if (name == "saturating") return LawId::Saturating;
  if (name == "time-modulated") return LawId::TimeModulated;
  throw ConfigError("unknown law id '" + std::string(name) +
                    "' (expected linear, saturating or time-modulated)");
}

DiffusionLaw::DiffusionLaw(LawId id, double alpha_min, double alpha_max, double beta,
                           double t_final)
    : id_(id), alpha_min_(alpha_min), alpha_max_(alpha_max), beta_(beta), t_final_(t_final) {
  if (!(alpha_min > 0.0)) throw ConfigError("law coefficient must be positive");
  if (!(alpha_max >= alpha_min)) throw ConfigError("law requires alpha_max >= alpha_min");
  if (!std::isfinite(beta) || !std::isfinite(alpha_max)) throw ConfigError("law parameters must be finite");
  if (!(t_final > 0.0)) throw ConfigError("law horizon must be positive");
}

DiffusionLaw DiffusionLaw::linear(double kappa, double t_final) {
  return {LawId::Linear, kappa, kappa, 0.0, t_final};
}

DiffusionLaw DiffusionLaw::saturating(double kappa, double beta, double t_final) {
  return {LawId::Saturating, kappa, kappa, beta, t_final};
}

DiffusionLaw DiffusionLaw::time_modulated(double alpha_min, double alpha_max, double beta,
                                          double t_final) {
  return {LawId::TimeModulated, alpha_min, alpha_max, beta, t_final};
}

DiffusionLaw DiffusionLaw::with_horizon(double t_final) const {
  return {id_, alpha_min_, alpha_max_, beta_, t_final};
}

void DiffusionLaw::check_time(double t) const {
  if (!(t >= -1e-12 * t_final_ && t <= t_final_ * (1.0 + 1e-12))) {
    throw DomainError("law evaluated at t = " + std::to_string(t) + " outside [0, " +
                      std::to_string(t_final_) + "]");
  }
}

double DiffusionLaw::alpha(double t) const {
  check_time(t);
  if (id_ != LawId::TimeModulated) return alpha_min_;
  const double mid = 0.5 * (alpha_min_ + alpha_max_);
  const double amp = 0.5 * (alpha_max_ - alpha_min_);
  return mid + amp * std::sin(2.0 * std::numbers::pi * t / t_final_);
}

Vec2 DiffusionLaw::eval(double t, const Vec2& xi) const {
  return (alpha(t) + beta_ / (1.0 + xi.norm())) * xi;
}

Mat2 DiffusionLaw::jacobian(double t, const Vec2& xi) const {
  const double r = xi.norm();
  Mat2 J = (alpha(t) + beta_ / (1.0 + r)) * Mat2::Identity();
  if (r > 0.0) J -= beta_ / (r * (1.0 + r) * (1.0 + r)) * (xi * xi.transpose());
  return J;
}

double DiffusionLaw::potential(double t, const Vec2& xi) const {
  const double r = xi.norm();
  return 0.5 * alpha(t) * r * r + beta_ * (r - std::log1p(r));
}

std::vector<Vec2> eval_law(const DiffusionLaw& law, double t, std::span<const Vec2> xi) {
  std::vector<Vec2> out;
  out.reserve(xi.size());
  for (const auto& x : xi) out.push_back(law.eval(t, x));
  return out;
}

Mat2 eval_law_jacobian(const DiffusionLaw& law, double t, const Vec2& xi) {
  return law.jacobian(t, xi);
}

CertifiedConstants certify_constants(const DiffusionLaw& law, int samples, std::uint64_t seed) {
  if (samples < 10000) throw PreconditionError("certify_constants needs at least 1e4 samples");
  constexpr double kRadius = 1e3;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto angle = [&] { return 2.0 * std::numbers::pi * unit(rng); };
  const auto polar = [](double r, double th) { return Vec2(r * std::cos(th), r * std::sin(th)); };
  const auto log_uniform = [&](double lo, double hi) {
    return lo * std::pow(hi / lo, unit(rng));
  };
  const auto clamp_disk = [&](Vec2 v) {
    const double r = v.norm();
    return r > kRadius ? Vec2(v * (kRadius / r)) : v;
  };

  CertifiedConstants out{1e300, 0.0};
  for (int s = 0; s < samples; ++s) {
    const double t = law.t_final() * unit(rng);
    Vec2 xi, eta;
    switch (s % 3) {
      case 0:  // uniform in the disk
        xi = polar(kRadius * std::sqrt(unit(rng)), angle());
        eta = polar(kRadius * std::sqrt(unit(rng)), angle());
        break;
      case 1: {  // nearby pair at a log-uniform radius
        const double r = log_uniform(1e-6, kRadius);
        xi = polar(r, angle());
        eta = clamp_disk(xi + polar(r * log_uniform(1e-4, 1.0), angle()));
        break;
      }
      default:  // pair straddling the origin
        xi = polar(log_uniform(1e-6, kRadius), angle());
        eta = polar(log_uniform(1e-6, kRadius), angle());
        break;
    }
    const Vec2 d = xi - eta;
    const double d2 = d.squaredNorm();
    if (d2 == 0.0) continue;
    const Vec2 da = law.eval(t, xi) - law.eval(t, eta);
    out.c_m_hat = std::min(out.c_m_hat, da.dot(d) / d2);
    out.L_hat = std::max(out.L_hat, std::sqrt(da.squaredNorm() / d2));
  }
  if (out.c_m_hat < law.c_m() - 1e-9) {
    throw LawCertificationError("law '" + std::string(to_string(law.id())) +
                                "' fails strong monotonicity: sampled quotient " +
                                std::to_string(out.c_m_hat) + " below c_m = " + std::to_string(law.c_m()));
  }
  if (out.L_hat > law.L() + 1e-9) {
    throw LawCertificationError("law '" + std::string(to_string(law.id())) +
                                "' exceeds its Lipschitz constant: sampled " +
                                std::to_string(out.L_hat) + " above L = " + std::to_string(law.L()));
  }
  return out;
}

void SolidParams::validate() const {
  if (!(mu > 0.0)) throw ConfigError("solid.mu must be positive");
  if (!(lambda >= 0.0)) throw ConfigError("solid.lambda must be nonnegative");
}

}  // namespace fsi
