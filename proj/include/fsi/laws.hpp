#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "fsi/fe.hpp"

namespace fsi {

enum class LawId { Linear, Saturating, TimeModulated };

std::string_view to_string(LawId id);
LawId parse_law_id(std::string_view name);

/// Vector flux a(t, xi) = alpha(t) xi + beta xi / (1 + |xi|) with constants
/// c_m (strong monotonicity) and L (Lipschitz) claimed from the parameters.
/// Every built-in law is the gradient of potential().
///
/// beta is not range-checked: a law with beta < 0 breaks monotonicity near the
/// origin and is rejected by certify_constants, which is where that check lives.
class DiffusionLaw {
 public:
  static DiffusionLaw linear(double kappa, double t_final = 1.0);
  static DiffusionLaw saturating(double kappa, double beta, double t_final = 1.0);
  /// alpha(t) = mid + amp * sin(2 pi t / T) with mid/amp chosen from [alpha_min, alpha_max].
  static DiffusionLaw time_modulated(double alpha_min, double alpha_max, double beta,
                                     double t_final = 1.0);

  LawId id() const { return id_; }
  double beta() const { return beta_; }
  double alpha_min() const { return alpha_min_; }
  double alpha_max() const { return alpha_max_; }
  double t_final() const { return t_final_; }
  double c_m() const { return alpha_min_; }
  double L() const { return alpha_max_ + std::abs(beta_); }

  double alpha(double t) const;
  Vec2 eval(double t, const Vec2& xi) const;
  Mat2 jacobian(double t, const Vec2& xi) const;
  double potential(double t, const Vec2& xi) const;

  /// Same law on a different time horizon.
  DiffusionLaw with_horizon(double t_final) const;

 private:
  DiffusionLaw(LawId id, double alpha_min, double alpha_max, double beta, double t_final);
  void check_time(double t) const;

  LawId id_;
  double alpha_min_;
  double alpha_max_;
  double beta_;
  double t_final_;
};

std::vector<Vec2> eval_law(const DiffusionLaw& law, double t, std::span<const Vec2> xi);
Mat2 eval_law_jacobian(const DiffusionLaw& law, double t, const Vec2& xi);

struct CertifiedConstants {
  double c_m_hat;
  double L_hat;
};

/// Samples monotonicity and Lipschitz quotients over random (t, xi, eta) with
/// |xi|, |eta| <= 1e3 and throws LawCertificationError if either claimed
/// constant is violated. Needs at least 1e4 samples.
CertifiedConstants certify_constants(const DiffusionLaw& law, int samples, std::uint64_t seed = 1);

struct SolidParams {
  double mu = 1.0;
  double lambda = 1.0;
  void validate() const;
  bool operator==(const SolidParams&) const = default;
};

struct FluidParams {
  static constexpr double nu = 1.0;
  DiffusionLaw law = DiffusionLaw::linear(1.0);
};

}  // namespace fsi
