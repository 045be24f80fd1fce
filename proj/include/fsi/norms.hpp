#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "fsi/fe.hpp"
#include "fsi/trace.hpp"

namespace fsi {

/// Mass and stiffness of the 1-D P2 space on the interface, restricted to the
/// interior nodes (endpoint values vanish), with the generalized eigenbasis
/// stiff * phi = lambda * mass * phi, mass-orthonormal and ascending.
class InterfaceGram {
 public:
  explicit InterfaceGram(const InterfaceDofs& dofs);
  /// Straight interface of `length` split into `segments` equal P2 segments.
  static InterfaceGram uniform(int segments, double length = 1.0);

  int size() const { return static_cast<int>(mass_.rows()); }
  const Eigen::MatrixXd& mass() const { return mass_; }
  const Eigen::MatrixXd& stiff() const { return stiff_; }
  const Vec& eigenvalues() const { return lambda_; }
  const Eigen::MatrixXd& eigenvectors() const { return phi_; }

  /// Eigen-coefficients c = Phi^T M v of a scalar nodal vector.
  Vec coefficients(const Vec& v) const;
  /// Riesz image in the H^{1/2} inner product: the load g with g^T w = (v, w)_{1/2}.
  Vec riesz_half(const Vec& v) const;
  double l2_squared(const Vec& v) const;

 private:
  InterfaceGram(int nodes, const std::vector<std::array<int, 3>>& segments,
                const std::vector<double>& lengths);

  Eigen::MatrixXd mass_;
  Eigen::MatrixXd stiff_;
  Vec lambda_;
  Eigen::MatrixXd phi_;
};

// Norm functions accept either a scalar nodal vector (size()) or an interleaved
// two-component trace (2*size()); components are summed in squares.

/// (sum_i (1+lambda_i)^s c_i^2)^{1/2}; s in [0,1].
double fractional_norm(const InterfaceGram& gram, double s, const Vec& v);
/// Dual of the s=1/2 norm for a load vector g: (sum_i (1+lambda_i)^{-1/2} (phi_i^T g)^2)^{1/2}.
double dual_half_norm(const InterfaceGram& gram, const Vec& g);

struct NormReport {
  std::string name;
  double value = 0.0;
  std::vector<double> components;
};
std::string csv_row(const NormReport& r);

/// Space-time norm of a displacement trace: time-Gagliardo part, L2 part and
/// L2(H^{1/2}) part, each over levels 1..N. Requires u(t_0) = 0.
NormReport x_norm(const InterfaceGram& gram, const TimeGrid& grid, const TraceSeries& u);
/// Time L2 of the dual half norm of a traction-load series, levels 1..N.
double dual_series_norm(const InterfaceGram& gram, const TimeGrid& grid, const TraceSeries& g);
/// Time L2 of the interface L2 norm, levels 1..N.
double l2_series_norm(const InterfaceGram& gram, const TimeGrid& grid, const TraceSeries& u);
/// Discrete H^1((0,T) x Sigma): backward differences in time plus L2(H^1) in space.
double h1_series_norm(const InterfaceGram& gram, const TimeGrid& grid, const TraceSeries& u);

enum class BochnerKind { L2H1, L2L2, H1L2 };

/// Rectangle-rule time quadrature over levels 1..N of a volume norm built from
/// the given mass and stiffness; H1L2 applies backward differences first.
double bochner_norm(BochnerKind kind, const TimeGrid& grid, const SpMat& mass, const SpMat& stiff,
                    const std::vector<Vec>& series);

}  // namespace fsi
