#pragma once

#include <string_view>
#include <vector>

#include "fsi/fe.hpp"

namespace fsi {

enum class TraceRole { Displacement, Velocity, TractionLoad };

std::string_view to_string(TraceRole role);

/// Space-time field on (0,T) x Sigma: one vector per time level t_0..t_N over the
/// interior interface nodes (canonical order, two interleaved components).
///
/// Displacement and velocity traces hold nodal values; traction traces hold load
/// vectors, i.e. pairings <g, phi_i> with the interface basis functions.
class TraceSeries {
 public:
  TraceSeries() = default;
  TraceSeries(TraceRole role, int levels, int dofs);

  TraceRole role() const { return role_; }
  int levels() const { return static_cast<int>(data_.size()); }
  int dofs() const { return dofs_; }

  Vec& operator[](int n) { return data_[static_cast<std::size_t>(n)]; }
  const Vec& operator[](int n) const { return data_[static_cast<std::size_t>(n)]; }

  TraceSeries& operator+=(const TraceSeries& other);
  TraceSeries& operator-=(const TraceSeries& other);
  TraceSeries& operator*=(double s);
  friend TraceSeries operator+(TraceSeries a, const TraceSeries& b) { return a += b; }
  friend TraceSeries operator-(TraceSeries a, const TraceSeries& b) { return a -= b; }
  friend TraceSeries operator*(double s, TraceSeries a) { return a *= s; }

  double max_abs() const;
  bool all_finite() const;

 private:
  void check_compatible(const TraceSeries& other) const;

  TraceRole role_ = TraceRole::Displacement;
  int dofs_ = 0;
  std::vector<Vec> data_;
};

}  // namespace fsi
