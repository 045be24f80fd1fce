#include "fsi/trace.hpp"

#include "fsi/errors.hpp"

namespace fsi {

std::string_view to_string(TraceRole role) {
  switch (role) {
    case TraceRole::Displacement: return "displacement";
    case TraceRole::Velocity: return "velocity";
    case TraceRole::TractionLoad: return "traction-load";
  }
  return "?";
}

TraceSeries::TraceSeries(TraceRole role, int levels, int dofs)
    : role_(role), dofs_(dofs), data_(static_cast<std::size_t>(levels), Vec::Zero(dofs)) {}

void TraceSeries::check_compatible(const TraceSeries& other) const {
  if (other.levels() != levels() || other.dofs() != dofs()) {
    throw ShapeError("trace series shapes differ");
  }
  if (other.role() != role()) throw ShapeError("trace series roles differ");
}

TraceSeries& TraceSeries::operator+=(const TraceSeries& other) {
  check_compatible(other);
  for (std::size_t n = 0; n < data_.size(); ++n) data_[n] += other.data_[n];
  return *this;
}

TraceSeries& TraceSeries::operator-=(const TraceSeries& other) {
  check_compatible(other);
  for (std::size_t n = 0; n < data_.size(); ++n) data_[n] -= other.data_[n];
  return *this;
}

TraceSeries& TraceSeries::operator*=(double s) {
  for (auto& v : data_) v *= s;
  return *this;
}

double TraceSeries::max_abs() const {
  double m = 0.0;
  for (const auto& v : data_) {
    if (v.size() > 0) m = std::max(m, v.cwiseAbs().maxCoeff());
  }
  return m;
}

bool TraceSeries::all_finite() const {
  for (const auto& v : data_) {
    if (!v.allFinite()) return false;
  }
  return true;
}

}  // namespace fsi
