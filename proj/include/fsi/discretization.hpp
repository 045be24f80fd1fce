#pragma once

#include "fsi/fe.hpp"
#include "fsi/mesh.hpp"
#include "fsi/norms.hpp"
#include "fsi/trace.hpp"

namespace fsi {

/// Mesh, both P2 spaces, the shared interface dofs and the interface Gram.
/// The spaces reference the owned mesh, so the object is pinned in memory.
class Discretization {
 public:
  explicit Discretization(CoupledMesh mesh);
  Discretization(const Discretization&) = delete;
  Discretization& operator=(const Discretization&) = delete;

  const CoupledMesh& mesh() const { return mesh_; }
  const FeSpace& fluid() const { return fluid_; }
  const FeSpace& solid() const { return solid_; }
  const FeSpace& space(Side side) const { return side == Side::Fluid ? fluid_ : solid_; }
  const InterfaceDofs& interface() const { return interface_; }
  const InterfaceGram& gram() const { return gram_; }

  int trace_dofs() const { return interface_.trace_dofs(); }
  /// Volume dof on `side` of trace dof k (interior interface node k/2 + 1, component k%2).
  int volume_dof(Side side, int k) const;
  /// Extension by zero of a trace vector to the volume vector of `side`.
  Vec lift(Side side, const Vec& trace) const;
  /// Interior interface values of a volume vector.
  Vec restrict(Side side, const Vec& volume) const;

  /// Arclength of the interior interface nodes, canonical order.
  std::vector<double> trace_arclength() const;

  TraceSeries zero_trace(TraceRole role, const TimeGrid& grid) const {
    return TraceSeries(role, grid.n_steps() + 1, trace_dofs());
  }

 private:
  CoupledMesh mesh_;
  FeSpace fluid_;
  FeSpace solid_;
  InterfaceDofs interface_;
  InterfaceGram gram_;
};

}  // namespace fsi
