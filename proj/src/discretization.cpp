#include "fsi/discretization.hpp"

#include "fsi/errors.hpp"

namespace fsi {

Discretization::Discretization(CoupledMesh mesh)
    : mesh_(std::move(mesh)),
      fluid_(mesh_.fluid(), BoundaryTag::FluidDirichlet),
      solid_(mesh_.solid(), BoundaryTag::SolidDirichlet),
      interface_(build_interface_dofs(mesh_, fluid_, solid_)),
      gram_(interface_) {}

int Discretization::volume_dof(Side side, int k) const {
  const auto& nodes = side == Side::Fluid ? interface_.fluid_node : interface_.solid_node;
  return 2 * nodes[static_cast<std::size_t>(k / 2 + 1)] + k % 2;
}

Vec Discretization::lift(Side side, const Vec& trace) const {
  if (trace.size() != trace_dofs()) throw ShapeError("lift: trace size mismatch");
  Vec out = Vec::Zero(space(side).vector_dofs());
  for (int k = 0; k < trace_dofs(); ++k) out[volume_dof(side, k)] = trace[k];
  return out;
}

Vec Discretization::restrict(Side side, const Vec& volume) const {
  if (volume.size() != space(side).vector_dofs()) throw ShapeError("restrict: volume size mismatch");
  Vec out(trace_dofs());
  for (int k = 0; k < trace_dofs(); ++k) out[k] = volume[volume_dof(side, k)];
  return out;
}

std::vector<double> Discretization::trace_arclength() const {
  return {interface_.arclength.begin() + 1, interface_.arclength.end() - 1};
}

}  // namespace fsi
