#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <functional>
#include <vector>

#include "fsi/mesh.hpp"

namespace fsi {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Quadrature on the reference triangle in barycentric coordinates; weights sum to 1.
struct TriangleRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
};
const TriangleRule& triangle_rule();  // 7-point, exact to degree 5

/// Gauss-Legendre rule on [0,1]; weights sum to 1.
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
};
const LineRule& line_rule();  // 3-point, exact to degree 5

constexpr int kP2Local = 6;

/// Continuous piecewise-quadratic Lagrange space on one triangulation.
///
/// Nodes are the triangulation vertices (same ids) followed by edge midpoints.
/// Local node order per element: vertices 0,1,2 then midpoints of edges
/// (0,1), (1,2), (2,0). Vector fields interleave components: dof = 2*node + c.
class FeSpace {
 public:
  FeSpace(const Triangulation& tri, BoundaryTag dirichlet_tag);

  const Triangulation& triangulation() const { return *tri_; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  int vertex_count() const { return static_cast<int>(tri_->nodes.size()); }
  int vector_dofs() const { return 2 * node_count(); }
  int element_count() const { return static_cast<int>(elements_.size()); }

  const std::vector<Point>& nodes() const { return nodes_; }
  const std::array<int, kP2Local>& element(int k) const { return elements_[static_cast<std::size_t>(k)]; }
  /// Midpoint node of the edge (a,b); throws if the edge does not exist.
  int midpoint(int a, int b) const;

  bool on_dirichlet(int node) const { return dirichlet_[static_cast<std::size_t>(node)] != 0; }
  bool on_interface(int node) const { return interface_[static_cast<std::size_t>(node)] != 0; }

  double area(int k) const { return area_[static_cast<std::size_t>(k)]; }
  /// Gradients of the barycentric coordinates of element k (constant per element).
  const std::array<Vec2, 3>& grad_lambda(int k) const { return grad_lambda_[static_cast<std::size_t>(k)]; }

  /// Shape function gradients at quadrature point q of element k.
  const std::array<Vec2, kP2Local>& grad_at(int k, int q) const {
    return grads_[static_cast<std::size_t>(k * n_qp_ + q)];
  }
  Point physical_point(int k, const std::array<double, 3>& bary) const;

  /// Nodal interpolation of a vector-valued function.
  Vec interpolate(const std::function<Vec2(double, double)>& f) const;
  /// Nodal interpolation of a scalar function onto the P1 (vertex) space.
  Vec interpolate_p1(const std::function<double(double, double)>& f) const;

 private:
  const Triangulation* tri_;
  std::vector<Point> nodes_;
  std::vector<std::array<int, kP2Local>> elements_;
  std::vector<char> dirichlet_;
  std::vector<char> interface_;
  std::vector<double> area_;
  std::vector<std::array<Vec2, 3>> grad_lambda_;
  std::vector<std::array<Vec2, kP2Local>> grads_;
  std::vector<std::pair<long long, int>> edge_midpoints_;  // sorted by key
  int n_qp_ = 0;
};

std::array<double, kP2Local> p2_values(const std::array<double, 3>& bary);
std::array<Vec2, kP2Local> p2_gradients(const std::array<double, 3>& bary,
                                        const std::array<Vec2, 3>& grad_lambda);
std::array<Mat2, kP2Local> p2_hessians(const std::array<Vec2, 3>& grad_lambda);

/// P2 interface nodes shared by both subdomain spaces, in canonical (arclength) order.
///
/// All lists include the two endpoints of Sigma; the trace unknowns are the
/// interior entries 1..size-2 because both spaces vanish at the endpoints.
struct InterfaceDofs {
  struct Facet {
    int a, mid, b;  // indices into the canonical interface node list
    double length;
    Vec2 normal;    // out of the fluid, into the solid
  };

  std::vector<int> fluid_node;
  std::vector<int> solid_node;
  std::vector<double> arclength;
  std::vector<Point> position;
  std::vector<Facet> facets;

  int size() const { return static_cast<int>(fluid_node.size()); }
  int interior_count() const { return size() - 2; }
  /// Number of scalar trace unknowns (two components per interior node).
  int trace_dofs() const { return 2 * interior_count(); }
};

InterfaceDofs build_interface_dofs(const CoupledMesh& mesh, const FeSpace& fluid,
                                   const FeSpace& solid);

// ---------------------------------------------------------------------------
// Assembly. Scalar operators act on node indices; vector operators on
// interleaved dofs. All loops run in element order, so assembly is deterministic.

SpMat assemble_scalar_mass(const FeSpace& V);
SpMat assemble_scalar_laplace(const FeSpace& V);
SpMat assemble_scalar_broken_hessian(const FeSpace& V);
/// Expands a scalar node operator to interleaved 2-vector dofs (A kron I2).
SpMat vectorize(const SpMat& scalar);

/// Bilinear form 2*mu*(eps(u),eps(v)) + lambda*(div u, div v).
SpMat assemble_elasticity(const FeSpace& V, double mu, double lambda);
/// Bilinear form (eps(u), eps(v)).
SpMat assemble_strain_gram(const FeSpace& V);
/// B(i,q) = -(psi_q, div phi_i) with psi the P1 pressure basis.
SpMat assemble_divergence(const FeSpace& V);
SpMat assemble_p1_mass(const FeSpace& V);

/// Load vector (f, phi) for a vector body force.
Vec assemble_body_load(const FeSpace& V, const std::function<Vec2(double, double)>& f);

/// Load vector <g, phi>_Sigma for a traction given pointwise; `side` selects the space.
Vec assemble_interface_traction(const InterfaceDofs& dofs, const FeSpace& V, Side side,
                                const std::function<Vec2(double, double, const Vec2&)>& g);

/// L2 distance between a P2 vector field and an exact field (7-point quadrature).
double l2_error(const FeSpace& V, const Vec& field, const std::function<Vec2(double, double)>& exact);
/// H1 seminorm distance; exact_grad(x, y) has row c equal to the gradient of component c.
double h1_seminorm_error(const FeSpace& V, const Vec& field,
                         const std::function<Mat2(double, double)>& exact_grad);

}  // namespace fsi
