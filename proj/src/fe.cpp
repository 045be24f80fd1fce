#include "fsi/fe.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fsi/errors.hpp"

namespace fsi {

namespace {

long long edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return static_cast<long long>(a) * 4'000'000'000LL + b;
}

using Triplets = std::vector<Eigen::Triplet<double>>;

SpMat from_triplets(int rows, int cols, const Triplets& t) {
  SpMat m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

}  // namespace

const TriangleRule& triangle_rule() {
  static const TriangleRule rule = [] {
    const double s15 = std::sqrt(15.0);
    const double a = (6.0 - s15) / 21.0, wa = (155.0 - s15) / 1200.0;
    const double b = (6.0 + s15) / 21.0, wb = (155.0 + s15) / 1200.0;
    TriangleRule r;
    r.points = {{1.0 / 3, 1.0 / 3, 1.0 / 3},
                {a, a, 1 - 2 * a}, {a, 1 - 2 * a, a}, {1 - 2 * a, a, a},
                {b, b, 1 - 2 * b}, {b, 1 - 2 * b, b}, {1 - 2 * b, b, b}};
    r.weights = {9.0 / 40, wa, wa, wa, wb, wb, wb};
    return r;
  }();
  return rule;
}

const LineRule& line_rule() {
  static const LineRule rule = [] {
    const double d = 0.5 * std::sqrt(0.6);
    return LineRule{{0.5 - d, 0.5, 0.5 + d}, {5.0 / 18, 8.0 / 18, 5.0 / 18}};
  }();
  return rule;
}

std::array<double, kP2Local> p2_values(const std::array<double, 3>& l) {
  return {l[0] * (2 * l[0] - 1), l[1] * (2 * l[1] - 1), l[2] * (2 * l[2] - 1),
          4 * l[0] * l[1],       4 * l[1] * l[2],       4 * l[2] * l[0]};
}

std::array<Vec2, kP2Local> p2_gradients(const std::array<double, 3>& l,
                                        const std::array<Vec2, 3>& g) {
  return {(4 * l[0] - 1) * g[0], (4 * l[1] - 1) * g[1], (4 * l[2] - 1) * g[2],
          4 * (l[1] * g[0] + l[0] * g[1]), 4 * (l[2] * g[1] + l[1] * g[2]),
          4 * (l[0] * g[2] + l[2] * g[0])};
}

std::array<Mat2, kP2Local> p2_hessians(const std::array<Vec2, 3>& g) {
  auto sym = [](const Vec2& a, const Vec2& b) -> Mat2 {
    return 4.0 * (a * b.transpose() + b * a.transpose());
  };
  return {4.0 * g[0] * g[0].transpose(), 4.0 * g[1] * g[1].transpose(),
          4.0 * g[2] * g[2].transpose(), sym(g[0], g[1]), sym(g[1], g[2]), sym(g[2], g[0])};
}

FeSpace::FeSpace(const Triangulation& tri, BoundaryTag dirichlet_tag) : tri_(&tri) {
  nodes_ = tri.nodes;
  std::vector<std::pair<long long, int>> keys;
  for (const auto& e : tri.elements) {
    for (int m = 0; m < 3; ++m) keys.emplace_back(edge_key(e[m], e[(m + 1) % 3]), 0);
  }
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end(),
                         [](const auto& x, const auto& y) { return x.first == y.first; }),
             keys.end());
  // Midpoint ids follow first appearance in element order, independent of the sort.
  std::vector<int> assigned(keys.size(), -1);
  auto find_key = [&keys](long long key) {
    auto it = std::lower_bound(keys.begin(), keys.end(), std::make_pair(key, -1),
                               [](const auto& x, const auto& y) { return x.first < y.first; });
    return static_cast<std::size_t>(it - keys.begin());
  };
  elements_.reserve(tri.elements.size());
  for (const auto& e : tri.elements) {
    std::array<int, kP2Local> local{e[0], e[1], e[2], 0, 0, 0};
    for (int m = 0; m < 3; ++m) {
      const int a = e[m], b = e[(m + 1) % 3];
      const std::size_t slot = find_key(edge_key(a, b));
      if (assigned[slot] < 0) {
        assigned[slot] = static_cast<int>(nodes_.size());
        nodes_.push_back({0.5 * (tri.nodes[a].x + tri.nodes[b].x),
                          0.5 * (tri.nodes[a].y + tri.nodes[b].y)});
      }
      local[3 + m] = assigned[slot];
    }
    elements_.push_back(local);
  }
  for (std::size_t s = 0; s < keys.size(); ++s) keys[s].second = assigned[s];
  edge_midpoints_ = std::move(keys);

  dirichlet_.assign(nodes_.size(), 0);
  interface_.assign(nodes_.size(), 0);
  for (const auto& f : tri.boundary) {
    auto& flags = f.tag == BoundaryTag::Interface ? interface_ : dirichlet_;
    if (f.tag != BoundaryTag::Interface && f.tag != dirichlet_tag) continue;
    flags[static_cast<std::size_t>(f.a)] = 1;
    flags[static_cast<std::size_t>(f.b)] = 1;
    flags[static_cast<std::size_t>(midpoint(f.a, f.b))] = 1;
  }

  const auto& rule = triangle_rule();
  n_qp_ = static_cast<int>(rule.points.size());
  area_.reserve(elements_.size());
  grad_lambda_.reserve(elements_.size());
  grads_.reserve(elements_.size() * rule.points.size());
  for (const auto& e : tri.elements) {
    const Point& p0 = tri.nodes[e[0]];
    const Point& p1 = tri.nodes[e[1]];
    const Point& p2 = tri.nodes[e[2]];
    const double j00 = p1.x - p0.x, j01 = p2.x - p0.x;
    const double j10 = p1.y - p0.y, j11 = p2.y - p0.y;
    const double det = j00 * j11 - j01 * j10;
    if (!(det > 0.0)) throw AssemblyError("degenerate or inverted element");
    std::array<Vec2, 3> g;
    g[1] = Vec2(j11, -j01) / det;
    g[2] = Vec2(-j10, j00) / det;
    g[0] = -g[1] - g[2];
    area_.push_back(0.5 * det);
    grad_lambda_.push_back(g);
    for (const auto& bary : rule.points) grads_.push_back(p2_gradients(bary, g));
  }
}

int FeSpace::midpoint(int a, int b) const {
  const long long key = edge_key(a, b);
  auto it = std::lower_bound(edge_midpoints_.begin(), edge_midpoints_.end(),
                             std::make_pair(key, -1),
                             [](const auto& x, const auto& y) { return x.first < y.first; });
  if (it == edge_midpoints_.end() || it->first != key) {
    throw AssemblyError("edge (" + std::to_string(a) + "," + std::to_string(b) + ") not in mesh");
  }
  return it->second;
}

Point FeSpace::physical_point(int k, const std::array<double, 3>& bary) const {
  const auto& e = tri_->elements[static_cast<std::size_t>(k)];
  Point p;
  for (int m = 0; m < 3; ++m) {
    p.x += bary[m] * tri_->nodes[e[m]].x;
    p.y += bary[m] * tri_->nodes[e[m]].y;
  }
  return p;
}

Vec FeSpace::interpolate(const std::function<Vec2(double, double)>& f) const {
  Vec out(vector_dofs());
  for (int i = 0; i < node_count(); ++i) {
    const Vec2 v = f(nodes_[i].x, nodes_[i].y);
    out[2 * i] = v[0];
    out[2 * i + 1] = v[1];
  }
  return out;
}

Vec FeSpace::interpolate_p1(const std::function<double(double, double)>& f) const {
  Vec out(vertex_count());
  for (int i = 0; i < vertex_count(); ++i) out[i] = f(nodes_[i].x, nodes_[i].y);
  return out;
}

InterfaceDofs build_interface_dofs(const CoupledMesh& mesh, const FeSpace& fluid,
                                   const FeSpace& solid) {
  InterfaceDofs dofs;
  const auto& pairs = mesh.interface_pairs();
  const auto& s = mesh.interface_arclength();
  auto push = [&](int f, int so, double arc) {
    dofs.fluid_node.push_back(f);
    dofs.solid_node.push_back(so);
    dofs.arclength.push_back(arc);
    dofs.position.push_back(fluid.nodes()[static_cast<std::size_t>(f)]);
  };
  push(pairs[0].first, pairs[0].second, 0.0);
  for (std::size_t k = 0; k + 1 < pairs.size(); ++k) {
    const auto [fa, sa] = pairs[k];
    const auto [fb, sb] = pairs[k + 1];
    const int base = dofs.size() - 1;
    const double len = s[k + 1] - s[k];
    push(fluid.midpoint(fa, fb), solid.midpoint(sa, sb), s[k] + 0.5 * len);
    push(fb, sb, s[k + 1]);
    const Point& n = mesh.interface_normals()[k];
    dofs.facets.push_back({base, base + 1, base + 2, len, Vec2(n.x, n.y)});
  }
  for (int k = 0; k < dofs.size(); ++k) {
    const bool endpoint = k == 0 || k == dofs.size() - 1;
    const int f = dofs.fluid_node[static_cast<std::size_t>(k)];
    const int so = dofs.solid_node[static_cast<std::size_t>(k)];
    if (endpoint != (fluid.on_dirichlet(f) && solid.on_dirichlet(so))) {
      throw GeometryError("interface endpoints must be the only clamped interface nodes");
    }
  }
  return dofs;
}

SpMat vectorize(const SpMat& scalar) {
  Triplets t;
  t.reserve(static_cast<std::size_t>(scalar.nonZeros()) * 2);
  for (int col = 0; col < scalar.outerSize(); ++col) {
    for (SpMat::InnerIterator it(scalar, col); it; ++it) {
      t.emplace_back(2 * it.row(), 2 * it.col(), it.value());
      t.emplace_back(2 * it.row() + 1, 2 * it.col() + 1, it.value());
    }
  }
  return from_triplets(2 * static_cast<int>(scalar.rows()), 2 * static_cast<int>(scalar.cols()), t);
}

SpMat assemble_scalar_mass(const FeSpace& V) {
  const auto& rule = triangle_rule();
  Triplets t;
  for (int k = 0; k < V.element_count(); ++k) {
    const auto& e = V.element(k);
    Eigen::Matrix<double, 6, 6> local = Eigen::Matrix<double, 6, 6>::Zero();
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto phi = p2_values(rule.points[q]);
      const double w = rule.weights[q] * V.area(k);
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) local(i, j) += w * phi[i] * phi[j];
    }
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) t.emplace_back(e[i], e[j], local(i, j));
  }
  return from_triplets(V.node_count(), V.node_count(), t);
}

SpMat assemble_scalar_laplace(const FeSpace& V) {
  const auto& rule = triangle_rule();
  Triplets t;
  for (int k = 0; k < V.element_count(); ++k) {
    const auto& e = V.element(k);
    Eigen::Matrix<double, 6, 6> local = Eigen::Matrix<double, 6, 6>::Zero();
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto& g = V.grad_at(k, static_cast<int>(q));
      const double w = rule.weights[q] * V.area(k);
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) local(i, j) += w * g[i].dot(g[j]);
    }
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) t.emplace_back(e[i], e[j], local(i, j));
  }
  return from_triplets(V.node_count(), V.node_count(), t);
}

SpMat assemble_scalar_broken_hessian(const FeSpace& V) {
  Triplets t;
  for (int k = 0; k < V.element_count(); ++k) {
    const auto& e = V.element(k);
    const auto H = p2_hessians(V.grad_lambda(k));
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
        t.emplace_back(e[i], e[j], V.area(k) * (H[i].array() * H[j].array()).sum());
  }
  return from_triplets(V.node_count(), V.node_count(), t);
}

namespace {

// Shared kernel for the two strain-type forms:
// coef_sym * (eps(u):eps(v)) + coef_div * div u div v.
SpMat assemble_strain_form(const FeSpace& V, double coef_sym, double coef_div) {
  const auto& rule = triangle_rule();
  Triplets t;
  for (int k = 0; k < V.element_count(); ++k) {
    const auto& e = V.element(k);
    Eigen::Matrix<double, 12, 12> local = Eigen::Matrix<double, 12, 12>::Zero();
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto& g = V.grad_at(k, static_cast<int>(q));
      const double w = rule.weights[q] * V.area(k);
      for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) {
          const double gg = g[i].dot(g[j]);
          for (int c = 0; c < 2; ++c) {
            for (int d = 0; d < 2; ++d) {
              const double sym = 0.5 * ((c == d ? gg : 0.0) + g[i][d] * g[j][c]);
              local(2 * i + c, 2 * j + d) += w * (coef_sym * sym + coef_div * g[i][c] * g[j][d]);
            }
          }
        }
      }
    }
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < 12; ++j)
        t.emplace_back(2 * e[i / 2] + i % 2, 2 * e[j / 2] + j % 2, local(i, j));
  }
  return from_triplets(V.vector_dofs(), V.vector_dofs(), t);
}

}  // namespace

SpMat assemble_elasticity(const FeSpace& V, double mu, double lambda) {
  return assemble_strain_form(V, 2.0 * mu, lambda);
}

SpMat assemble_strain_gram(const FeSpace& V) { return assemble_strain_form(V, 1.0, 0.0); }

SpMat assemble_divergence(const FeSpace& V) {
  const auto& rule = triangle_rule();
  Triplets t;
  for (int k = 0; k < V.element_count(); ++k) {
    const auto& e = V.element(k);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto& g = V.grad_at(k, static_cast<int>(q));
      const auto& psi = rule.points[q];
      const double w = rule.weights[q] * V.area(k);
      for (int i = 0; i < 6; ++i)
        for (int c = 0; c < 2; ++c)
          for (int m = 0; m < 3; ++m) t.emplace_back(2 * e[i] + c, e[m], -w * psi[m] * g[i][c]);
    }
  }
  return from_triplets(V.vector_dofs(), V.vertex_count(), t);
}

SpMat assemble_p1_mass(const FeSpace& V) {
  Triplets t;
  for (int k = 0; k < V.element_count(); ++k) {
    const auto& e = V.element(k);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        t.emplace_back(e[i], e[j], V.area(k) * (i == j ? 1.0 / 6 : 1.0 / 12));
  }
  return from_triplets(V.vertex_count(), V.vertex_count(), t);
}

Vec assemble_body_load(const FeSpace& V, const std::function<Vec2(double, double)>& f) {
  const auto& rule = triangle_rule();
  Vec load = Vec::Zero(V.vector_dofs());
  for (int k = 0; k < V.element_count(); ++k) {
    const auto& e = V.element(k);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const Point x = V.physical_point(k, rule.points[q]);
      const Vec2 fx = f(x.x, x.y);
      const auto phi = p2_values(rule.points[q]);
      const double w = rule.weights[q] * V.area(k);
      for (int i = 0; i < 6; ++i) {
        load[2 * e[i]] += w * phi[i] * fx[0];
        load[2 * e[i] + 1] += w * phi[i] * fx[1];
      }
    }
  }
  return load;
}

Vec assemble_interface_traction(const InterfaceDofs& dofs, const FeSpace& V, Side side,
                                const std::function<Vec2(double, double, const Vec2&)>& g) {
  const auto& rule = line_rule();
  const auto& node_of = side == Side::Fluid ? dofs.fluid_node : dofs.solid_node;
  Vec load = Vec::Zero(V.vector_dofs());
  for (const auto& f : dofs.facets) {
    const Point& a = dofs.position[static_cast<std::size_t>(f.a)];
    const Point& b = dofs.position[static_cast<std::size_t>(f.b)];
    const std::array<int, 3> local{f.a, f.mid, f.b};
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const double s = rule.points[q];
      const Vec2 gx = g(a.x + s * (b.x - a.x), a.y + s * (b.y - a.y), f.normal);
      const std::array<double, 3> phi{(1 - s) * (1 - 2 * s), 4 * s * (1 - s), s * (2 * s - 1)};
      const double w = rule.weights[q] * f.length;
      for (int i = 0; i < 3; ++i) {
        const int node = node_of[static_cast<std::size_t>(local[i])];
        load[2 * node] += w * phi[i] * gx[0];
        load[2 * node + 1] += w * phi[i] * gx[1];
      }
    }
  }
  return load;
}

double l2_error(const FeSpace& V, const Vec& field, const std::function<Vec2(double, double)>& exact) {
  if (field.size() != V.vector_dofs()) throw ShapeError("l2_error: field size mismatch");
  const auto& rule = triangle_rule();
  double sum = 0.0;
  for (int k = 0; k < V.element_count(); ++k) {
    const auto& e = V.element(k);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto phi = p2_values(rule.points[q]);
      Vec2 uh = Vec2::Zero();
      for (int i = 0; i < 6; ++i) uh += phi[i] * Vec2(field[2 * e[i]], field[2 * e[i] + 1]);
      const Point x = V.physical_point(k, rule.points[q]);
      sum += rule.weights[q] * V.area(k) * (uh - exact(x.x, x.y)).squaredNorm();
    }
  }
  return std::sqrt(sum);
}

double h1_seminorm_error(const FeSpace& V, const Vec& field,
                         const std::function<Mat2(double, double)>& exact_grad) {
  if (field.size() != V.vector_dofs()) throw ShapeError("h1_seminorm_error: field size mismatch");
  const auto& rule = triangle_rule();
  double sum = 0.0;
  for (int k = 0; k < V.element_count(); ++k) {
    const auto& e = V.element(k);
    for (std::size_t q = 0; q < rule.points.size(); ++q) {
      const auto& g = V.grad_at(k, static_cast<int>(q));
      Mat2 grad = Mat2::Zero();
      for (int i = 0; i < 6; ++i) {
        grad.row(0) += field[2 * e[i]] * g[i].transpose();
        grad.row(1) += field[2 * e[i] + 1] * g[i].transpose();
      }
      const Point x = V.physical_point(k, rule.points[q]);
      sum += rule.weights[q] * V.area(k) * (grad - exact_grad(x.x, x.y)).squaredNorm();
    }
  }
  return std::sqrt(sum);
}

}  // namespace fsi
