#include "fsi/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fsi/csv.hpp"
#include "fsi/errors.hpp"

namespace fsi {

namespace {

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

double angle_at(const Point& p, const Point& q, const Point& r) {
  const double ux = q.x - p.x, uy = q.y - p.y;
  const double vx = r.x - p.x, vy = r.y - p.y;
  return std::atan2(std::abs(ux * vy - uy * vx), ux * vx + uy * vy);
}

double min_angle(const Point& a, const Point& b, const Point& c) {
  return std::min({angle_at(a, b, c), angle_at(b, c, a), angle_at(c, a, b)});
}

double min_angle(const Triangulation& tri) {
  double smallest = std::numbers::pi;
  for (const auto& e : tri.elements) {
    smallest = std::min(smallest, min_angle(tri.nodes[e[0]], tri.nodes[e[1]], tri.nodes[e[2]]));
  }
  return smallest;
}

// Structured (n+1)x(n+1) grid over [0,1] x [y0, y0+1], mapped through `map`.
// Row j = interface_row carries the interface facets.
template <typename Map>
Triangulation structured_block(int n, double y0, int interface_row, BoundaryTag outer_tag,
                               Map map) {
  Triangulation tri;
  const auto id = [n](int i, int j) { return j * (n + 1) + i; };
  tri.nodes.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      tri.nodes.push_back(map(static_cast<double>(i) / n, y0 + static_cast<double>(j) / n));
    }
  }
  tri.elements.reserve(static_cast<std::size_t>(2 * n * n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int p00 = id(i, j), p10 = id(i + 1, j), p01 = id(i, j + 1), p11 = id(i + 1, j + 1);
      const auto& N = tri.nodes;
      const double quality_a =
          std::min(min_angle(N[p00], N[p10], N[p11]), min_angle(N[p00], N[p11], N[p01]));
      const double quality_b =
          std::min(min_angle(N[p00], N[p10], N[p01]), min_angle(N[p10], N[p11], N[p01]));
      if (quality_a >= quality_b - 1e-12) {
        tri.elements.push_back({p00, p10, p11});
        tri.elements.push_back({p00, p11, p01});
      } else {
        tri.elements.push_back({p00, p10, p01});
        tri.elements.push_back({p10, p11, p01});
      }
    }
  }
  const auto tag_for_row = [&](int row) {
    return row == interface_row ? BoundaryTag::Interface : outer_tag;
  };
  for (int i = 0; i < n; ++i) tri.boundary.push_back({id(i, 0), id(i + 1, 0), tag_for_row(0)});
  for (int j = 0; j < n; ++j) tri.boundary.push_back({id(n, j), id(n, j + 1), outer_tag});
  for (int i = n; i > 0; --i) tri.boundary.push_back({id(i, n), id(i - 1, n), tag_for_row(n)});
  for (int j = n; j > 0; --j) tri.boundary.push_back({id(0, j), id(0, j - 1), outer_tag});
  return tri;
}

}  // namespace

std::string_view to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::Interface: return "INTERFACE";
    case BoundaryTag::FluidDirichlet: return "FLUID_DIRICHLET";
    case BoundaryTag::SolidDirichlet: return "SOLID_DIRICHLET";
  }
  return "?";
}

std::string_view to_string(GeometryPreset preset) {
  return preset == GeometryPreset::FlatChannel ? "flat-channel" : "curved-interface";
}

GeometryPreset parse_geometry_preset(std::string_view name) {
  if (name == "flat-channel") return GeometryPreset::FlatChannel;
  if (name == "curved-interface") return GeometryPreset::CurvedInterface;
  throw ConfigError("unknown geometry preset '" + std::string(name) +
                    "' (expected flat-channel or curved-interface)");
}

double Triangulation::signed_area(int element) const {
  const auto& e = elements[static_cast<std::size_t>(element)];
  const Point& a = nodes[e[0]];
  const Point& b = nodes[e[1]];
  const Point& c = nodes[e[2]];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
}

CoupledMesh::CoupledMesh(Triangulation fluid, Triangulation solid,
                         std::vector<std::pair<int, int>> interface_pairs)
    : fluid_(std::move(fluid)), solid_(std::move(solid)), pairs_(std::move(interface_pairs)) {
  if (pairs_.size() < 2) throw GeometryError("interface needs at least one facet");

  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto* tri : {&fluid_, &solid_}) {
    for (const auto& p : tri->nodes) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
  }
  diameter_ = std::hypot(xmax - xmin, ymax - ymin);

  for (const auto* tri : {&fluid_, &solid_}) {
    for (int k = 0; k < static_cast<int>(tri->elements.size()); ++k) {
      if (tri->signed_area(k) <= 0.0) throw GeometryError("triangle with non-positive area");
      const auto& e = tri->elements[static_cast<std::size_t>(k)];
      for (int m = 0; m < 3; ++m) {
        h_ = std::max(h_, distance(tri->nodes[e[m]], tri->nodes[e[(m + 1) % 3]]));
      }
    }
  }

  arclength_.assign(pairs_.size(), 0.0);
  for (std::size_t k = 0; k < pairs_.size(); ++k) {
    const Point& pf = fluid_.nodes[pairs_[k].first];
    const Point& ps = solid_.nodes[pairs_[k].second];
    if (distance(pf, ps) > 1e-12 * diameter_) {
      throw GeometryError("interface pair " + std::to_string(k) + " does not coincide");
    }
    if (k > 0) {
      const Point& prev = fluid_.nodes[pairs_[k - 1].first];
      arclength_[k] = arclength_[k - 1] + distance(prev, pf);
      // Fluid lies to the left of the left-to-right tangent, so the outward normal
      // of the fluid is the tangent rotated clockwise.
      const double len = distance(prev, pf);
      normals_.push_back({(pf.y - prev.y) / len, -(pf.x - prev.x) / len});
    }
  }
}

double CoupledMesh::min_angle_degrees() const {
  return std::min(min_angle(fluid_), min_angle(solid_)) * 180.0 / std::numbers::pi;
}

TimeGrid::TimeGrid(double t_final, int n_steps) : t_final_(t_final), n_steps_(n_steps) {
  if (!(t_final > 0.0) || n_steps < 1) {
    throw ConfigError("time grid requires T_final > 0 and n_steps >= 1");
  }
}

CoupledMesh build_geometry(GeometryPreset preset, double amplitude, int refinement) {
  if (refinement < 0 || refinement > kMaxRefinement) {
    throw ConfigError("refinement must lie in [0, " + std::to_string(kMaxRefinement) + "], got " +
                      std::to_string(refinement));
  }
  const double interface_length = 1.0;
  if (preset == GeometryPreset::FlatChannel) amplitude = 0.0;
  if (!(std::abs(amplitude) < 0.25 * interface_length)) {
    throw GeometryError("amplitude must be below 0.25 * interface length to avoid overlap");
  }

  const int n = kBaseResolution << refinement;
  const double two_pi = 2.0 * std::numbers::pi;
  auto fluid_map = [amplitude, two_pi](double x, double y) {
    return Point{x, y + amplitude * std::sin(two_pi * x) * (1.0 - y)};
  };
  auto solid_map = [amplitude, two_pi](double x, double y) {
    return Point{x, y + amplitude * std::sin(two_pi * x) * (1.0 + y)};
  };

  Triangulation fluid = structured_block(n, 0.0, 0, BoundaryTag::FluidDirichlet, fluid_map);
  Triangulation solid = structured_block(n, -1.0, n, BoundaryTag::SolidDirichlet, solid_map);
  // Both maps send y=0 to the same curve, so the shared row coincides exactly.
  for (int i = 0; i <= n; ++i) {
    solid.nodes[static_cast<std::size_t>(n * (n + 1) + i)] =
        fluid.nodes[static_cast<std::size_t>(i)];
  }

  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(n + 1));
  for (int i = 0; i <= n; ++i) pairs.emplace_back(i, n * (n + 1) + i);

  CoupledMesh mesh(std::move(fluid), std::move(solid), std::move(pairs));
  if (mesh.min_angle_degrees() < kMinAngleDegrees) {
    throw GeometryError("mesh quality check failed: minimum angle " +
                        std::to_string(mesh.min_angle_degrees()) + " deg below " +
                        std::to_string(kMinAngleDegrees));
  }
  return mesh;
}

std::vector<double> interface_restriction(const CoupledMesh& mesh, Side side,
                                          std::span<const double> field, int components) {
  const auto& tri = mesh.side(side);
  if (components < 1 || field.size() != tri.nodes.size() * static_cast<std::size_t>(components)) {
    throw ShapeError("interface_restriction: field has " + std::to_string(field.size()) +
                     " entries, expected " + std::to_string(tri.nodes.size()) + " x " +
                     std::to_string(components));
  }
  std::vector<double> out;
  out.reserve(mesh.interface_pairs().size() * static_cast<std::size_t>(components));
  for (const auto& [f, s] : mesh.interface_pairs()) {
    const int node = side == Side::Fluid ? f : s;
    for (int c = 0; c < components; ++c) {
      out.push_back(field[static_cast<std::size_t>(node * components + c)]);
    }
  }
  return out;
}

void write_mesh_csv(const CoupledMesh& mesh, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (Side side : {Side::Fluid, Side::Solid}) {
    const std::string prefix = side == Side::Fluid ? "fluid" : "solid";
    const auto& tri = mesh.side(side);
    CsvWriter nodes(dir / (prefix + "_nodes.csv"), {"id", "x", "y"});
    for (std::size_t i = 0; i < tri.nodes.size(); ++i) nodes.row(i, tri.nodes[i].x, tri.nodes[i].y);
    CsvWriter elements(dir / (prefix + "_elements.csv"), {"id", "n0", "n1", "n2"});
    for (std::size_t k = 0; k < tri.elements.size(); ++k) {
      const auto& e = tri.elements[k];
      elements.row(k, e[0], e[1], e[2]);
    }
    CsvWriter boundary(dir / (prefix + "_boundary.csv"), {"facet", "a", "b", "tag"});
    for (std::size_t k = 0; k < tri.boundary.size(); ++k) {
      const auto& f = tri.boundary[k];
      boundary.row(k, f.a, f.b, to_string(f.tag));
    }
  }
}

}  // namespace fsi
