#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace fsi {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

enum class BoundaryTag { Interface, FluidDirichlet, SolidDirichlet };
enum class Side { Fluid, Solid };
enum class GeometryPreset { FlatChannel, CurvedInterface };

std::string_view to_string(BoundaryTag tag);
std::string_view to_string(GeometryPreset preset);
GeometryPreset parse_geometry_preset(std::string_view name);

struct BoundaryFacet {
  int a = 0;
  int b = 0;
  BoundaryTag tag = BoundaryTag::FluidDirichlet;
};

/// Linear triangulation of one subdomain. Elements are counter-clockwise.
struct Triangulation {
  std::vector<Point> nodes;
  std::vector<std::array<int, 3>> elements;
  std::vector<BoundaryFacet> boundary;

  double signed_area(int element) const;
};

/// Conforming fluid/solid triangulations sharing the interface Sigma.
///
/// Interface data is stored in canonical order: ascending arclength from the
/// left endpoint of Sigma. Facet k of the interface joins interface pair k and
/// k+1; its normal is the unit normal pointing out of the fluid into the solid.
class CoupledMesh {
 public:
  CoupledMesh(Triangulation fluid, Triangulation solid,
              std::vector<std::pair<int, int>> interface_pairs);

  const Triangulation& fluid() const { return fluid_; }
  const Triangulation& solid() const { return solid_; }
  const Triangulation& side(Side s) const { return s == Side::Fluid ? fluid_ : solid_; }

  /// (fluid node, solid node) for each interface vertex, ascending arclength.
  const std::vector<std::pair<int, int>>& interface_pairs() const { return pairs_; }
  const std::vector<double>& interface_arclength() const { return arclength_; }
  const std::vector<Point>& interface_normals() const { return normals_; }
  std::size_t interface_facet_count() const { return normals_.size(); }

  double h() const { return h_; }
  double diameter() const { return diameter_; }
  double min_angle_degrees() const;

 private:
  Triangulation fluid_;
  Triangulation solid_;
  std::vector<std::pair<int, int>> pairs_;
  std::vector<double> arclength_;
  std::vector<Point> normals_;
  double h_ = 0.0;
  double diameter_ = 0.0;
};

struct TimeGrid {
  TimeGrid(double t_final, int n_steps);

  double t_final() const { return t_final_; }
  int n_steps() const { return n_steps_; }
  double dt() const { return t_final_ / n_steps_; }
  double time(int n) const { return n == n_steps_ ? t_final_ : n * dt(); }

 private:
  double t_final_;
  int n_steps_;
};

constexpr int kBaseResolution = 4;
constexpr int kMaxRefinement = 8;
constexpr double kMinAngleDegrees = 20.0;

/// Fluid occupies the unit square above Sigma, the solid the unit square below.
/// The curved preset maps the shared edge y=0 to y = amplitude*sin(2*pi*x) by a
/// vertical shear that leaves the outer edges y=+1 and y=-1 fixed.
CoupledMesh build_geometry(GeometryPreset preset, double amplitude, int refinement);

/// Values of a nodal field at the interface vertices of one side, in canonical order.
/// `field` holds `components` interleaved values per node.
std::vector<double> interface_restriction(const CoupledMesh& mesh, Side side,
                                          std::span<const double> field, int components = 1);

/// Writes {fluid,solid}_{nodes,elements,boundary}.csv into `dir`.
void write_mesh_csv(const CoupledMesh& mesh, const std::filesystem::path& dir);

}  // namespace fsi
