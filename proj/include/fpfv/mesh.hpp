#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "fpfv/geometry.hpp"

namespace fpfv {

// Admissible TPFA meshes of polygonal 2D domains: triangulations whose cell
// centers are the circumcenters, so that the segment between adjacent centers
// is orthogonal to the shared facet.

struct Cell {
  double area = 0.0;
  Vec2 center;  // circumcenter of the triangle
  double diameter = 0.0;
};

struct InteriorFacet {
  int left = -1;   // lower cell index; the normal points left -> right
  int right = -1;
  double length = 0.0;    // m_sigma
  double dist = 0.0;      // d_sigma = (x_L - x_K) . n, positive when admissible
  Vec2 normal;            // unit normal of the facet, oriented left -> right
  Vec2 midpoint;          // facet barycenter x_sigma
};

struct BoundaryFacet {
  int owner = -1;
  double length = 0.0;
  double center_dist = 0.0;  // distance from the owner's center to the facet line
  Vec2 normal;               // outward unit normal
  Vec2 midpoint;
};

struct Mesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;  // CCW vertex indices
  std::vector<Cell> cells;
  std::vector<InteriorFacet> interior_facets;
  std::vector<BoundaryFacet> boundary_facets;
  std::vector<std::vector<int>> cell_interior;  // per-cell interior facet ids
  std::vector<std::vector<int>> cell_boundary;  // per-cell boundary facet ids
  double domain_area = 0.0;                     // m_Omega from the boundary loop

  int n_cells() const { return static_cast<int>(cells.size()); }
  int n_interior() const { return static_cast<int>(interior_facets.size()); }
  double size() const;   // max cell diameter
  double d_min() const;  // min interior facet distance
  double total_cell_area() const;
};

struct AdmissibilityCheck {
  std::string name;
  bool pass = false;
  std::string detail;  // first offending entity when failing
};

struct AdmissibilityReport {
  bool pass = false;
  std::vector<AdmissibilityCheck> checks;
};

/// Assemble cells and facets from a triangulation and establish all mesh
/// invariants; throws ValidationError when the mesh is not admissible.
Mesh build_mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles);

/// The bundled acute 8-triangle triangulation of the unit square.
Mesh base_mesh();

Mesh load_mesh(const std::string& path);
Mesh parse_mesh(std::istream& in);
void save_mesh(const Mesh& mesh, const std::string& path);
void write_mesh(const Mesh& mesh, std::ostream& out);

/// Split every triangle into m^2 similar congruent copies.
Mesh refine_subdivision(const Mesh& mesh, int m);

/// Tile the unit square with an n x n grid of copies of the base scaled by
/// 1/n; requires the base boundary traces to be translation-compatible.
Mesh refine_repetition(const Mesh& base, int n);

/// Run all admissibility checks without throwing.
AdmissibilityReport validate_admissible(const Mesh& mesh);

struct MeshQuality {
  double zeta = 0.0;    // max of the regularity ratios
  double size = 0.0;    // max cell diameter
  double d_min = 0.0;   // min interior facet distance
  std::vector<double> iso_defect;        // per-cell isotropy defect
  double iso_threshold = 0.05;           // defect cutoff defining the isotropic subset
  double eps_iso_max = 0.0;              // max defect over the isotropic subset
  double iso_fraction = 0.0;             // area fraction of the isotropic subset
  double superadmissibility_defect = 0.0;  // max |x_sigma - (x_K + x_L)/2|
};

MeshQuality quality_metrics(const Mesh& mesh, double iso_threshold = 0.05);

}  // namespace fpfv
