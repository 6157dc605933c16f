#include "fpfv/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "fpfv/errors.hpp"

namespace fpfv {

namespace {

Vec2 tri_centroid(Vec2 a, Vec2 b, Vec2 c) {
  return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
}

double point_line_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 e = b - a;
  return std::abs((p - a).x * e.y - (p - a).y * e.x) / e.norm();
}

double point_triangle_distance(Vec2 p, Vec2 a, Vec2 b, Vec2 c) {
  auto seg = [](Vec2 q, Vec2 u, Vec2 v) {
    const Vec2 e = v - u;
    const double t = std::clamp((q - u).dot(e) / e.norm2(), 0.0, 1.0);
    return (q - (u + t * e)).norm();
  };
  const double s1 = tri_signed_area(a, b, p);
  const double s2 = tri_signed_area(b, c, p);
  const double s3 = tri_signed_area(c, a, p);
  if (s1 >= 0 && s2 >= 0 && s3 >= 0) return 0.0;  // inside a CCW triangle
  return std::min({seg(p, a, b), seg(p, b, c), seg(p, c, a)});
}

}  // namespace

double Mesh::size() const {
  double s = 0.0;
  for (const Cell& c : cells) s = std::max(s, c.diameter);
  return s;
}

double Mesh::d_min() const {
  double d = std::numeric_limits<double>::infinity();
  for (const InteriorFacet& f : interior_facets) d = std::min(d, f.dist);
  return d;
}

double Mesh::total_cell_area() const {
  double a = 0.0;
  for (const Cell& c : cells) a += c.area;
  return a;
}

Mesh build_mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles) {
  Mesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.triangles = std::move(triangles);
  const int nv = static_cast<int>(mesh.vertices.size());
  const int nt = static_cast<int>(mesh.triangles.size());
  if (nt == 0) throw ValidationError("mesh has no triangles");

  mesh.cells.resize(nt);
  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangles[t];
    for (int v : tri) {
      if (v < 0 || v >= nv) {
        throw ValidationError("triangle " + std::to_string(t) + " has vertex index out of range");
      }
    }
    const Vec2 a = mesh.vertices[tri[0]];
    const Vec2 b = mesh.vertices[tri[1]];
    const Vec2 c = mesh.vertices[tri[2]];
    const double area = tri_signed_area(a, b, c);
    if (!(area > 0.0)) {
      throw ValidationError("triangle " + std::to_string(t) +
                            " is degenerate or not counter-clockwise");
    }
    mesh.cells[t] = {area, circumcenter(a, b, c), tri_diameter(a, b, c)};
  }

  // Facets, keyed by sorted vertex pair; sorted keys give a deterministic
  // canonical facet order.
  std::map<std::pair<int, int>, std::vector<std::pair<int, std::pair<int, int>>>> edges;
  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangles[t];
    for (int e = 0; e < 3; ++e) {
      const int v1 = tri[e];
      const int v2 = tri[(e + 1) % 3];
      edges[{std::min(v1, v2), std::max(v1, v2)}].push_back({t, {v1, v2}});
    }
  }

  mesh.cell_interior.resize(nt);
  mesh.cell_boundary.resize(nt);
  for (const auto& [key, owners] : edges) {
    const Vec2 va = mesh.vertices[key.first];
    const Vec2 vb = mesh.vertices[key.second];
    const Vec2 e = vb - va;
    const double len = e.norm();
    const Vec2 mid = (va + vb) * 0.5;
    if (owners.size() == 1) {
      const int t = owners[0].first;
      BoundaryFacet f;
      f.owner = t;
      f.length = len;
      f.midpoint = mid;
      Vec2 n{e.y / len, -e.x / len};
      const auto& tri = mesh.triangles[t];
      const Vec2 cen = tri_centroid(mesh.vertices[tri[0]], mesh.vertices[tri[1]],
                                    mesh.vertices[tri[2]]);
      if (n.dot(mid - cen) < 0.0) n = {-n.x, -n.y};
      f.normal = n;
      f.center_dist = point_line_distance(mesh.cells[t].center, va, vb);
      mesh.cell_boundary[t].push_back(static_cast<int>(mesh.boundary_facets.size()));
      mesh.boundary_facets.push_back(f);
    } else if (owners.size() == 2) {
      int tk = owners[0].first;
      int tl = owners[1].first;
      if (tk == tl) throw ValidationError("triangle repeats an edge");
      if (tk > tl) std::swap(tk, tl);
      InteriorFacet f;
      f.left = tk;
      f.right = tl;
      f.length = len;
      f.midpoint = mid;
      Vec2 n{e.y / len, -e.x / len};
      const auto& trik = mesh.triangles[tk];
      const Vec2 cenk = tri_centroid(mesh.vertices[trik[0]], mesh.vertices[trik[1]],
                                     mesh.vertices[trik[2]]);
      const auto& tril = mesh.triangles[tl];
      const Vec2 cenl = tri_centroid(mesh.vertices[tril[0]], mesh.vertices[tril[1]],
                                     mesh.vertices[tril[2]]);
      if (n.dot(cenl - cenk) < 0.0) n = {-n.x, -n.y};
      f.normal = n;
      f.dist = (mesh.cells[tl].center - mesh.cells[tk].center).dot(n);
      const int id = static_cast<int>(mesh.interior_facets.size());
      mesh.cell_interior[tk].push_back(id);
      mesh.cell_interior[tl].push_back(id);
      mesh.interior_facets.push_back(f);
    } else {
      throw ValidationError("edge shared by more than two triangles");
    }
  }

  // m_Omega from the boundary loop: (1/2) sum m_sigma x_sigma . n.
  double area = 0.0;
  for (const BoundaryFacet& f : mesh.boundary_facets) {
    area += 0.5 * f.length * f.midpoint.dot(f.normal);
  }
  mesh.domain_area = area;

  const AdmissibilityReport report = validate_admissible(mesh);
  if (!report.pass) {
    std::string msg = "mesh is not admissible:";
    for (const auto& chk : report.checks) {
      if (!chk.pass) msg += " [" + chk.name + "] " + chk.detail;
    }
    throw ValidationError(msg);
  }
  return mesh;
}

AdmissibilityReport validate_admissible(const Mesh& mesh) {
  AdmissibilityReport report;
  auto add = [&](const std::string& name, bool pass, const std::string& detail) {
    report.checks.push_back({name, pass, pass ? "" : detail});
  };

  {
    const double sum = mesh.total_cell_area();
    const bool ok = std::abs(sum - mesh.domain_area) <= 1e-12 * std::abs(mesh.domain_area);
    std::ostringstream d;
    d << "sum of cell areas " << sum << " vs domain area " << mesh.domain_area;
    add("tessellation", ok, d.str());
  }

  {
    bool ok = true;
    std::string detail;
    for (size_t i = 0; i < mesh.interior_facets.size(); ++i) {
      const InteriorFacet& f = mesh.interior_facets[i];
      const double nerr = std::abs(f.normal.norm() - 1.0);
      if (!(f.length > 0.0) || !(f.dist > 0.0) || nerr > 1e-12) {
        ok = false;
        std::ostringstream d;
        d << "interior facet " << i << " between cells " << f.left << "," << f.right
          << ": m_sigma=" << f.length << " d_sigma=" << f.dist;
        detail = d.str();
        break;
      }
    }
    for (size_t i = 0; ok && i < mesh.boundary_facets.size(); ++i) {
      if (!(mesh.boundary_facets[i].length > 0.0)) {
        ok = false;
        detail = "boundary facet " + std::to_string(i) + " has nonpositive length";
      }
    }
    add("facet positivity", ok, detail);
  }

  {
    // Orthogonality: (x_L - x_K)/d_sigma must equal the facet normal.
    bool ok = true;
    std::string detail;
    for (size_t i = 0; i < mesh.interior_facets.size(); ++i) {
      const InteriorFacet& f = mesh.interior_facets[i];
      const Vec2 dx = mesh.cells[f.right].center - mesh.cells[f.left].center;
      const double d = dx.norm();
      if (!(d > 0.0)) {
        ok = false;
        detail = "interior facet " + std::to_string(i) + " has coincident cell centers";
        break;
      }
      const Vec2 dir = dx / d;
      if (std::abs(dir.x - f.normal.x) > 1e-10 || std::abs(dir.y - f.normal.y) > 1e-10) {
        std::ostringstream dmsg;
        dmsg << "interior facet " << i << " between cells " << f.left << "," << f.right
             << ": center direction (" << dir.x << "," << dir.y << ") vs normal ("
             << f.normal.x << "," << f.normal.y << ")";
        ok = false;
        detail = dmsg.str();
        break;
      }
    }
    add("orthogonality", ok, detail);
  }

  {
    std::vector<std::pair<std::pair<double, double>, int>> centers;
    centers.reserve(mesh.cells.size());
    for (int k = 0; k < mesh.n_cells(); ++k) {
      centers.push_back({{mesh.cells[k].center.x, mesh.cells[k].center.y}, k});
    }
    std::sort(centers.begin(), centers.end());
    bool ok = true;
    std::string detail;
    for (size_t i = 0; i + 1 < centers.size(); ++i) {
      if (centers[i].first == centers[i + 1].first) {
        ok = false;
        detail = "cells " + std::to_string(centers[i].second) + " and " +
                 std::to_string(centers[i + 1].second) + " share the center";
        break;
      }
    }
    add("distinct centers", ok, detail);
  }

  {
    std::vector<int> icount(mesh.interior_facets.size(), 0);
    std::vector<int> bcount(mesh.boundary_facets.size(), 0);
    for (const auto& lst : mesh.cell_interior) {
      for (int f : lst) ++icount[f];
    }
    for (const auto& lst : mesh.cell_boundary) {
      for (int f : lst) ++bcount[f];
    }
    bool ok = true;
    std::string detail;
    for (size_t i = 0; i < icount.size(); ++i) {
      if (icount[i] != 2) {
        ok = false;
        detail = "interior facet " + std::to_string(i) + " appears in " +
                 std::to_string(icount[i]) + " adjacency lists";
        break;
      }
    }
    for (size_t i = 0; ok && i < bcount.size(); ++i) {
      if (bcount[i] != 1) {
        ok = false;
        detail = "boundary facet " + std::to_string(i) + " appears in " +
                 std::to_string(bcount[i]) + " adjacency lists";
        break;
      }
    }
    add("facet incidence", ok, detail);
  }

  report.pass = std::all_of(report.checks.begin(), report.checks.end(),
                            [](const AdmissibilityCheck& c) { return c.pass; });
  return report;
}

Mesh base_mesh() {
  // Acute 8-triangle triangulation of the unit square with two interior
  // vertices; translation-compatible boundary traces (midpoints of the bottom
  // and top sides), dyadic coordinates, largest angle below 85.6 degrees.
  std::vector<Vec2> v = {
      {0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0},
      {0.5, 0.0}, {0.5, 1.0},
      {0.4375, 0.1953125}, {0.5625, 0.1953125},
  };
  std::vector<std::array<int, 3>> t = {
      {0, 4, 6}, {4, 1, 7}, {1, 2, 7}, {2, 5, 7},
      {3, 6, 5}, {0, 6, 3}, {4, 7, 6}, {7, 5, 6},
  };
  return build_mesh(std::move(v), std::move(t));
}

Mesh parse_mesh(std::istream& in) {
  auto next_line = [&](std::string& line) {
    while (std::getline(in, line)) {
      const auto pos = line.find_first_not_of(" \t\r");
      if (pos == std::string::npos) continue;
      return true;
    }
    return false;
  };
  std::string line, word;
  if (!next_line(line)) throw InputError("mesh file: missing 'vertices' header");
  std::istringstream hdr(line);
  size_t nv = 0;
  if (!(hdr >> word >> nv) || word != "vertices") {
    throw InputError("mesh file: expected 'vertices N', got '" + line + "'");
  }
  std::vector<Vec2> vertices(nv);
  for (size_t i = 0; i < nv; ++i) {
    if (!next_line(line)) throw InputError("mesh file: truncated vertex list");
    std::istringstream ls(line);
    if (!(ls >> vertices[i].x >> vertices[i].y)) {
      throw InputError("mesh file: bad vertex line '" + line + "'");
    }
  }
  if (!next_line(line)) throw InputError("mesh file: missing 'triangles' header");
  std::istringstream hdr2(line);
  size_t nt = 0;
  if (!(hdr2 >> word >> nt) || word != "triangles") {
    throw InputError("mesh file: expected 'triangles M', got '" + line + "'");
  }
  std::vector<std::array<int, 3>> triangles(nt);
  for (size_t i = 0; i < nt; ++i) {
    if (!next_line(line)) throw InputError("mesh file: truncated triangle list");
    std::istringstream ls(line);
    if (!(ls >> triangles[i][0] >> triangles[i][1] >> triangles[i][2])) {
      throw InputError("mesh file: bad triangle line '" + line + "'");
    }
  }
  return build_mesh(std::move(vertices), std::move(triangles));
}

Mesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open mesh file '" + path + "'");
  return parse_mesh(in);
}

void write_mesh(const Mesh& mesh, std::ostream& out) {
  out << "vertices " << mesh.vertices.size() << "\n";
  char buf[64];
  for (const Vec2& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "%.16e %.16e\n", v.x, v.y);
    out << buf;
  }
  out << "triangles " << mesh.triangles.size() << "\n";
  for (const auto& t : mesh.triangles) {
    out << t[0] << " " << t[1] << " " << t[2] << "\n";
  }
}

void save_mesh(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  write_mesh(mesh, out);
}

Mesh refine_subdivision(const Mesh& mesh, int m) {
  if (m < 2) throw InputError("refine_subdivision requires m >= 2");
  std::vector<Vec2> verts = mesh.vertices;
  // Points along each global edge are generated once, from the low-index
  // vertex, so that shared edges get bitwise identical coordinates.
  std::map<std::pair<int, int>, std::vector<int>> edge_points;
  auto edge_ids = [&](int v1, int v2) -> const std::vector<int>& {
    const std::pair<int, int> key{std::min(v1, v2), std::max(v1, v2)};
    auto it = edge_points.find(key);
    if (it == edge_points.end()) {
      std::vector<int> ids(m - 1);
      const Vec2 a = mesh.vertices[key.first];
      const Vec2 d = mesh.vertices[key.second] - a;
      for (int k = 1; k < m; ++k) {
        ids[k - 1] = static_cast<int>(verts.size());
        verts.push_back(a + (static_cast<double>(k) / m) * d);
      }
      it = edge_points.emplace(key, std::move(ids)).first;
    }
    return it->second;
  };

  std::vector<std::array<int, 3>> tris;
  tris.reserve(mesh.triangles.size() * static_cast<size_t>(m) * m);
  std::vector<int> lattice(static_cast<size_t>(m + 1) * (m + 1));
  auto at = [&](int i, int j) -> int& { return lattice[static_cast<size_t>(j) * (m + 1) + i]; };

  for (const auto& tri : mesh.triangles) {
    const int v0 = tri[0], v1 = tri[1], v2 = tri[2];
    at(0, 0) = v0;
    at(m, 0) = v1;
    at(0, m) = v2;
    const auto& e01 = edge_ids(v0, v1);
    const auto& e12 = edge_ids(v1, v2);
    const auto& e02 = edge_ids(v0, v2);
    for (int k = 1; k < m; ++k) {
      at(k, 0) = v0 < v1 ? e01[k - 1] : e01[m - 1 - k];
      at(m - k, k) = v1 < v2 ? e12[k - 1] : e12[m - 1 - k];
      at(0, k) = v0 < v2 ? e02[k - 1] : e02[m - 1 - k];
    }
    const Vec2 a = mesh.vertices[v0];
    const Vec2 db = mesh.vertices[v1] - a;
    const Vec2 dc = mesh.vertices[v2] - a;
    for (int j = 1; j < m; ++j) {
      for (int i = 1; i + j < m; ++i) {
        at(i, j) = static_cast<int>(verts.size());
        verts.push_back(a + (static_cast<double>(i) / m) * db + (static_cast<double>(j) / m) * dc);
      }
    }
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i + j < m; ++i) {
        tris.push_back({at(i, j), at(i + 1, j), at(i, j + 1)});
        if (i + j < m - 1) {
          tris.push_back({at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)});
        }
      }
    }
  }
  return build_mesh(std::move(verts), std::move(tris));
}

Mesh refine_repetition(const Mesh& base, int n) {
  if (n < 1) throw InputError("refine_repetition requires n >= 1");
  // The base must tessellate the unit square.
  if (std::abs(base.total_cell_area() - 1.0) > 1e-12) {
    throw ValidationError("refine_repetition: base does not tessellate the unit square");
  }
  std::vector<double> bottom, top, left, right;
  for (const Vec2& v : base.vertices) {
    const bool on_x0 = v.x == 0.0, on_x1 = v.x == 1.0;
    const bool on_y0 = v.y == 0.0, on_y1 = v.y == 1.0;
    if (!(v.x >= 0.0 && v.x <= 1.0 && v.y >= 0.0 && v.y <= 1.0)) {
      throw ValidationError("refine_repetition: base vertex outside the unit square");
    }
    if (on_y0 && !on_x0 && !on_x1) bottom.push_back(v.x);
    if (on_y1 && !on_x0 && !on_x1) top.push_back(v.x);
    if (on_x0 && !on_y0 && !on_y1) left.push_back(v.y);
    if (on_x1 && !on_y0 && !on_y1) right.push_back(v.y);
  }
  std::sort(bottom.begin(), bottom.end());
  std::sort(top.begin(), top.end());
  std::sort(left.begin(), left.end());
  std::sort(right.begin(), right.end());
  auto traces_match = [](const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
      if (std::abs(a[i] - b[i]) > 1e-12) return false;
    }
    return true;
  };
  if (!traces_match(bottom, top) || !traces_match(left, right)) {
    throw ValidationError("refine_repetition: boundary traces are not translation-compatible");
  }

  std::vector<Vec2> verts;
  std::vector<std::array<int, 3>> tris;
  std::map<std::pair<double, double>, int> index;
  auto vertex_id = [&](Vec2 p) {
    auto [it, inserted] = index.try_emplace({p.x, p.y}, static_cast<int>(verts.size()));
    if (inserted) verts.push_back(p);
    return it->second;
  };
  for (int cy = 0; cy < n; ++cy) {
    for (int cx = 0; cx < n; ++cx) {
      std::vector<int> remap(base.vertices.size());
      for (size_t i = 0; i < base.vertices.size(); ++i) {
        const Vec2 v = base.vertices[i];
        remap[i] = vertex_id({(v.x + cx) / n, (v.y + cy) / n});
      }
      for (const auto& t : base.triangles) {
        tris.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});
      }
    }
  }
  return build_mesh(std::move(verts), std::move(tris));
}

MeshQuality quality_metrics(const Mesh& mesh, double iso_threshold) {
  MeshQuality q;
  q.iso_threshold = iso_threshold;
  q.size = mesh.size();
  q.d_min = mesh.d_min();

  constexpr int d = 2;
  double r_volume = 0.0, r_center = 0.0, r_facet = 0.0, r_dsigma = 0.0;
  for (int k = 0; k < mesh.n_cells(); ++k) {
    const Cell& cell = mesh.cells[k];
    double facet_sum = 0.0;
    double dmin_k = std::numeric_limits<double>::infinity();
    for (int fi : mesh.cell_interior[k]) {
      const InteriorFacet& f = mesh.interior_facets[fi];
      facet_sum += f.length * f.dist;
      dmin_k = std::min(dmin_k, f.dist);
    }
    r_volume = std::max(r_volume, facet_sum / (2.0 * d * cell.area));
    const auto& tri = mesh.triangles[k];
    const double dist = point_triangle_distance(cell.center, mesh.vertices[tri[0]],
                                                mesh.vertices[tri[1]], mesh.vertices[tri[2]]);
    r_center = std::max(r_center, dist / cell.diameter);
    if (!mesh.cell_interior[k].empty()) {
      r_facet = std::max(r_facet, cell.diameter / dmin_k);
    }
  }
  for (const InteriorFacet& f : mesh.interior_facets) {
    r_dsigma = std::max(r_dsigma, f.dist / q.size);
  }
  for (const BoundaryFacet& f : mesh.boundary_facets) {
    r_dsigma = std::max(r_dsigma, f.center_dist / q.size);
  }
  q.zeta = std::max({r_volume, r_center, r_facet, r_dsigma});

  // Per-cell isotropy defect: eigenvalue deviation of
  // M_K = (1/2 m_K) sum over all facets of m_sigma d_sigma n (x) n, with the
  // boundary-facet d_sigma taken as the center-to-facet distance.
  q.iso_defect.assign(mesh.cells.size(), 0.0);
  double iso_area = 0.0;
  q.eps_iso_max = 0.0;
  for (int k = 0; k < mesh.n_cells(); ++k) {
    double mxx = 0.0, mxy = 0.0, myy = 0.0;
    auto accumulate = [&](double w, Vec2 nrm) {
      mxx += w * nrm.x * nrm.x;
      mxy += w * nrm.x * nrm.y;
      myy += w * nrm.y * nrm.y;
    };
    for (int fi : mesh.cell_interior[k]) {
      const InteriorFacet& f = mesh.interior_facets[fi];
      accumulate(f.length * f.dist, f.normal);
    }
    for (int fi : mesh.cell_boundary[k]) {
      const BoundaryFacet& f = mesh.boundary_facets[fi];
      accumulate(f.length * f.center_dist, f.normal);
    }
    const double scale = 1.0 / (2.0 * mesh.cells[k].area);
    mxx *= scale;
    mxy *= scale;
    myy *= scale;
    const double mean = 0.5 * (mxx + myy);
    const double disc = std::sqrt(0.25 * (mxx - myy) * (mxx - myy) + mxy * mxy);
    const double lmax = mean + disc;
    const double lmin = mean - disc;
    const double defect = std::max(std::abs(lmax - 1.0), std::abs(1.0 - lmin));
    q.iso_defect[k] = defect;
    if (defect <= iso_threshold) {
      iso_area += mesh.cells[k].area;
      q.eps_iso_max = std::max(q.eps_iso_max, defect);
    }
  }
  q.iso_fraction = iso_area / mesh.total_cell_area();

  for (const InteriorFacet& f : mesh.interior_facets) {
    const Vec2 mid_centers = (mesh.cells[f.left].center + mesh.cells[f.right].center) * 0.5;
    q.superadmissibility_defect =
        std::max(q.superadmissibility_defect, (f.midpoint - mid_centers).norm());
  }
  return q;
}

}  // namespace fpfv
