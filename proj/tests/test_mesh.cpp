#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "fpfv/errors.hpp"
#include "fpfv/mesh.hpp"

using namespace fpfv;

namespace {

bool all_acute(const Mesh& mesh) {
  for (const auto& t : mesh.triangles) {
    const Vec2 a = mesh.vertices[t[0]], b = mesh.vertices[t[1]], c = mesh.vertices[t[2]];
    if ((b - a).dot(c - a) <= 0.0) return false;
    if ((a - b).dot(c - b) <= 0.0) return false;
    if ((a - c).dot(b - c) <= 0.0) return false;
  }
  return true;
}

bool circumcenters_interior(const Mesh& mesh) {
  for (int k = 0; k < mesh.n_cells(); ++k) {
    const auto& t = mesh.triangles[k];
    const Vec2 a = mesh.vertices[t[0]], b = mesh.vertices[t[1]], c = mesh.vertices[t[2]];
    const Vec2 p = mesh.cells[k].center;
    if (tri_signed_area(a, b, p) <= 0.0 || tri_signed_area(b, c, p) <= 0.0 ||
        tri_signed_area(c, a, p) <= 0.0) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("embedded base: 8 acute triangles tessellating the unit square") {
  const Mesh base = base_mesh();
  CHECK(base.n_cells() == 8);
  CHECK(all_acute(base));
  CHECK(circumcenters_interior(base));
  CHECK(base.total_cell_area() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(base.domain_area == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(base.d_min() > 0.0);
  CHECK(validate_admissible(base).pass);
}

TEST_CASE("right-triangle diagonal split is rejected: coincident circumcenters") {
  std::vector<Vec2> v = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  std::vector<std::array<int, 3>> t = {{0, 1, 2}, {0, 2, 3}};
  CHECK_THROWS_AS(build_mesh(v, t), ValidationError);
  try {
    build_mesh(v, t);
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("orthogonality") != std::string::npos);
  }
}

TEST_CASE("subdivision: counts, angles, area, size halving") {
  const Mesh base = base_mesh();
  const Mesh l1 = refine_subdivision(base, 2);
  CHECK(l1.n_cells() == 32);
  CHECK(all_acute(l1));
  CHECK(l1.total_cell_area() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(l1.size() == doctest::Approx(0.5 * base.size()).epsilon(1e-13));
  CHECK(l1.d_min() > 0.0);

  const Mesh l2 = refine_subdivision(l1, 2);
  CHECK(l2.n_cells() == 128);
  CHECK(l2.size() == doctest::Approx(0.25 * base.size()).epsilon(1e-13));
  CHECK(l2.total_cell_area() == doctest::Approx(1.0).epsilon(1e-13));

  const Mesh m3 = refine_subdivision(base, 3);
  CHECK(m3.n_cells() == 8 * 9);
  CHECK(all_acute(m3));
  CHECK(m3.size() == doctest::Approx(base.size() / 3.0).epsilon(1e-13));

  CHECK_THROWS_AS(refine_subdivision(base, 1), InputError);
}

TEST_CASE("repetition: tiling, exact size scaling, quality invariance") {
  const Mesh base = base_mesh();
  const Mesh rep2 = refine_repetition(base, 2);
  CHECK(rep2.n_cells() == 32);
  CHECK(rep2.total_cell_area() == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(rep2.size() == doctest::Approx(0.5 * base.size()).epsilon(1e-14));
  CHECK(validate_admissible(rep2).pass);

  // quality is invariant across repetition levels: every local configuration
  // of the 4x4 tiling (copy interiors, seams, seam crossings) already occurs
  // in the 2x2 tiling at twice the scale
  const Mesh rep4 = refine_repetition(base, 4);
  const MeshQuality q2 = quality_metrics(rep2);
  const MeshQuality q4 = quality_metrics(rep4);
  CHECK(q4.zeta == doctest::Approx(q2.zeta).epsilon(1e-9));
  CHECK(q4.d_min == doctest::Approx(0.5 * q2.d_min).epsilon(1e-9));
  // the defect value set repeats across levels (multiplicities shift between
  // boundary and seam bands as the copy count grows)
  auto value_set = [](const std::vector<double>& defects) {
    std::set<long long> values;
    for (double x : defects) values.insert(llround(x * 1e9));
    return values;
  };
  CHECK(value_set(q2.iso_defect) == value_set(q4.iso_defect));

  // a base without matching traces cannot be tiled
  std::vector<Vec2> v = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0}, {0.25, 1},
                         {0.4375, 0.1953125}, {0.5625, 0.1953125}};
  std::vector<std::array<int, 3>> t = {{0, 4, 6}, {4, 1, 7}, {1, 2, 7}, {2, 5, 7},
                                       {3, 6, 5}, {0, 6, 3}, {4, 7, 6}, {7, 5, 6}};
  CHECK_THROWS_AS(refine_repetition(build_mesh(v, t), 2), ValidationError);
}

TEST_CASE("validator reports perturbed centers and duplicated centers") {
  Mesh mesh = refine_subdivision(base_mesh(), 2);
  CHECK(validate_admissible(mesh).pass);

  Mesh perturbed = mesh;
  perturbed.cells[5].center.x += 1e-3;
  const AdmissibilityReport rep = validate_admissible(perturbed);
  CHECK(!rep.pass);
  bool ortho_failed = false;
  for (const auto& c : rep.checks) {
    if (c.name == "orthogonality" && !c.pass) ortho_failed = true;
  }
  CHECK(ortho_failed);

  Mesh dup = mesh;
  dup.cells[3].center = dup.cells[17].center;
  const AdmissibilityReport rep2 = validate_admissible(dup);
  CHECK(!rep2.pass);
  bool distinct_failed = false;
  for (const auto& c : rep2.checks) {
    if (c.name == "distinct centers" && !c.pass) distinct_failed = true;
  }
  CHECK(distinct_failed);
}

TEST_CASE("mesh file round-trip and parse errors") {
  const Mesh mesh = refine_subdivision(base_mesh(), 2);
  std::ostringstream out;
  write_mesh(mesh, out);
  std::istringstream in(out.str());
  const Mesh back = parse_mesh(in);
  REQUIRE(back.n_cells() == mesh.n_cells());
  for (int k = 0; k < mesh.n_cells(); ++k) {
    CHECK(back.cells[k].area == mesh.cells[k].area);
    CHECK(back.cells[k].center.x == mesh.cells[k].center.x);
  }
  std::istringstream bad("vertices 2\n0 0\n1 0\ntriangles 1\n0 1 5\n");
  CHECK_THROWS_AS(parse_mesh(bad), ValidationError);
  std::istringstream bad2("points 2\n");
  CHECK_THROWS_AS(parse_mesh(bad2), InputError);
}

TEST_CASE("quality metrics: superadmissible interior children, d_min similarity") {
  const Mesh base = base_mesh();
  const Mesh fine = refine_subdivision(base, 4);
  const MeshQuality q = quality_metrics(fine);
  const MeshQuality q2 = quality_metrics(refine_subdivision(base, 2));
  CHECK(q.zeta >= 1.0);
  CHECK(q.size == doctest::Approx(base.size() / 4.0).epsilon(1e-13));
  // every adjacent cell pair at level m = 4 is a half-scale copy of a pair
  // already present at m = 2, so d_min and zeta follow by similarity (the
  // base itself lacks the within-parent pairs and is not comparable)
  CHECK(q.d_min == doctest::Approx(q2.d_min / 2.0).epsilon(1e-12));
  CHECK(q.zeta == doctest::Approx(q2.zeta).epsilon(1e-12));

  // children strictly inside a parent triangle are point reflections of
  // their neighbors through the shared edge midpoints, hence exactly
  // superadmissible: their isotropy matrix is the identity
  double best_defect = 1.0;
  for (int k = 0; k < fine.n_cells(); ++k) {
    best_defect = std::min(best_defect, q.iso_defect[k]);
  }
  CHECK(best_defect < 1e-12);
  CHECK(q.iso_fraction > 0.3);
  CHECK(q.eps_iso_max <= q.iso_threshold);

  // the isotropic area fraction grows under subdivision and the
  // superadmissibility defect shrinks
  const MeshQuality q8 = quality_metrics(refine_subdivision(base, 8));
  CHECK(q8.iso_fraction > q.iso_fraction);
  CHECK(q8.superadmissibility_defect < quality_metrics(base).superadmissibility_defect);
}
