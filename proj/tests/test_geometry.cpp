#include <bit>
#include <cmath>

#include "doctest.h"
#include "mpfem/common.hpp"
#include "mpfem/geometry.hpp"
#include "oracles.hpp"

using namespace mpfem;

namespace {

Mat identity(int d) {
  Mat m(d, d);
  for (int i = 0; i < d; ++i) m(i, i) = 1.0;
  return m;
}

// Rotation about a random axis; rigid motions keep det and kappa2 invariant.
Mat rotation(Rng& rng) {
  double axis[3] = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
  double norm = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
  for (double& a : axis) a /= norm;
  double angle = rng.uniform(0.0, 6.28);
  double c = std::cos(angle), s = std::sin(angle);
  Mat r(3, 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double cross = 0.0;
      if (i != j) {
        int k = 3 - i - j;
        double sign = ((j + 1) % 3 == i) ? 1.0 : -1.0;
        cross = sign * axis[k];
        if ((i + 1) % 3 == j) cross = -cross;
      }
      r(i, j) = c * (i == j ? 1.0 : 0.0) + s * cross + (1.0 - c) * axis[i] * axis[j];
    }
  }
  return r;
}

Mat random_matrix(Rng& rng, int d, double diag_boost) {
  Mat m(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
    m(i, i) += diag_boost;
  }
  return m;
}

double det3_closed(const Mat& m) {
  return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
         m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
         m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

}  // namespace

TEST_CASE("geometry | reference cells have identity jacobians") {
  FpFlags fl;
  ReferenceCell tet{CellKind::simplex, 3};
  std::vector<std::array<double, 3>> tet_verts = {
      {0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  double inside[3] = {0.2, 0.3, 0.1};
  Mat j = jacobian(tet_verts, tet, inside, Fmt::fp64, fl);
  for (int i = 0; i < 3; ++i) {
    for (int s = 0; s < 3; ++s) CHECK(j(i, s) == (i == s ? 1.0 : 0.0));
  }
  CHECK(kappa2_of(j) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(kappa_cell_of(tet_verts, 3, j) == 4.0);

  ReferenceCell hex{CellKind::box, 3};
  std::vector<std::array<double, 3>> hex_verts;
  for (int b = 0; b < 8; ++b) {
    hex_verts.push_back({double(b & 1), double((b >> 1) & 1), double((b >> 2) & 1)});
  }
  // Identity map: exact at the dyadic center, within roundoff elsewhere.
  double center[3] = {0.5, 0.5, 0.5};
  Mat jc = jacobian(hex_verts, hex, center, Fmt::fp64, fl);
  for (int i = 0; i < 3; ++i) {
    for (int s = 0; s < 3; ++s) CHECK(jc(i, s) == (i == s ? 1.0 : 0.0));
  }
  Mat ji = jacobian(hex_verts, hex, inside, Fmt::fp64, fl);
  for (int i = 0; i < 3; ++i) {
    for (int s = 0; s < 3; ++s) {
      CHECK(std::fabs(ji(i, s) - (i == s ? 1.0 : 0.0)) <= 4e-15);
    }
  }
  CHECK(kappa_cell_of(hex_verts, 3, jc) == 32.0);
  CHECK(!fl.any());
}

TEST_CASE("geometry | epsilon tet matches its closed-form jacobian") {
  double eps = 0.001;
  Mesh raw = epsilon_tet(eps, false);
  FpFlags fl;
  ReferenceCell tet{CellKind::simplex, 3};
  double centroid[3] = {0.25, 0.25, 0.25};
  Mat j = jacobian(raw.cell_vertices(0), tet, centroid, Fmt::fp64, fl);

  // Columns are the edge vectors from the base vertex.
  double expect[3][3] = {{1.0, 1.0, eps}, {1.0, 0.0, 1.0}, {0.0, 1.0, -1.0}};
  for (int i = 0; i < 3; ++i) {
    for (int s = 0; s < 3; ++s) CHECK(j(i, s) == expect[i][s]);
  }
  CHECK(det_lu(j, Fmt::fp64, fl) == doctest::Approx(eps).epsilon(1e-12));

  Mesh scaled = epsilon_tet(eps, true);
  Mat js = jacobian(scaled.cell_vertices(0), tet, centroid, Fmt::fp64, fl);
  CHECK(det_lu(js, Fmt::fp64, fl) ==
        doctest::Approx(eps * std::pow(3.0, -1.5)).epsilon(1e-12));

  // kappa2 grows like 1/eps: log-log slope -1 across four decades.
  double k2 = kappa2_of(j);
  double k6 = kappa2_of(jacobian(epsilon_tet(eps * 0.0001, false).cell_vertices(0), tet,
                                 centroid, Fmt::fp64, fl));
  double slope = (std::log10(k6) - std::log10(k2)) / -4.0;
  CHECK(slope == doctest::Approx(-1.0).epsilon(0.02));
}

TEST_CASE("geometry | binary64 determinant and inverse match closed forms") {
  FpFlags fl;
  Mat two = identity(3);
  for (int i = 0; i < 3; ++i) two(i, i) = 2.0;
  CHECK(det_lu(two, Fmt::fp64, fl) == 8.0);
  Mat half = inverse_lu(two, Fmt::fp64, fl);
  for (int i = 0; i < 3; ++i) {
    for (int s = 0; s < 3; ++s) CHECK(half(i, s) == (i == s ? 0.5 : 0.0));
  }

  Rng rng(314);
  for (int trial = 0; trial < 50; ++trial) {
    Mat m = random_matrix(rng, 3, 3.0);
    double det = det_lu(m, Fmt::fp64, fl);
    CHECK(det == doctest::Approx(det3_closed(m)).epsilon(1e-12));

    double alpha = 1.7;
    Mat scaled = m;
    for (double& v : scaled.a) v *= alpha;
    CHECK(det_lu(scaled, Fmt::fp64, fl) ==
          doctest::Approx(alpha * alpha * alpha * det).epsilon(1e-12));

    Mat inv = inverse_lu(m, Fmt::fp64, fl);
    Mat prod = oracle::matmul64(inv, m);
    for (int i = 0; i < 3; ++i) {
      for (int s = 0; s < 3; ++s) {
        CHECK(std::fabs(prod(i, s) - (i == s ? 1.0 : 0.0)) <= 1e-12);
      }
    }
  }

  Mat d2(2, 2);
  d2(0, 0) = 3.0, d2(0, 1) = 1.0, d2(1, 0) = 2.0, d2(1, 1) = 5.0;
  CHECK(det_lu(d2, Fmt::fp64, fl) == doctest::Approx(13.0).epsilon(1e-14));
  Mat d1(1, 1);
  d1(0, 0) = -4.0;
  CHECK(det_lu(d1, Fmt::fp64, fl) == -4.0);

  Mat singular = identity(3);
  singular(2, 2) = 0.0;
  CHECK_THROWS_AS(det_lu(singular, Fmt::fp64, fl), CheckError);
  CHECK_THROWS_AS(inverse_lu(singular, Fmt::fp64, fl), CheckError);
}

TEST_CASE("geometry | fp32 errors stay within the conditioning bounds") {
  double u32 = format_info(Fmt::fp32).u;
  ReferenceCell tet{CellKind::simplex, 3};
  double centroid[3] = {0.25, 0.25, 0.25};
  Rng rng(2718);

  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::array<double, 3>> verts(4);
    for (auto& v : verts) {
      for (int a = 0; a < 3; ++a) v[a] = rng.uniform(0.0, 1.0);
    }
    FpFlags f64, f32;
    Mat j64 = jacobian(verts, tet, centroid, Fmt::fp64, f64);
    if (std::fabs(det3_closed(j64)) < 1e-3) continue;  // skip near-degenerate draws
    Mat j32 = jacobian(verts, tet, centroid, Fmt::fp32, f32);

    double jnorm = 0.0, dnorm = 0.0;
    for (int i = 0; i < 3; ++i) {
      double row = 0.0, drow = 0.0;
      for (int s = 0; s < 3; ++s) {
        row += std::fabs(j64(i, s));
        drow += std::fabs(j32(i, s) - j64(i, s));
      }
      jnorm = std::max(jnorm, row);
      dnorm = std::max(dnorm, drow);
    }
    double kcell = kappa_cell_of(verts, 3, j64);
    CHECK(dnorm <= 50.0 * u32 * kcell * jnorm);

    // Inverse: entrywise bound scaled by kappa2, and a residual check.
    Mat inv64 = inverse_lu(j64, Fmt::fp64, f64);
    Mat inv32 = inverse_lu(j32, Fmt::fp32, f32);
    double k2 = kappa2_of(j64);
    for (int i = 0; i < 3; ++i) {
      for (int s = 0; s < 3; ++s) {
        CHECK(std::fabs(inv32(i, s) - inv64(i, s)) <=
              100.0 * u32 * k2 * (std::fabs(inv64(i, s)) + max_abs(inv64) * 1e-3));
      }
    }
    Mat residual = oracle::matmul64(inv32, j64);
    for (int i = 0; i < 3; ++i) residual(i, i) -= 1.0;
    CHECK(max_abs(residual) <= 100.0 * u32 * k2);

    // Determinant forward error against the conditioning product.
    double det64 = det_lu(j64, Fmt::fp64, f64);
    double det32 = det_lu(j32, Fmt::fp32, f32);
    double rel = std::fabs(det32 - det64) / std::fabs(det64);
    CHECK(rel / (u32 * k2 * kcell) <= 10.0);
  }

  // Rigid motions of the epsilon tet stretch kappa2 to 1e7 without changing
  // the determinant; the normalized fp32 det error stays order one.
  for (double eps : {1e-1, 1e-3, 1e-5, 1e-7}) {
    Mesh m = epsilon_tet(eps, true);
    Mat rot = rotation(rng);
    std::vector<std::array<double, 3>> verts = m.cell_vertices(0);
    for (auto& v : verts) {
      double w[3] = {0, 0, 0};
      for (int i = 0; i < 3; ++i) {
        for (int k = 0; k < 3; ++k) w[i] += rot(i, k) * v[k];
      }
      for (int i = 0; i < 3; ++i) v[i] = w[i] + 0.25 * (i + 1);
    }
    FpFlags f64, f32;
    Mat j64 = jacobian(verts, tet, centroid, Fmt::fp64, f64);
    Mat j32 = jacobian(verts, tet, centroid, Fmt::fp32, f32);
    double det64 = det_lu(j64, Fmt::fp64, f64);
    double det32 = det_lu(j32, Fmt::fp32, f32);
    double rel = std::fabs(det32 - det64) / std::fabs(det64);
    CHECK(rel / (u32 * kappa2_of(j64) * kappa_cell_of(verts, 3, j64)) <= 10.0);
  }
}

TEST_CASE("geometry | tensors are symmetric and dominated by the majorant") {
  FpFlags fl;
  Mat eye = identity(3);
  Mat gp = geometry_tensor(1.0, inverse_lu(eye, Fmt::fp64, fl), FormKind::poisson,
                           Fmt::fp64, fl);
  for (int i = 0; i < 3; ++i) {
    for (int s = 0; s < 3; ++s) CHECK(gp(i, s) == (i == s ? 1.0 : 0.0));
  }
  Mat gm = geometry_tensor(1.0, eye, FormKind::mass, Fmt::fp64, fl);
  CHECK(gm.rows == 1);
  CHECK(gm(0, 0) == 1.0);

  // diag(2): |det| = 8, inverse diag(1/2), G = 8/4 I = 2I, exact even in fp16.
  Mat two = identity(3);
  for (int i = 0; i < 3; ++i) two(i, i) = 2.0;
  double det16 = det_lu(two, Fmt::fp16, fl);
  CHECK(det16 == 8.0);
  Mat g16 = geometry_tensor(std::fabs(det16), inverse_lu(two, Fmt::fp16, fl),
                            FormKind::poisson, Fmt::fp16, fl);
  for (int i = 0; i < 3; ++i) {
    for (int s = 0; s < 3; ++s) CHECK(g16(i, s) == (i == s ? 2.0 : 0.0));
  }

  Rng rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    Mat m = random_matrix(rng, 3, 2.5);
    FpFlags f32;
    double det = det_lu(m, Fmt::fp32, f32);
    Mat inv = inverse_lu(m, Fmt::fp32, f32);
    Mat g = geometry_tensor(std::fabs(det), inv, FormKind::poisson, Fmt::fp32, f32);
    for (int i = 0; i < 3; ++i) {
      for (int s = i + 1; s < 3; ++s) {
        CHECK(std::bit_cast<uint64_t>(g(i, s)) == std::bit_cast<uint64_t>(g(s, i)));
      }
    }
  }
}

TEST_CASE("geometry | cell evaluation shares affine data and flags underflow") {
  FpFlags fl;
  Mesh tets = structured_tet_mesh(2, 2, 2, 1.0, 0.15, 11);
  QuadratureRule tet_rule = rule_for(ReferenceCell{CellKind::simplex, 3}, 2);
  GeometryData gd = cell_geometry(tets, 0, tet_rule, FormKind::poisson, Fmt::fp64, fl);
  CHECK(gd.affine);
  CHECK(gd.n_entries() == 1);
  CHECK(gd.at(0).abs_det > 0.0);
  CHECK(gd.at(3).abs_det == gd.at(0).abs_det);
  CHECK(gd.at(0).kappa_cell >= 1.0);
  // The binary64 majorant dominates the tensor entrywise.
  for (int s = 0; s < 3; ++s) {
    for (int t = 0; t < 3; ++t) {
      CHECK(std::fabs(gd.at(0).tensor(s, t)) <=
            gd.at(0).tensor_tilde(s, t) * (1.0 + 1e-9));
    }
  }

  Mesh hexes = structured_box_mesh(2, 2, 2, 1.0, 0.15, 12);
  QuadratureRule hex_rule = rule_for(ReferenceCell{CellKind::box, 3}, 2);
  GeometryData hd = cell_geometry(hexes, 0, hex_rule, FormKind::mass, Fmt::fp64, fl);
  CHECK(!hd.affine);
  CHECK(hd.n_entries() == hex_rule.n_points);
  bool varies = false;
  for (int q = 1; q < hex_rule.n_points; ++q) {
    CHECK(hd.at(q).abs_det > 0.0);
    CHECK(hd.at(q).tensor(0, 0) == hd.at(q).abs_det);
    CHECK(hd.at(q).tensor_tilde(0, 0) > 0.0);
    if (hd.at(q).abs_det != hd.at(0).abs_det) varies = true;
  }
  CHECK(varies);
  CHECK(!fl.any());

  // fp16 geometry pathologies stay observable. A thin tet's determinant is
  // noise-dominated (rounding floor u * ||J|| far above the true value)...
  Mesh thin = epsilon_tet(1e-4, true);
  FpFlags f16;
  GeometryData thin16 = cell_geometry(thin, 0, tet_rule, FormKind::mass, Fmt::fp16, f16);
  FpFlags f64;
  GeometryData thin64 = cell_geometry(thin, 0, tet_rule, FormKind::mass, Fmt::fp64, f64);
  CHECK(std::fabs(thin16.at(0).abs_det - thin64.at(0).abs_det) >=
        thin64.at(0).abs_det);

  // ...and a physically small cell underflows into the subnormal range with
  // the flag raised rather than silently.
  Mesh small;
  small.kind = CellKind::simplex;
  small.dim = 3;
  double h = 0.03;
  small.vertices = {{0, 0, 0}, {h, 0, 0}, {0, h, 0}, {0, 0, h}};
  small.cells = {{0, 1, 2, 3}};
  FpFlags tiny;
  GeometryData small16 = cell_geometry(small, 0, tet_rule, FormKind::mass, Fmt::fp16, tiny);
  CHECK(small16.at(0).abs_det < format_info(Fmt::fp16).min_normal);
  CHECK(small16.at(0).abs_det > 0.0);
  CHECK(tiny.underflow);
}

TEST_CASE("geometry | condition numbers match independent oracles") {
  Rng rng(555);
  FpFlags fl;
  for (int trial = 0; trial < 50; ++trial) {
    Mat m = random_matrix(rng, 3, trial % 2 == 0 ? 2.0 : 0.0);
    if (std::fabs(det3_closed(m)) < 1e-6) continue;
    double lib = kappa2_of(m);
    double ref = oracle::kappa2(m);
    CHECK(lib == doctest::Approx(ref).epsilon(1e-10));
  }

  Mat d2(2, 2);
  d2(0, 0) = 1.0, d2(1, 1) = 10.0;
  CHECK(kappa2_of(d2) == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(kappa2_of(identity(3)) == doctest::Approx(1.0).epsilon(1e-12));

  // kappa(K) >= 1 across a jittered mesh.
  Mesh mesh = structured_tet_mesh(2, 2, 2, 1.0, 0.15, 13);
  QuadratureRule rule = rule_for(ReferenceCell{CellKind::simplex, 3}, 2);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    GeometryData gd = cell_geometry(mesh, c, rule, FormKind::mass, Fmt::fp64, fl);
    CHECK(gd.at(0).kappa_cell >= 1.0);
  }
}
