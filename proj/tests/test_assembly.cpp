#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "mpfem/assembly.hpp"
#include "mpfem/bounds.hpp"
#include "mpfem/common.hpp"
#include "mpfem/kernels.hpp"
#include "mpfem/mesh.hpp"
#include "oracles.hpp"

using namespace mpfem;

namespace {

std::vector<Mat> random_locals(const DofMap& dofmap, int n_cells, Rng& rng) {
  std::vector<Mat> locals;
  for (int c = 0; c < n_cells; ++c) {
    Mat a(dofmap.n_local, dofmap.n_local);
    for (int i = 0; i < a.rows; ++i) {
      for (int j = 0; j < a.cols; ++j) a(i, j) = rng.uniform(-1.0, 1.0);
    }
    locals.push_back(std::move(a));
  }
  return locals;
}

// Brute-force global matrix: exact binary64 sum of contributions per entry,
// which is the boolean-expansion product with the block-diagonal local store.
Mat dense_global(const std::vector<Mat>& local, const DofMap& dofmap) {
  Mat global(dofmap.n_dofs, dofmap.n_dofs);
  for (int c = 0; c < int(local.size()); ++c) {
    for (int i = 0; i < dofmap.n_local; ++i) {
      for (int j = 0; j < dofmap.n_local; ++j) {
        global(dofmap.dof(c, i), dofmap.dof(c, j)) += local[c](i, j);
      }
    }
  }
  return global;
}

std::vector<double> dense_global_vector(const std::vector<std::vector<double>>& local,
                                        const DofMap& dofmap) {
  std::vector<double> global(std::size_t(dofmap.n_dofs), 0.0);
  for (int c = 0; c < int(local.size()); ++c) {
    for (int k = 0; k < dofmap.n_local; ++k) {
      global[dofmap.dof(c, k)] += local[c][k];
    }
  }
  return global;
}

}  // namespace

TEST_CASE("assembly | discontinuous map keeps locals block diagonal bitwise") {
  Mesh mesh = structured_tet_mesh(1, 1, 2, 1.0, 0.1, 17);
  LagrangeBasis basis = build_basis({CellKind::simplex, 3}, 2);
  DofMap dofmap = build_dofmap(mesh, basis, Continuity::discontinuous);
  CHECK(dofmap.max_multiplicity == 1);
  CHECK(dofmap.n_dofs == mesh.n_cells() * basis.n_phi);

  Rng rng(5);
  std::vector<Mat> locals = random_locals(dofmap, mesh.n_cells(), rng);
  FpFlags flags;
  SparseCoo coo = assemble_matrix(locals, dofmap, Fmt::fp64, flags);

  CHECK(coo.nnz() == mesh.n_cells() * basis.n_phi * basis.n_phi);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    for (int i = 0; i < basis.n_phi; ++i) {
      for (int j = 0; j < basis.n_phi; ++j) {
        double got = coo.at(dofmap.dof(c, i), dofmap.dof(c, j));
        CHECK(std::bit_cast<uint64_t>(got) ==
              std::bit_cast<uint64_t>(locals[c](i, j)));
      }
    }
  }

  std::vector<std::vector<double>> vlocals;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    std::vector<double> v(basis.n_phi);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    vlocals.push_back(v);
  }
  std::vector<double> global = assemble_vector(vlocals, dofmap, Fmt::fp64, flags);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    for (int k = 0; k < basis.n_phi; ++k) {
      CHECK(std::bit_cast<uint64_t>(global[dofmap.dof(c, k)]) ==
            std::bit_cast<uint64_t>(vlocals[c][k]));
    }
  }
}

TEST_CASE("assembly | two cell mesh matches the dense boolean product") {
  Mesh mesh = structured_box_mesh(2, 1, 1, 1.0, 0.12, 23);
  LagrangeBasis basis = build_basis({CellKind::box, 3}, 1);
  DofMap dofmap = build_dofmap(mesh, basis, Continuity::continuous);
  CHECK(dofmap.n_dofs == 12);
  CHECK(dofmap.max_multiplicity == 2);

  Rng rng(31);
  std::vector<Mat> locals = random_locals(dofmap, mesh.n_cells(), rng);
  FpFlags flags;
  SparseCoo coo = assemble_matrix(locals, dofmap, Fmt::fp64, flags);
  Mat dense = dense_global(locals, dofmap);

  for (int r = 0; r < dofmap.n_dofs; ++r) {
    for (int c = 0; c < dofmap.n_dofs; ++c) {
      CHECK(std::fabs(coo.at(r, c) - dense(r, c)) <=
            1e-14 * std::max(1.0, std::fabs(dense(r, c))));
    }
  }

  std::vector<std::vector<double>> vlocals;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    std::vector<double> v(basis.n_phi);
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    vlocals.push_back(v);
  }
  std::vector<double> vglobal = assemble_vector(vlocals, dofmap, Fmt::fp64, flags);
  std::vector<double> vdense = dense_global_vector(vlocals, dofmap);
  for (int i = 0; i < dofmap.n_dofs; ++i) {
    CHECK(std::fabs(vglobal[i] - vdense[i]) <= 1e-14 * std::max(1.0, std::fabs(vdense[i])));
  }
}

TEST_CASE("assembly | shared entries accumulate their contributors in order") {
  Mesh mesh = structured_tet_mesh(2, 2, 1, 1.0, 0.1, 47);
  LagrangeBasis basis = build_basis({CellKind::simplex, 3}, 2);
  DofMap dofmap = build_dofmap(mesh, basis, Continuity::continuous);
  REQUIRE(dofmap.max_multiplicity > 1);

  Rng rng(71);
  std::vector<Mat> locals = random_locals(dofmap, mesh.n_cells(), rng);
  FpFlags flags;
  SparseCoo coo = assemble_matrix(locals, dofmap, Fmt::fp16, flags);

  // Recount every entry: exact contributor sum within gamma_m, and the fp16
  // add chain in ascending cell order reproduces the stored value bitwise.
  int checked_multi = 0;
  for (int idx = 0; idx < coo.nnz(); ++idx) {
    int r = coo.row[idx], c = coo.col[idx];
    std::vector<double> contribs;
    for (int cell = 0; cell < mesh.n_cells(); ++cell) {
      for (int i = 0; i < basis.n_phi; ++i) {
        if (dofmap.dof(cell, i) != r) continue;
        for (int j = 0; j < basis.n_phi; ++j) {
          if (dofmap.dof(cell, j) == c) contribs.push_back(locals[cell](i, j));
        }
      }
    }
    REQUIRE(!contribs.empty());
    double exact = 0.0, abs_sum = 0.0;
    FpFlags chain_flags;
    double chain = 0.0;
    for (std::size_t k = 0; k < contribs.size(); ++k) {
      exact += contribs[k];
      abs_sum += std::fabs(contribs[k]);
      double cast = fp_cast(contribs[k], Fmt::fp64, Fmt::fp16, chain_flags);
      chain = k == 0 ? cast : fp_add(chain, cast, Fmt::fp16, chain_flags);
    }
    CHECK(std::bit_cast<uint64_t>(coo.value[idx]) == std::bit_cast<uint64_t>(chain));
    int m = int(contribs.size());
    double tol = gamma_term(m + 1, Fmt::fp16) * std::max(abs_sum, 1e-30);
    CHECK(std::fabs(coo.value[idx] - exact) <= tol);
    if (m > 1) ++checked_multi;
  }
  CHECK(checked_multi > 100);
}

TEST_CASE("assembly | coordinate export prints sorted entries") {
  DofMap dofmap;
  dofmap.n_dofs = 3;
  dofmap.n_local = 2;
  dofmap.cell_dofs = {2, 1, 1, 0};
  Mat a(2, 2), b(2, 2);
  a(0, 0) = 4.0; a(0, 1) = 0.5; a(1, 0) = -1.0; a(1, 1) = 2.0;
  b(0, 0) = 1.0; b(0, 1) = 3.0; b(1, 0) = 0.25; b(1, 1) = -2.0;
  FpFlags flags;
  SparseCoo coo = assemble_matrix({a, b}, dofmap, Fmt::fp64, flags);

  CHECK(coo.nnz() == 7);  // (1,1) appears in both cells
  CHECK(coo.at(1, 1) == 3.0);
  std::string text = coo_to_text(coo);
  CHECK(text ==
        "0 0 -2\n"
        "0 1 0.25\n"
        "1 0 3\n"
        "1 1 3\n"
        "1 2 -1\n"
        "2 1 0.5\n"
        "2 2 4\n");

  std::vector<double> v = {1.5, 0.0, -0.125};
  CHECK(vector_to_text(v) ==
        "0 0 1.5\n"
        "1 0 0\n"
        "2 0 -0.125\n");
}

TEST_CASE("assembly | mismatched inputs and bad indices are rejected") {
  Mesh mesh = structured_tet_mesh(1, 1, 1, 1.0, 0.0, 1);
  LagrangeBasis basis = build_basis({CellKind::simplex, 3}, 1);
  DofMap dofmap = build_dofmap(mesh, basis, Continuity::continuous);

  Rng rng(3);
  std::vector<Mat> locals = random_locals(dofmap, mesh.n_cells(), rng);
  FpFlags flags;

  std::vector<Mat> short_list(locals.begin(), locals.end() - 1);
  CHECK_THROWS_AS(assemble_matrix(short_list, dofmap, Fmt::fp64, flags), ConfigError);

  std::vector<Mat> bad_shape = locals;
  bad_shape[0] = Mat(dofmap.n_local, dofmap.n_local + 1);
  CHECK_THROWS_AS(assemble_matrix(bad_shape, dofmap, Fmt::fp64, flags), ConfigError);

  DofMap corrupt = dofmap;
  corrupt.cell_dofs[2] = corrupt.n_dofs;
  CHECK_THROWS_AS(assemble_matrix(locals, corrupt, Fmt::fp64, flags), CheckError);

  std::vector<std::vector<double>> vlocals(mesh.n_cells(),
                                           std::vector<double>(dofmap.n_local, 1.0));
  vlocals[1].pop_back();
  CHECK_THROWS_AS(assemble_vector(vlocals, dofmap, Fmt::fp64, flags), ConfigError);
  vlocals[1].push_back(1.0);
  CHECK_THROWS_AS(assemble_vector(vlocals, corrupt, Fmt::fp64, flags), CheckError);
}

TEST_CASE("assembly | global error keeps the local structure and scaling") {
  // Mixed-precision locals assembled at fp32 against exact binary64 locals:
  // the entrywise error splits into the scattered local errors plus the
  // accumulation rounding on the scattered exact magnitudes.
  Mesh mesh = structured_box_mesh(2, 2, 1, 1.0, 0.12, 91);
  ReferenceCell cell{CellKind::box, 3};
  int p = 1;

  KernelConfig config;
  config.form = FormKind::poisson;
  config.mode = ModeKind::bilinear;
  config.u_p = config.u_g = config.u_q = Fmt::fp32;
  config.u_s = Fmt::bf16;
  config.engine = EngineKind::matrix;
  KernelSetup setup = make_setup(cell, p, config);
  BasisConditioning cond = basis_condition_numbers(setup.basis);
  DofMap dofmap = build_dofmap(mesh, setup.basis, Continuity::continuous);
  REQUIRE(dofmap.max_multiplicity == 4);

  Rng rng(143);
  Coefficients z = Coefficients();
  std::vector<Mat> approx, exact;
  std::vector<std::vector<double>> vapprox, vexact;
  double max_local_rel_a = 0.0, max_local_rel_v = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    FpFlags flags;
    GeometryData geom_k = cell_geometry(mesh, c, setup.rule, config.form,
                                        config.u_g, flags);
    GeometryData geom64 =
        cell_geometry(mesh, c, setup.rule, config.form, Fmt::fp64, flags);
    Coefficients w(setup.basis.n_phi);
    for (double& x : w) x = rng.uniform(-1.0, 1.0);
    BoundReport report = kernel_bounds(setup, cond, geom64, z, w);

    approx.push_back(bilinear_kernel(setup, geom_k, z, flags));
    exact.push_back(report.a);
    max_local_rel_a = std::max(
        max_local_rel_a, max_abs_diff(approx.back(), report.a) / max_abs(report.a));

    KernelConfig aconfig = config;
    aconfig.mode = ModeKind::action;
    KernelSetup asetup = make_setup(cell, p, aconfig);
    Mat v_hat = action_kernel(asetup, {geom_k}, {w}, z, flags);
    std::vector<double> va(setup.basis.n_phi), ve(setup.basis.n_phi);
    double err = 0.0;
    for (int i = 0; i < setup.basis.n_phi; ++i) {
      va[i] = v_hat(i, 0);
      ve[i] = report.v[i];
      err = std::max(err, std::fabs(va[i] - ve[i]));
    }
    vapprox.push_back(va);
    vexact.push_back(ve);
    max_local_rel_v = std::max(max_local_rel_v, err / max_abs(report.v));
  }

  FpFlags flags;
  SparseCoo global_hat = assemble_matrix(approx, dofmap, Fmt::fp32, flags);
  Mat global = dense_global(exact, dofmap);

  std::vector<Mat> local_err, local_mag;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    Mat e(setup.basis.n_phi, setup.basis.n_phi), m(setup.basis.n_phi, setup.basis.n_phi);
    for (int i = 0; i < e.rows; ++i) {
      for (int j = 0; j < e.cols; ++j) {
        e(i, j) = std::fabs(approx[c](i, j) - exact[c](i, j));
        m(i, j) = std::fabs(exact[c](i, j));
      }
    }
    local_err.push_back(std::move(e));
    local_mag.push_back(std::move(m));
  }
  Mat scattered_err = dense_global(local_err, dofmap);
  Mat scattered_mag = dense_global(local_mag, dofmap);

  double u_q = format_info(Fmt::fp32).u;
  int m_k = dofmap.max_multiplicity;
  for (int r = 0; r < dofmap.n_dofs; ++r) {
    for (int c = 0; c < dofmap.n_dofs; ++c) {
      double lhs = std::fabs(global_hat.at(r, c) - global(r, c));
      double rhs = scattered_err(r, c) + 2.0 * 10.0 * m_k * u_q * scattered_mag(r, c);
      CHECK(lhs <= rhs);
    }
  }

  double global_rel = 0.0;
  for (int r = 0; r < dofmap.n_dofs; ++r) {
    for (int c = 0; c < dofmap.n_dofs; ++c) {
      global_rel = std::max(global_rel, std::fabs(global_hat.at(r, c) - global(r, c)));
    }
  }
  global_rel /= max_abs(global);
  CHECK(global_rel <= 10.0 * m_k * m_k * max_local_rel_a);

  std::vector<double> vglobal_hat = assemble_vector(vapprox, dofmap, Fmt::fp32, flags);
  std::vector<double> vglobal = dense_global_vector(vexact, dofmap);
  double vglobal_rel = 0.0;
  for (int i = 0; i < dofmap.n_dofs; ++i) {
    vglobal_rel = std::max(vglobal_rel, std::fabs(vglobal_hat[i] - vglobal[i]));
  }
  vglobal_rel /= max_abs(vglobal);
  CHECK(vglobal_rel <= 10.0 * m_k * max_local_rel_v);
}
