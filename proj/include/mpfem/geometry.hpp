#pragma once
#include <array>
#include <cstdint>
#include <vector>

#include "mpfem/linalg.hpp"
#include "mpfem/mesh.hpp"
#include "mpfem/quadrature.hpp"
#include "mpfem/softfloat.hpp"

namespace mpfem {

enum class FormKind : uint8_t { mass, poisson };

// Geometry factors of one cell at one reference point. jac, det, inv and
// tensor hold values representable at the evaluation format; the diagnostics
// (kappa2, kappa_cell, tensor_tilde) are binary64 and never feed back into
// the reduced-precision path.
struct GeometryPoint {
  Mat jac;                // d x d
  double det = 0.0;       // signed
  double abs_det = 0.0;
  Mat inv;                // d x d
  Mat tensor;             // 1 x 1 for mass, d x d for poisson, exactly symmetric
  double kappa2 = 1.0;    // sigma_max / sigma_min of the binary64 Jacobian
  double kappa_cell = 1.0;  // n_psi ||X||_inf / ||J||_inf
  Mat tensor_tilde;       // |det| |J^-1| |J^-T| (1 x 1 |det| for mass)
};

// Per-cell geometry: affine cells store one point entry shared by every
// quadrature point, trilinear hexes store one entry per point.
struct GeometryData {
  bool affine = false;
  Fmt fmt = Fmt::fp64;  // format the reduced-precision fields were computed at
  std::vector<GeometryPoint> points;

  const GeometryPoint& at(int q) const { return points[affine ? 0 : std::size_t(q)]; }
  int n_entries() const { return int(points.size()); }
};

// J_is = sum_k X_ik d_s psi_k(xref) through the degree-1 geometry basis, with
// vertices rounded to fmt and every product and sum rounded at fmt
// (k ascending).
Mat jacobian(const std::vector<std::array<double, 3>>& verts, const ReferenceCell& cell,
             const double* xref, Fmt fmt, FpFlags& flags);

// Signed determinant via LU with partial pivoting, every operation rounded at
// fmt; throws CheckError on an exact zero pivot.
double det_lu(const Mat& jac, Fmt fmt, FpFlags& flags);

// Inverse via the same LU and one solve per unit vector, all at fmt.
Mat inverse_lu(const Mat& jac, Fmt fmt, FpFlags& flags);

// Mass: 1 x 1 |det|. Poisson: G_st = fl(|det| * fl(sum_k inv_sk inv_tk)),
// upper triangle computed at fmt and mirrored bitwise.
Mat geometry_tensor(double abs_det, const Mat& inv, FormKind form, Fmt fmt,
                    FpFlags& flags);

// Eigenvalues of a symmetric matrix, ascending, via cyclic Jacobi rotations
// in binary64.
std::vector<double> sym_eigenvalues(const Mat& sym);

// kappa2 = sigma_max / sigma_min in binary64 (infinite for singular input).
double kappa2_of(const Mat& jac);

// kappa(K) = n_psi ||X||_inf / ||J||_inf with X the d x n_psi vertex matrix;
// row sums in binary64.
double kappa_cell_of(const std::vector<std::array<double, 3>>& verts, int dim,
                     const Mat& jac);

// Evaluates one cell at every point of the rule: reduced-precision fields at
// fmt, diagnostics from a separate binary64 pass.
GeometryData cell_geometry(const Mesh& mesh, int c, const QuadratureRule& rule,
                           FormKind form, Fmt fmt, FpFlags& flags);

}  // namespace mpfem
