#include "mpfem/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mpfem/common.hpp"
#include "mpfem/elements.hpp"

namespace mpfem {

Mat jacobian(const std::vector<std::array<double, 3>>& verts, const ReferenceCell& cell,
             const double* xref, Fmt fmt, FpFlags& flags) {
  LagrangeBasis geom = build_basis(cell, 1);
  int d = cell.dim;
  Mat jac(d, d);
  for (int k = 0; k < geom.n_phi; ++k) {
    auto grad = eval_basis_gradient(geom, k, xref, fmt, flags);
    for (int i = 0; i < d; ++i) {
      double x = fp_cast(verts[k][i], Fmt::fp64, fmt, flags);
      for (int s = 0; s < d; ++s) {
        jac(i, s) = fp_add(jac(i, s), fp_mul(x, grad[s], fmt, flags), fmt, flags);
      }
    }
  }
  return jac;
}

namespace {

// LU with partial pivoting, all operations rounded at fmt. Returns the
// permutation sign; lu holds L below and U on/above the diagonal.
int lu_decompose(Mat& lu, std::array<int, 3>& perm, Fmt fmt, FpFlags& flags) {
  int n = lu.rows;
  int sign = 1;
  for (int i = 0; i < n; ++i) perm[i] = i;
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::fabs(lu(r, col)) > std::fabs(lu(pivot, col))) pivot = r;
    }
    if (lu(pivot, col) == 0.0) throw CheckError("singular cell geometry");
    if (pivot != col) {
      for (int c = 0; c < n; ++c) std::swap(lu(pivot, c), lu(col, c));
      std::swap(perm[pivot], perm[col]);
      sign = -sign;
    }
    for (int r = col + 1; r < n; ++r) {
      double m = fp_div(lu(r, col), lu(col, col), fmt, flags);
      lu(r, col) = m;
      for (int c = col + 1; c < n; ++c) {
        lu(r, c) = fp_sub(lu(r, c), fp_mul(m, lu(col, c), fmt, flags), fmt, flags);
      }
    }
  }
  return sign;
}

}  // namespace

double det_lu(const Mat& jac, Fmt fmt, FpFlags& flags) {
  Mat lu = jac;
  std::array<int, 3> perm{};
  int sign = lu_decompose(lu, perm, fmt, flags);
  double det = double(sign);
  for (int i = 0; i < lu.rows; ++i) det = fp_mul(det, lu(i, i), fmt, flags);
  return det;
}

Mat inverse_lu(const Mat& jac, Fmt fmt, FpFlags& flags) {
  int n = jac.rows;
  Mat lu = jac;
  std::array<int, 3> perm{};
  lu_decompose(lu, perm, fmt, flags);
  Mat inv(n, n);
  for (int k = 0; k < n; ++k) {
    // Solve L y = P e_k, then U x = y; x is column k of the inverse.
    double y[3] = {0.0, 0.0, 0.0};
    for (int r = 0; r < n; ++r) {
      double s = perm[r] == k ? 1.0 : 0.0;
      for (int c = 0; c < r; ++c) {
        s = fp_sub(s, fp_mul(lu(r, c), y[c], fmt, flags), fmt, flags);
      }
      y[r] = s;
    }
    for (int r = n - 1; r >= 0; --r) {
      double s = y[r];
      for (int c = r + 1; c < n; ++c) {
        s = fp_sub(s, fp_mul(lu(r, c), inv(c, k), fmt, flags), fmt, flags);
      }
      inv(r, k) = fp_div(s, lu(r, r), fmt, flags);
    }
  }
  return inv;
}

Mat geometry_tensor(double abs_det, const Mat& inv, FormKind form, Fmt fmt,
                    FpFlags& flags) {
  if (form == FormKind::mass) {
    Mat g(1, 1);
    g(0, 0) = abs_det;
    return g;
  }
  int d = inv.rows;
  Mat g(d, d);
  for (int s = 0; s < d; ++s) {
    for (int t = s; t < d; ++t) {
      double dot = 0.0;
      for (int k = 0; k < d; ++k) {
        dot = fp_add(dot, fp_mul(inv(s, k), inv(t, k), fmt, flags), fmt, flags);
      }
      double v = fp_mul(abs_det, dot, fmt, flags);
      g(s, t) = v;
      g(t, s) = v;
    }
  }
  return g;
}

std::vector<double> sym_eigenvalues(const Mat& sym) {
  int n = sym.rows;
  Mat a = sym;
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (off <= 1e-300) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        double t = std::copysign(1.0, theta) /
                   (std::fabs(theta) + std::sqrt(1.0 + theta * theta));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = t * c;
        for (int k = 0; k < n; ++k) {
          double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (int i = 0; i < n; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

double kappa2_of(const Mat& jac) {
  int d = jac.rows;
  Mat jtj(d, d);
  for (int s = 0; s < d; ++s) {
    for (int t = 0; t < d; ++t) {
      double dot = 0.0;
      for (int k = 0; k < d; ++k) dot += jac(k, s) * jac(k, t);
      jtj(s, t) = dot;
    }
  }
  auto eig = sym_eigenvalues(jtj);
  if (eig.front() <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(eig.back() / eig.front());
}

double kappa_cell_of(const std::vector<std::array<double, 3>>& verts, int dim,
                     const Mat& jac) {
  double xnorm = 0.0;
  for (int i = 0; i < dim; ++i) {
    double row = 0.0;
    for (const auto& v : verts) row += std::fabs(v[i]);
    xnorm = std::max(xnorm, row);
  }
  double jnorm = 0.0;
  for (int i = 0; i < dim; ++i) {
    double row = 0.0;
    for (int s = 0; s < dim; ++s) row += std::fabs(jac(i, s));
    jnorm = std::max(jnorm, row);
  }
  return double(verts.size()) * xnorm / jnorm;
}

namespace {

GeometryPoint point_geometry(const std::vector<std::array<double, 3>>& verts,
                             const ReferenceCell& cell, const double* xref,
                             FormKind form, Fmt fmt, FpFlags& flags) {
  GeometryPoint g;
  g.jac = jacobian(verts, cell, xref, fmt, flags);
  g.det = det_lu(g.jac, fmt, flags);
  g.abs_det = std::fabs(g.det);
  g.inv = inverse_lu(g.jac, fmt, flags);
  g.tensor = geometry_tensor(g.abs_det, g.inv, form, fmt, flags);

  // Diagnostics from a clean binary64 pass over the same point.
  FpFlags wide;
  Mat jac64 = jacobian(verts, cell, xref, Fmt::fp64, wide);
  g.kappa2 = kappa2_of(jac64);
  g.kappa_cell = kappa_cell_of(verts, cell.dim, jac64);
  double det64 = std::fabs(det_lu(jac64, Fmt::fp64, wide));
  if (form == FormKind::mass) {
    g.tensor_tilde = Mat(1, 1);
    g.tensor_tilde(0, 0) = det64;
  } else {
    Mat inv64 = inverse_lu(jac64, Fmt::fp64, wide);
    int d = cell.dim;
    g.tensor_tilde = Mat(d, d);
    for (int s = 0; s < d; ++s) {
      for (int t = 0; t < d; ++t) {
        double dot = 0.0;
        for (int k = 0; k < d; ++k) dot += std::fabs(inv64(s, k)) * std::fabs(inv64(t, k));
        g.tensor_tilde(s, t) = det64 * dot;
      }
    }
  }
  return g;
}

}  // namespace

GeometryData cell_geometry(const Mesh& mesh, int c, const QuadratureRule& rule,
                           FormKind form, Fmt fmt, FpFlags& flags) {
  ReferenceCell cell{mesh.kind, mesh.dim};
  auto verts = mesh.cell_vertices(c);
  GeometryData data;
  data.affine = mesh.kind == CellKind::simplex;
  data.fmt = fmt;
  if (data.affine) {
    // Degree-1 simplex gradients are constant; the sample point is arbitrary.
    double centroid[3] = {0.0, 0.0, 0.0};
    for (int a = 0; a < mesh.dim; ++a) centroid[a] = 1.0 / (mesh.dim + 1);
    data.points.push_back(point_geometry(verts, cell, centroid, form, fmt, flags));
  } else {
    data.points.reserve(std::size_t(rule.n_points));
    for (int q = 0; q < rule.n_points; ++q) {
      data.points.push_back(point_geometry(verts, cell, rule.point(q), form, fmt, flags));
    }
  }
  return data;
}

}  // namespace mpfem
