#include "mpfem/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include "mpfem/common.hpp"
#include "mpfem/linalg.hpp"

namespace mpfem {

namespace {

constexpr int kMaxPoints = 64;
constexpr int kMaxNewtonIters = 100;

// P_n(x) and P_n'(x) on [-1, 1] by the three-term recurrence.
void legendre(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  for (int j = 2; j <= n; ++j) {
    double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / double(j);
    p0 = p1;
    p1 = p2;
  }
  p = (n == 0) ? p0 : p1;
  dp = (n == 0) ? 0.0 : double(n) * (x * p1 - p0) / (x * x - 1.0);
}

// Implicit-shift QL on a symmetric tridiagonal matrix, accumulating the
// similarity transform into z. On return d holds eigenvalues (unsorted) and
// row 0 of z the first components of the normalized eigenvectors.
void tridiag_ql(std::vector<double>& d, std::vector<double>& e, Mat& z) {
  int n = int(d.size());
  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m = l;
    do {
      for (m = l; m < n - 1; ++m) {
        double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= 1e-300 + 2.3e-16 * dd) break;
      }
      if (m != l) {
        if (iter++ == 60) throw CheckError("internal error: tridiagonal QL stalled");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        bool deflated = false;
        for (int i = m - 1; i >= l; --i) {
          double f = s * e[i];
          double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            deflated = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          for (int k = 0; k < n; ++k) {
            f = z(k, i + 1);
            z(k, i + 1) = s * z(k, i) + c * f;
            z(k, i) = c * z(k, i) - s * f;
          }
        }
        if (deflated) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

void check_point_count(int n) {
  if (n < 1 || n > kMaxPoints) {
    throw ConfigError("quadrature point count must be in [1, 64]");
  }
}

}  // namespace

QuadratureRule gauss_legendre_1d(int n) {
  check_point_count(n);
  QuadratureRule rule;
  rule.dim = 1;
  rule.n_points = n;
  rule.points.resize(n);
  rule.weights.resize(n);
  rule.exactness = 2 * n - 1;
  if (n == 1) {
    rule.points[0] = 0.5;
    rule.weights[0] = 1.0;
    return rule;
  }
  for (int k = 0; k < n; ++k) {
    // k-th root in descending order on [-1, 1].
    double x = std::cos(M_PI * (k + 0.75) / (n + 0.5));
    double p = 0.0, dp = 1.0;
    int iter = 0;
    for (;; ++iter) {
      if (iter >= kMaxNewtonIters) {
        throw CheckError("internal error: Legendre Newton iteration stalled");
      }
      legendre(n, x, p, dp);
      double step = p / dp;
      x -= step;
      if (std::fabs(step) < 1e-15) break;
    }
    legendre(n, x, p, dp);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.points[n - 1 - k] = 0.5 * (x + 1.0);  // map to [0, 1], ascending
    rule.weights[n - 1 - k] = 0.5 * w;
  }
  return rule;
}

QuadratureRule gauss_jacobi_1d(int n, int alpha) {
  check_point_count(n);
  if (alpha < 0) throw ConfigError("Jacobi weight exponent must be nonnegative");
  // Monic recurrence coefficients for the weight (1 - x)^alpha on [-1, 1].
  std::vector<double> diag(n), offdiag(n, 0.0);
  diag[0] = -double(alpha) / double(alpha + 2);
  for (int k = 1; k < n; ++k) {
    double den = 2.0 * k + alpha;
    diag[k] = -double(alpha) * double(alpha) / (den * (den + 2.0));
    double bk = 4.0 * k * k * (k + alpha) * (k + alpha) / (den * den * (den * den - 1.0));
    offdiag[k] = std::sqrt(bk);
  }
  Mat z(n, n);
  for (int i = 0; i < n; ++i) z(i, i) = 1.0;
  tridiag_ql(diag, offdiag, z);

  double mu0 = std::pow(2.0, alpha + 1) / double(alpha + 1);  // total weight mass
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  for (int i = 1; i < n; ++i) {  // insertion sort by node, n <= 64
    int key = order[i];
    int j = i - 1;
    while (j >= 0 && diag[order[j]] > diag[key]) {
      order[j + 1] = order[j];
      --j;
    }
    order[j + 1] = key;
  }

  QuadratureRule rule;
  rule.dim = 1;
  rule.n_points = n;
  rule.points.resize(n);
  rule.weights.resize(n);
  rule.exactness = 2 * n - 1;
  for (int i = 0; i < n; ++i) {
    int k = order[i];
    rule.points[i] = 0.5 * (diag[k] + 1.0);
    // Map [-1,1] -> [0,1]: the weight function itself rescales by 2^alpha
    // and dx by 2, so each quadrature weight picks up 2^-(alpha+1).
    rule.weights[i] = mu0 * z(0, k) * z(0, k) * std::pow(0.5, alpha + 1);
  }
  return rule;
}

QuadratureRule rule_for(const ReferenceCell& cell, int p) {
  if (p < 1) throw ConfigError("element degree must be at least 1");
  if (cell.dim < 1 || cell.dim > 3) throw ConfigError("cell dimension must be 1, 2 or 3");
  int n = p + 1;
  check_point_count(n);

  // Per-direction 1D factors, axis 0 first.
  QuadratureRule fac[3];
  if (cell.kind == CellKind::box || cell.dim == 1) {
    for (int a = 0; a < cell.dim; ++a) fac[a] = gauss_legendre_1d(n);
  } else {
    // Collapse x = xi0, y = xi1 (1 - xi0) [, z = xi2 (1 - xi0)(1 - xi1)]:
    // the Jacobian (1 - xi0)^(d-1) (1 - xi1)^(d-2) becomes Jacobi weights.
    for (int a = 0; a < cell.dim; ++a) {
      int alpha = cell.dim - 1 - a;
      fac[a] = alpha == 0 ? gauss_legendre_1d(n) : gauss_jacobi_1d(n, alpha);
    }
  }

  QuadratureRule rule;
  rule.dim = cell.dim;
  rule.n_points = 1;
  for (int a = 0; a < cell.dim; ++a) rule.n_points *= n;
  rule.points.resize(std::size_t(rule.n_points) * cell.dim);
  rule.weights.resize(rule.n_points);
  rule.exactness = 2 * p + 1;

  int idx[3] = {0, 0, 0};
  for (int q = 0; q < rule.n_points; ++q) {
    int rem = q;  // axis 0 index varies fastest
    for (int a = 0; a < cell.dim; ++a) {
      idx[a] = rem % n;
      rem /= n;
    }
    double w = 1.0;
    double xi[3] = {0.0, 0.0, 0.0};
    for (int a = 0; a < cell.dim; ++a) {
      xi[a] = fac[a].points[idx[a]];
      w *= fac[a].weights[idx[a]];
    }
    double* pt = rule.points.data() + std::size_t(q) * cell.dim;
    if (cell.kind == CellKind::box || cell.dim == 1) {
      for (int a = 0; a < cell.dim; ++a) pt[a] = xi[a];
    } else {
      double shrink = 1.0;
      for (int a = 0; a < cell.dim; ++a) {
        pt[a] = xi[a] * shrink;
        shrink *= (1.0 - xi[a]);
      }
    }
    rule.weights[q] = w;
  }
  return rule;
}

}  // namespace mpfem
