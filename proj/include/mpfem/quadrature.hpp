#pragma once
#include <cstddef>
#include <vector>

#include "mpfem/cell.hpp"

namespace mpfem {

struct QuadratureRule {
  int dim = 1;
  int n_points = 0;
  std::vector<double> points;   // n_points x dim, point index major
  std::vector<double> weights;  // n_points, all positive
  int exactness = 0;            // exact for total degree <= exactness

  const double* point(int q) const { return points.data() + std::size_t(q) * dim; }
};

// n-point Gauss-Legendre rule on [0, 1]; Newton iteration on the Legendre
// recurrence, nodes ascending. Exact through degree 2n - 1.
QuadratureRule gauss_legendre_1d(int n);

// n-point Gauss-Jacobi rule on [0, 1] against the weight (1 - x)^alpha,
// via the Golub-Welsch eigenproblem. Exact through degree 2n - 1; the weight
// function is folded into the returned weights.
QuadratureRule gauss_jacobi_1d(int n, int alpha);

// Quadrature for degree-p forms on the reference cell, p + 1 points per
// direction. Boxes take the Gauss-Legendre tensor rule. Simplices use
// collapsed (Duffy) coordinates with the collapse Jacobian absorbed into
// Gauss-Jacobi weights, which keeps total-degree exactness at 2p + 1; plain
// Gauss-Legendre would lose exactness to the Jacobian's extra degrees.
QuadratureRule rule_for(const ReferenceCell& cell, int p);

}  // namespace mpfem
