#pragma once
#include <array>
#include <cstdint>
#include <vector>

#include "mpfem/cell.hpp"
#include "mpfem/linalg.hpp"
#include "mpfem/quadrature.hpp"
#include "mpfem/softfloat.hpp"

namespace mpfem {

// First-degree factor  l(x) = a . x + b  of a basis function written in
// product form. After normalization every coefficient is -1, 0 or +1, so
// derivative_sign doubles as the coefficient vector.
struct MonomialFactor {
  std::array<double, 3> a{0.0, 0.0, 0.0};
  double b = 0.0;
  std::array<int8_t, 3> derivative_sign{0, 0, 0};
};

struct BasisFunction {
  double weight = 1.0;                  // scale pulled out of the factors
  std::vector<MonomialFactor> factors;  // exactly m entries
};

enum class NodeFamily : uint8_t { equispaced, gauss_lobatto };

// Degree-p nodal Lagrange basis on the reference cell in product form:
// phi_i = weight_i * prod_j l_ij. Boxes have m = p*d factors per function,
// simplices m = p.
struct LagrangeBasis {
  ReferenceCell cell;
  int p = 1;
  int n_phi = 0;
  int m = 0;
  // Roundoffs per factor evaluation: factors are evaluated in binary64 and
  // rounded once to the working format, so r = 1.
  int monomial_roundoffs = 1;
  std::vector<std::array<double, 3>> nodes;
  std::vector<BasisFunction> fns;
};

// Gauss-Lobatto nodes are available for boxes only; simplices always use the
// equispaced lattice.
LagrangeBasis build_basis(const ReferenceCell& cell, int p,
                          NodeFamily family = NodeFamily::equispaced);

// Exact binary64 value of one affine factor.
double factor_value(const MonomialFactor& f, const double* x, int dim);

// phi_i(x) at format fmt: each factor evaluated in binary64 and rounded once,
// then multiplied left to right in construction order, weight last.
double eval_basis(const LagrangeBasis& basis, int i, const double* x, Fmt fmt,
                  FpFlags& flags);

// All d components of grad phi_i(x) at format fmt: signed complement products
// in ascending factor order, summed in order, weight last.
std::array<double, 3> eval_basis_gradient(const LagrangeBasis& basis, int i,
                                          const double* x, Fmt fmt, FpFlags& flags);

// z_h(x) = sum_i z_i phi_i(x) at format fmt; coefficients are rounded to fmt,
// products and the ascending-i accumulation round at fmt.
double eval_fe_function(const LagrangeBasis& basis, const std::vector<double>& z,
                        const double* x, Fmt fmt, FpFlags& flags);

std::array<double, 3> eval_fe_gradient(const LagrangeBasis& basis,
                                       const std::vector<double>& z, const double* x,
                                       Fmt fmt, FpFlags& flags);

// Binary64 complement product  weight_i * prod_{k != j} l_ik(x).
double basis_factor_complement(const LagrangeBasis& basis, int i, int j,
                               const double* x);

// Tabulated basis data: values (n_d = 1) or gradients (n_d = d), evaluated at
// eval_fmt and stored rounded to store_fmt. Slab s is an n_phi x n_q row-major
// matrix: row = function, column = quadrature point.
struct Tabulation {
  int n_d = 1;
  int n_phi = 0;
  int n_q = 0;
  Fmt eval_fmt = Fmt::fp64;
  Fmt store_fmt = Fmt::fp64;
  bool gradients = false;
  std::vector<double> data;

  double& at(int s, int k, int q) {
    return data[(std::size_t(s) * n_phi + k) * n_q + q];
  }
  double at(int s, int k, int q) const {
    return data[(std::size_t(s) * n_phi + k) * n_q + q];
  }
  const double* slab(int s) const { return data.data() + std::size_t(s) * n_phi * n_q; }
};

Tabulation tabulate(const LagrangeBasis& basis, const QuadratureRule& rule, Fmt eval_fmt,
                    Fmt store_fmt, bool gradients, FpFlags& flags);

// Sampled condition numbers of basis evaluation (maxima over the quadrature
// lattice, the nodes and a seeded set of random interior points; lower bounds
// of the true suprema).
struct BasisConditioning {
  double lebesgue = 1.0;                      // max_x sum_i |phi_i|
  std::array<double, 3> grad_lebesgue{};      // per axis: max_x sum_i |d_s phi_i|
  Mat grad_kappa;                             // (n_phi x d) evaluation condition numbers
  std::array<double, 3> grad_kappa_max{};     // per axis: max_i of the above
  Mat grad_numerator_max;                     // (n_phi x d) max_x sum_{j in axis} |phi/l_j|
  Mat grad_abs_max;                           // (n_phi x d) max_x |d_s phi_i|
};

BasisConditioning basis_condition_numbers(const LagrangeBasis& basis,
                                          int n_random = 2000, uint64_t seed = 9001);

}  // namespace mpfem
