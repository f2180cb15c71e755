#pragma once
#include <vector>

#include "mpfem/elements.hpp"
#include "mpfem/geometry.hpp"
#include "mpfem/kernels.hpp"

namespace mpfem {

// gamma_n = n u / (1 - n u), the classical factor bounding n accumulated
// roundings at unit roundoff u. Throws CheckError when n u >= 1, where the
// factor stops being a bound.
double gamma_term(int n, Fmt fmt);

// First-order error budget of one cell's kernels, every quantity evaluated in
// binary64. The theta_* tensors carry basis-evaluation sensitivity (they
// multiply u_p), the gamma_* tensors carry geometry sensitivity (they
// multiply u_g), and the products_* tensors are the absolute-value product
// sums whose accumulation multiplies u_s + n_q u_q. Condition numbers divide
// each budget's max norm by the exact output's max norm, so
//   bound = (u_s + n_q u_q) kappa_q + u_p kappa_p + u_g kappa_g
// bounds the relative output error to first order with all constants set to
// one. When an exact output is identically zero its relative quantities are
// meaningless: applicable is false and the bound is NaN.
struct BoundReport {
  int n_d = 1;
  int n_q = 0;

  // Exact binary64 outputs.
  Mat a;                  // n_phi x n_phi
  std::vector<double> v;  // n_phi

  // Stage values and budgets. b and theta_b use the tabulation layout
  // (s * n_phi + k) * n_q + q; c, theta_c, gamma_c are flattened
  // (s * n_d + t) * n_q + q; r, theta_r, gamma_r are flattened s * n_q + q.
  std::vector<double> b, theta_b;
  std::vector<double> c, theta_c, gamma_c;
  std::vector<double> r, theta_r, gamma_r;
  // Product stage: one n_q x n_phi matrix per (s, t) pair, s-major.
  std::vector<Mat> h, theta_h, gamma_h;

  // Output budgets.
  Mat products_a, theta_a, gamma_a;
  std::vector<double> products_v, theta_v, gamma_v;

  double kappa_q_a = 0.0, kappa_p_a = 0.0, kappa_g_a = 0.0;
  double kappa_q_v = 0.0, kappa_p_v = 0.0, kappa_g_v = 0.0;
  bool a_applicable = false;
  bool v_applicable = false;
  double bound_a = 0.0;
  double bound_v = 0.0;

  double bound_for(ModeKind mode) const;
  bool applicable_for(ModeKind mode) const;
};

// Evaluates the full budget for one cell under the setup's precision
// assignment. geom must have been evaluated at binary64 (ConfigError
// otherwise); conditioning comes from basis_condition_numbers on the same
// basis. Empty z or w stands for the constant-one field.
BoundReport kernel_bounds(const KernelSetup& setup,
                          const BasisConditioning& conditioning,
                          const GeometryData& geom, const Coefficients& z,
                          const Coefficients& w);

// Scales a per-cell relative bound to global assembly: shared degrees of
// freedom add up to m_k local contributions per output entry, squaring the
// factor for bilinear outputs.
double assembly_bound(const BoundReport& report, int m_k, ModeKind mode);

}  // namespace mpfem
