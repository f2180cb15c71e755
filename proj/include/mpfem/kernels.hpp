#pragma once
#include <cstdint>
#include <vector>

#include "mpfem/elements.hpp"
#include "mpfem/geometry.hpp"
#include "mpfem/mm_units.hpp"

namespace mpfem {

enum class ModeKind : uint8_t { bilinear, action };

FormKind form_from_name(const std::string& name);
ModeKind mode_from_name(const std::string& name);
const char* form_name(FormKind form);
const char* mode_name(ModeKind mode);

// Precision assignment of the local kernels: u_p basis evaluation, u_g
// geometry, u_q accumulation, u_s tensor storage.
struct KernelConfig {
  FormKind form = FormKind::mass;
  ModeKind mode = ModeKind::bilinear;
  Fmt u_p = Fmt::fp64;
  Fmt u_g = Fmt::fp64;
  Fmt u_q = Fmt::fp64;
  Fmt u_s = Fmt::fp64;
  EngineKind engine = EngineKind::scalar;
  int n_batch = 64;
};

// Hard constraints: positive batch, and the matrix engine only runs with its
// native input/accumulate formats (u_s and u_q respectively).
void validate_config(const KernelConfig& config);

// Soft constraint: storage is the coarsest precision
// (max of the u_p, u_g, u_q roundoffs is at most the u_s roundoff). Sweeps
// may deliberately break this; the flag is reported, not enforced.
bool follows_precision_ordering(const KernelConfig& config);

KernelConfig reference_config(FormKind form, ModeKind mode);

// Immutable per-configuration state shared by every cell: basis, rule, and
// the tabulations. tab_store backs the engine operands B (evaluated at u_p,
// stored at u_s); store_slabs exposes each of its slabs as a matrix operand;
// tab_values holds basis values at u_p for evaluating the coefficient z.
// n_d is 1 for mass, d for Poisson.
struct KernelSetup {
  KernelConfig config;
  LagrangeBasis basis;
  QuadratureRule rule;
  int n_d = 1;
  Tabulation tab_store;
  std::vector<Mat> store_slabs;
  Tabulation tab_values;
  Mat b_cat_bilinear;  // n_phi x (n_d^2 n_q): B_s block per (s, t), s-major
  Mat b_cat_action;    // n_phi x (n_d n_q): B_s blocks ascending
  FpFlags setup_flags;  // flags raised while tabulating
};

KernelSetup make_setup(const ReferenceCell& cell, int p, const KernelConfig& config);
KernelSetup make_setup(const ReferenceCell& cell, int p, const KernelConfig& config,
                       const QuadratureRule& rule);

// An empty coefficient vector means the field is constantly one and its
// multiplications are skipped.
using Coefficients = std::vector<double>;

// C_stq = round_us(omega_q * G_st(x_q) * z(x_q)) with products at u_g;
// flattened (s*n_d + t)*n_q + q. Symmetric in (s, t) bitwise.
std::vector<double> build_C(const KernelSetup& setup, const GeometryData& geom,
                            const Coefficients& z, FpFlags& flags);

// H_st = C_st B_t^T at u_s: one multiply per entry, H[q, k] = C_stq B_t[k, q].
Mat build_H(const KernelSetup& setup, const std::vector<double>& c_diag, int s, int t,
            FpFlags& flags);

// One cell's action integrand, flattened s-major (entry s*n_q + q) at u_s:
// r_sq = round_us(omega_q * z(x_q) * (G gradw(x_q))_s) (mass: G w(x_q)).
std::vector<double> build_r(const KernelSetup& setup, const GeometryData& geom,
                            const Coefficients& z, const Coefficients& w,
                            FpFlags& flags);

// Algorithm: A = sum_st B_s C_st B_t^T with the (s, t, q) accumulation run as
// one depth-chained engine matmul at u_q. Result is n_phi x n_phi.
Mat bilinear_kernel(const KernelSetup& setup, const GeometryData& geom,
                    const Coefficients& z, FpFlags& flags);

// Batched action: column j holds cell j's v = sum_s B_s r_s at u_q. Columns
// are bit-identical to running the batch one cell at a time.
Mat action_kernel(const KernelSetup& setup, const std::vector<GeometryData>& geoms,
                  const std::vector<Coefficients>& w, const Coefficients& z,
                  FpFlags& flags);

}  // namespace mpfem
