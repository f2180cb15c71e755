#include "mpfem/elements.hpp"

#include <cmath>
#include <limits>

#include "mpfem/common.hpp"

namespace mpfem {

namespace {

// P_n(x) and derivatives on [-1, 1].
void legendre_all(int n, double x, double& p, double& dp, double& ddp) {
  double p0 = 1.0, p1 = x;
  for (int j = 2; j <= n; ++j) {
    double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / double(j);
    p0 = p1;
    p1 = p2;
  }
  p = (n == 0) ? 1.0 : p1;
  dp = (n == 0) ? 0.0 : double(n) * (x * p1 - p0) / (x * x - 1.0);
  ddp = (2.0 * x * dp - double(n) * double(n + 1) * p) / (1.0 - x * x);
}

// 1D interpolation nodes on [0, 1], ascending, endpoints included.
std::vector<double> nodes_1d(int p, NodeFamily family) {
  std::vector<double> xs(p + 1);
  if (family == NodeFamily::equispaced || p == 1) {
    for (int j = 0; j <= p; ++j) xs[j] = double(j) / double(p);
    return xs;
  }
  // Gauss-Lobatto: endpoints plus the roots of P_p' via Newton.
  xs[0] = 0.0;
  xs[p] = 1.0;
  for (int k = 1; k < p; ++k) {
    double x = -std::cos(M_PI * double(k) / double(p));
    for (int iter = 0;; ++iter) {
      if (iter >= 100) throw CheckError("internal error: Lobatto Newton stalled");
      double v, dv, ddv;
      legendre_all(p, x, v, dv, ddv);
      double step = dv / ddv;
      x -= step;
      if (std::fabs(step) < 1e-15) break;
    }
    xs[k] = 0.5 * (x + 1.0);
  }
  return xs;
}

LagrangeBasis build_box_basis(const ReferenceCell& cell, int p, NodeFamily family) {
  LagrangeBasis basis;
  basis.cell = cell;
  basis.p = p;
  basis.m = p * cell.dim;
  std::vector<double> xs = nodes_1d(p, family);
  int n1 = p + 1;
  basis.n_phi = 1;
  for (int a = 0; a < cell.dim; ++a) basis.n_phi *= n1;
  basis.nodes.reserve(basis.n_phi);
  basis.fns.reserve(basis.n_phi);
  for (int idx = 0; idx < basis.n_phi; ++idx) {
    int iax[3] = {0, 0, 0};
    int rem = idx;  // axis 0 varies fastest
    for (int a = 0; a < cell.dim; ++a) {
      iax[a] = rem % n1;
      rem /= n1;
    }
    std::array<double, 3> node{0.0, 0.0, 0.0};
    BasisFunction fn;
    fn.factors.reserve(basis.m);
    for (int a = 0; a < cell.dim; ++a) {
      node[a] = xs[iax[a]];
      for (int j = 0; j <= p; ++j) {
        if (j == iax[a]) continue;
        MonomialFactor f;
        f.a[a] = 1.0;
        f.b = -xs[j];
        f.derivative_sign[a] = 1;
        fn.factors.push_back(f);
        fn.weight /= xs[iax[a]] - xs[j];
      }
    }
    basis.nodes.push_back(node);
    basis.fns.push_back(std::move(fn));
  }
  return basis;
}

LagrangeBasis build_simplex_basis(const ReferenceCell& cell, int p) {
  LagrangeBasis basis;
  basis.cell = cell;
  basis.p = p;
  basis.m = p;
  int d = cell.dim;

  // Enumerate multi-indices (alpha_1 .. alpha_d) with sum <= p, axis 0 fastest;
  // alpha_0 = p - sum. Vertex 0 comes first, axis vertices match the degree-1
  // geometry ordering.
  std::vector<std::array<int, 4>> alphas;
  int count[3] = {0, 0, 0};
  for (;;) {
    int sum = 0;
    for (int a = 0; a < d; ++a) sum += count[a];
    if (sum <= p) {
      std::array<int, 4> al{p - sum, 0, 0, 0};
      for (int a = 0; a < d; ++a) al[a + 1] = count[a];
      alphas.push_back(al);
    }
    int a = 0;
    for (; a < d; ++a) {
      if (++count[a] <= p) break;
      count[a] = 0;
    }
    if (a == d) break;
  }

  basis.n_phi = int(alphas.size());
  basis.nodes.reserve(basis.n_phi);
  basis.fns.reserve(basis.n_phi);
  for (const auto& al : alphas) {
    std::array<double, 3> node{0.0, 0.0, 0.0};
    for (int a = 0; a < d; ++a) node[a] = double(al[a + 1]) / double(p);
    BasisFunction fn;
    fn.factors.reserve(p);
    for (int i = 0; i <= d; ++i) {
      for (int k = 0; k < al[i]; ++k) {
        MonomialFactor f;
        if (i == 0) {  // lambda_0 = 1 - sum_a x_a
          for (int a = 0; a < d; ++a) {
            f.a[a] = -1.0;
            f.derivative_sign[a] = -1;
          }
          f.b = 1.0 - double(k) / double(p);
        } else {
          f.a[i - 1] = 1.0;
          f.derivative_sign[i - 1] = 1;
          f.b = -double(k) / double(p);
        }
        fn.factors.push_back(f);
        fn.weight *= double(p) / double(al[i] - k);
      }
    }
    basis.nodes.push_back(node);
    basis.fns.push_back(std::move(fn));
  }
  return basis;
}

}  // namespace

LagrangeBasis build_basis(const ReferenceCell& cell, int p, NodeFamily family) {
  if (p < 1) throw ConfigError("element degree must be at least 1");
  if (cell.dim < 1 || cell.dim > 3) throw ConfigError("cell dimension must be 1, 2 or 3");
  if (p * cell.dim > 32) throw ConfigError("element degree too high (m exceeds 32)");
  if (cell.kind == CellKind::simplex) {
    if (family == NodeFamily::gauss_lobatto) {
      throw ConfigError("Gauss-Lobatto nodes are only defined for box cells");
    }
    if (cell.dim == 1) return build_box_basis(ReferenceCell{CellKind::box, 1}, p, family);
    return build_simplex_basis(cell, p);
  }
  return build_box_basis(cell, p, family);
}

double factor_value(const MonomialFactor& f, const double* x, int dim) {
  double v = f.b;
  for (int a = 0; a < dim; ++a) v += f.a[a] * x[a];
  return v;
}

double eval_basis(const LagrangeBasis& basis, int i, const double* x, Fmt fmt,
                  FpFlags& flags) {
  const BasisFunction& fn = basis.fns[i];
  int dim = basis.cell.dim;
  double acc = round_to(factor_value(fn.factors[0], x, dim), fmt, flags);
  for (int j = 1; j < basis.m; ++j) {
    double lj = round_to(factor_value(fn.factors[j], x, dim), fmt, flags);
    acc = fp_mul(acc, lj, fmt, flags);
  }
  return fp_mul(acc, round_to(fn.weight, fmt, flags), fmt, flags);
}

std::array<double, 3> eval_basis_gradient(const LagrangeBasis& basis, int i,
                                          const double* x, Fmt fmt, FpFlags& flags) {
  const BasisFunction& fn = basis.fns[i];
  int dim = basis.cell.dim;
  int m = basis.m;
  double lhat[32];
  for (int j = 0; j < m; ++j) {
    lhat[j] = round_to(factor_value(fn.factors[j], x, dim), fmt, flags);
  }
  double what = round_to(fn.weight, fmt, flags);
  std::array<double, 3> grad{0.0, 0.0, 0.0};
  for (int s = 0; s < dim; ++s) {
    double acc = 0.0;
    for (int j = 0; j < m; ++j) {
      int sign = fn.factors[j].derivative_sign[s];
      if (sign == 0) continue;
      double prod = 1.0;  // empty product is exact
      bool first = true;
      for (int k = 0; k < m; ++k) {
        if (k == j) continue;
        prod = first ? lhat[k] : fp_mul(prod, lhat[k], fmt, flags);
        first = false;
      }
      acc = sign > 0 ? fp_add(acc, prod, fmt, flags) : fp_sub(acc, prod, fmt, flags);
    }
    grad[s] = fp_mul(acc, what, fmt, flags);
  }
  return grad;
}

double eval_fe_function(const LagrangeBasis& basis, const std::vector<double>& z,
                        const double* x, Fmt fmt, FpFlags& flags) {
  double acc = 0.0;
  for (int i = 0; i < basis.n_phi; ++i) {
    double zi = round_to(z[i], fmt, flags);
    double phi = eval_basis(basis, i, x, fmt, flags);
    acc = fp_add(acc, fp_mul(zi, phi, fmt, flags), fmt, flags);
  }
  return acc;
}

std::array<double, 3> eval_fe_gradient(const LagrangeBasis& basis,
                                       const std::vector<double>& z, const double* x,
                                       Fmt fmt, FpFlags& flags) {
  std::array<double, 3> acc{0.0, 0.0, 0.0};
  for (int i = 0; i < basis.n_phi; ++i) {
    double zi = round_to(z[i], fmt, flags);
    std::array<double, 3> g = eval_basis_gradient(basis, i, x, fmt, flags);
    for (int s = 0; s < basis.cell.dim; ++s) {
      acc[s] = fp_add(acc[s], fp_mul(zi, g[s], fmt, flags), fmt, flags);
    }
  }
  return acc;
}

double basis_factor_complement(const LagrangeBasis& basis, int i, int j,
                               const double* x) {
  const BasisFunction& fn = basis.fns[i];
  double prod = fn.weight;
  for (int k = 0; k < basis.m; ++k) {
    if (k == j) continue;
    prod *= factor_value(fn.factors[k], x, basis.cell.dim);
  }
  return prod;
}

Tabulation tabulate(const LagrangeBasis& basis, const QuadratureRule& rule, Fmt eval_fmt,
                    Fmt store_fmt, bool gradients, FpFlags& flags) {
  Tabulation tab;
  tab.n_d = gradients ? basis.cell.dim : 1;
  tab.n_phi = basis.n_phi;
  tab.n_q = rule.n_points;
  tab.eval_fmt = eval_fmt;
  tab.store_fmt = store_fmt;
  tab.gradients = gradients;
  tab.data.resize(std::size_t(tab.n_d) * tab.n_phi * tab.n_q);
  for (int k = 0; k < tab.n_phi; ++k) {
    for (int q = 0; q < tab.n_q; ++q) {
      const double* xq = rule.point(q);
      if (gradients) {
        std::array<double, 3> g = eval_basis_gradient(basis, k, xq, eval_fmt, flags);
        for (int s = 0; s < tab.n_d; ++s) {
          tab.at(s, k, q) = round_to(g[s], store_fmt, flags);
        }
      } else {
        tab.at(0, k, q) = round_to(eval_basis(basis, k, xq, eval_fmt, flags), store_fmt,
                                   flags);
      }
    }
  }
  return tab;
}

namespace {

// Draws a uniform point in the reference cell (rejection for simplices).
std::array<double, 3> sample_point(const ReferenceCell& cell, Rng& rng) {
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (;;) {
    double sum = 0.0;
    for (int a = 0; a < cell.dim; ++a) {
      x[a] = rng.uniform(0.0, 1.0);
      sum += x[a];
    }
    if (cell.kind == CellKind::box || sum <= 1.0) return x;
  }
}

}  // namespace

BasisConditioning basis_condition_numbers(const LagrangeBasis& basis, int n_random,
                                          uint64_t seed) {
  int d = basis.cell.dim;
  int m = basis.m;
  BasisConditioning bc;
  bc.grad_kappa = Mat(basis.n_phi, d);
  bc.grad_numerator_max = Mat(basis.n_phi, d);
  bc.grad_abs_max = Mat(basis.n_phi, d);

  std::vector<std::array<double, 3>> samples;
  QuadratureRule rule = rule_for(basis.cell, basis.p);
  for (int q = 0; q < rule.n_points; ++q) {
    std::array<double, 3> x{0.0, 0.0, 0.0};
    for (int a = 0; a < d; ++a) x[a] = rule.point(q)[a];
    samples.push_back(x);
  }
  samples.insert(samples.end(), basis.nodes.begin(), basis.nodes.end());
  Rng rng(seed);
  for (int i = 0; i < n_random; ++i) samples.push_back(sample_point(basis.cell, rng));

  std::vector<double> lv(m), prefix(m + 1), suffix(m + 1);
  for (const auto& x : samples) {
    double sum_abs_phi = 0.0;
    double sum_abs_grad[3] = {0.0, 0.0, 0.0};
    for (int i = 0; i < basis.n_phi; ++i) {
      const BasisFunction& fn = basis.fns[i];
      for (int j = 0; j < m; ++j) lv[j] = factor_value(fn.factors[j], x.data(), d);
      prefix[0] = 1.0;
      for (int j = 0; j < m; ++j) prefix[j + 1] = prefix[j] * lv[j];
      suffix[m] = 1.0;
      for (int j = m - 1; j >= 0; --j) suffix[j] = suffix[j + 1] * lv[j];
      sum_abs_phi += std::fabs(fn.weight * prefix[m]);
      for (int s = 0; s < d; ++s) {
        double grad = 0.0, numer = 0.0;
        for (int j = 0; j < m; ++j) {
          int sign = fn.factors[j].derivative_sign[s];
          if (sign == 0) continue;
          double complement = fn.weight * prefix[j] * suffix[j + 1];
          grad += sign * complement;
          numer += std::fabs(complement);
        }
        sum_abs_grad[s] += std::fabs(grad);
        bc.grad_abs_max(i, s) = std::max(bc.grad_abs_max(i, s), std::fabs(grad));
        bc.grad_numerator_max(i, s) = std::max(bc.grad_numerator_max(i, s), numer);
      }
    }
    bc.lebesgue = std::max(bc.lebesgue, sum_abs_phi);
    for (int s = 0; s < d; ++s) {
      bc.grad_lebesgue[s] = std::max(bc.grad_lebesgue[s], sum_abs_grad[s]);
    }
  }

  for (int i = 0; i < basis.n_phi; ++i) {
    for (int s = 0; s < d; ++s) {
      double numer = bc.grad_numerator_max(i, s);
      double denom = bc.grad_abs_max(i, s);
      double kappa = 1.0;  // exact evaluation when no term carries this axis
      if (numer > 0.0) {
        kappa = denom > 0.0 ? numer / denom
                            : std::numeric_limits<double>::infinity();
      }
      bc.grad_kappa(i, s) = kappa;
      bc.grad_kappa_max[s] = std::max(bc.grad_kappa_max[s], kappa);
    }
  }
  return bc;
}

}  // namespace mpfem
