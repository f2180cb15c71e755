#include "mpfem/bounds.hpp"

#include <cmath>
#include <limits>

#include "mpfem/common.hpp"

namespace mpfem {

double gamma_term(int n, Fmt fmt) {
  if (n < 0) {
    throw ConfigError("gamma term needs a nonnegative count");
  }
  double nu = double(n) * format_info(fmt).u;
  if (nu >= 1.0) {
    throw CheckError("gamma term is not a bound once n*u reaches 1");
  }
  return nu / (1.0 - nu);
}

double BoundReport::bound_for(ModeKind mode) const {
  return mode == ModeKind::bilinear ? bound_a : bound_v;
}

bool BoundReport::applicable_for(ModeKind mode) const {
  return mode == ModeKind::bilinear ? a_applicable : v_applicable;
}

BoundReport kernel_bounds(const KernelSetup& setup,
                          const BasisConditioning& conditioning,
                          const GeometryData& geom, const Coefficients& z,
                          const Coefficients& w) {
  if (geom.fmt != Fmt::fp64) {
    throw ConfigError("bound evaluation needs binary64 geometry data");
  }
  const LagrangeBasis& basis = setup.basis;
  const QuadratureRule& rule = setup.rule;
  int d = basis.cell.dim;
  int n_phi = basis.n_phi;
  int n_q = rule.n_points;
  int n_d = setup.n_d;
  bool poisson = setup.config.form == FormKind::poisson;
  if (geom.n_entries() < (geom.affine ? 1 : n_q)) {
    throw ConfigError("geometry data does not cover the quadrature rule");
  }
  bool z_const = z.empty();
  if (!z_const && int(z.size()) != n_phi) {
    throw ConfigError("coefficient z needs one entry per basis function");
  }
  Coefficients wc = w;
  if (wc.empty()) {
    wc.assign(std::size_t(n_phi), 1.0);
  } else if (int(wc.size()) != n_phi) {
    throw ConfigError("coefficient w needs one entry per basis function");
  }

  BoundReport report;
  report.n_d = n_d;
  report.n_q = n_q;

  // Exact stage values are recomputed in binary64; the setup's tabulations are
  // reduced precision and never enter the budgets.
  FpFlags scratch;
  Tabulation tab =
      tabulate(basis, rule, Fmt::fp64, Fmt::fp64, poisson, scratch);

  double dp = double(d) * basis.p;
  double pd = std::pow(double(basis.p), d);
  double kv = conditioning.lebesgue;
  double z_norm = z_const ? 0.0 : max_abs(z);
  double w_norm = max_abs(wc);

  report.b = tab.data;
  report.theta_b.assign(report.b.size(), 0.0);
  if (poisson) {
    // Derivative values: the evaluation error is relative to the largest
    // derivative value over the rule, scaled by that function's per-axis
    // evaluation condition number.
    for (int s = 0; s < n_d; ++s) {
      for (int k = 0; k < n_phi; ++k) {
        double peak = 0.0;
        for (int q = 0; q < n_q; ++q) {
          peak = std::max(peak, std::fabs(tab.at(s, k, q)));
        }
        double budget = dp * conditioning.grad_kappa(k, s) * peak;
        for (int q = 0; q < n_q; ++q) {
          report.theta_b[(std::size_t(s) * n_phi + k) * n_q + q] = budget;
        }
      }
    }
  } else {
    for (std::size_t i = 0; i < report.b.size(); ++i) {
      report.theta_b[i] = dp * std::fabs(report.b[i]);
    }
  }

  // Coefficient fields at the rule points, binary64.
  std::vector<double> z_at(n_q, 1.0);
  std::vector<double> w_at(n_q, 0.0);
  std::vector<std::array<double, 3>> gw_at(n_q);
  for (int q = 0; q < n_q; ++q) {
    const double* x = rule.point(q);
    if (!z_const) {
      z_at[q] = eval_fe_function(basis, z, x, Fmt::fp64, scratch);
    }
    w_at[q] = eval_fe_function(basis, wc, x, Fmt::fp64, scratch);
    if (poisson) {
      gw_at[q] = eval_fe_gradient(basis, wc, x, Fmt::fp64, scratch);
    }
  }

  // Scaled-weight stage.
  std::size_t c_size = std::size_t(n_d) * n_d * n_q;
  report.c.assign(c_size, 0.0);
  report.theta_c.assign(c_size, 0.0);
  report.gamma_c.assign(c_size, 0.0);
  for (int s = 0; s < n_d; ++s) {
    for (int t = 0; t < n_d; ++t) {
      for (int q = 0; q < n_q; ++q) {
        const GeometryPoint& gp = geom.at(q);
        double omega = rule.weights[q];
        std::size_t idx = (std::size_t(s) * n_d + t) * n_q + q;
        report.c[idx] = omega * gp.tensor(s, t) * z_at[q];
        if (!z_const) {
          report.theta_c[idx] =
              pd * kv * z_norm * std::fabs(omega * gp.tensor(s, t));
        }
        report.gamma_c[idx] = gp.kappa_cell * gp.kappa2 *
                              std::fabs(omega * gp.tensor_tilde(s, t) * z_at[q]);
      }
    }
  }

  // Action integrand stage.
  std::size_t r_size = std::size_t(n_d) * n_q;
  report.r.assign(r_size, 0.0);
  report.theta_r.assign(r_size, 0.0);
  report.gamma_r.assign(r_size, 0.0);
  for (int q = 0; q < n_q; ++q) {
    const GeometryPoint& gp = geom.at(q);
    double omega = rule.weights[q];
    double kk2 = gp.kappa_cell * gp.kappa2;
    if (poisson) {
      for (int s = 0; s < n_d; ++s) {
        double gw_s = 0.0;       // (G gradw)_s
        double gtw_s = 0.0;      // (|Gtilde| |gradw|)_s
        double kappa_s = 0.0;    // sum_t |G_st| kappa(d_t Phi) kappa(d_t V)
        for (int t = 0; t < n_d; ++t) {
          gw_s += gp.tensor(s, t) * gw_at[q][t];
          gtw_s += std::fabs(gp.tensor_tilde(s, t)) * std::fabs(gw_at[q][t]);
          kappa_s += std::fabs(gp.tensor(s, t)) * conditioning.grad_kappa_max[t] *
                     conditioning.grad_lebesgue[t];
        }
        std::size_t idx = std::size_t(s) * n_q + q;
        report.r[idx] = omega * z_at[q] * gw_s;
        report.theta_r[idx] =
            pd * std::fabs(omega) *
            (kv * z_norm * std::fabs(gw_s) + std::fabs(z_at[q]) * w_norm * kappa_s);
        report.gamma_r[idx] = kk2 * std::fabs(omega * z_at[q]) * gtw_s;
      }
    } else {
      double g = gp.tensor(0, 0);
      report.r[q] = omega * z_at[q] * g * w_at[q];
      report.theta_r[q] = pd * kv *
                          (std::fabs(w_at[q]) * z_norm + std::fabs(z_at[q]) * w_norm) *
                          std::fabs(omega * g);
      report.gamma_r[q] = kk2 * std::fabs(report.r[q]);
    }
  }

  // Product stage: each entry is one scaled weight times one stored value, so
  // its budget follows the product rule from the two stage budgets.
  report.h.assign(std::size_t(n_d) * n_d, Mat());
  report.theta_h.assign(std::size_t(n_d) * n_d, Mat());
  report.gamma_h.assign(std::size_t(n_d) * n_d, Mat());
  for (int s = 0; s < n_d; ++s) {
    for (int t = 0; t < n_d; ++t) {
      Mat h(n_q, n_phi), th(n_q, n_phi), gh(n_q, n_phi);
      for (int q = 0; q < n_q; ++q) {
        std::size_t cidx = (std::size_t(s) * n_d + t) * n_q + q;
        for (int k = 0; k < n_phi; ++k) {
          double bval = tab.at(t, k, q);
          double tb = report.theta_b[(std::size_t(t) * n_phi + k) * n_q + q];
          h(q, k) = report.c[cidx] * bval;
          th(q, k) = report.theta_c[cidx] * std::fabs(bval) +
                     std::fabs(report.c[cidx]) * tb;
          gh(q, k) = report.gamma_c[cidx] * std::fabs(bval);
        }
      }
      report.h[std::size_t(s) * n_d + t] = std::move(h);
      report.theta_h[std::size_t(s) * n_d + t] = std::move(th);
      report.gamma_h[std::size_t(s) * n_d + t] = std::move(gh);
    }
  }

  // Output accumulation, run in the kernels' depth order.
  report.a = Mat(n_phi, n_phi);
  report.products_a = Mat(n_phi, n_phi);
  report.theta_a = Mat(n_phi, n_phi);
  report.gamma_a = Mat(n_phi, n_phi);
  for (int i = 0; i < n_phi; ++i) {
    for (int k = 0; k < n_phi; ++k) {
      double acc = 0.0, sa = 0.0, ta = 0.0, ga = 0.0;
      for (int s = 0; s < n_d; ++s) {
        for (int t = 0; t < n_d; ++t) {
          const Mat& h = report.h[std::size_t(s) * n_d + t];
          const Mat& th = report.theta_h[std::size_t(s) * n_d + t];
          const Mat& gh = report.gamma_h[std::size_t(s) * n_d + t];
          for (int q = 0; q < n_q; ++q) {
            double b = tab.at(s, i, q);
            double tb = report.theta_b[(std::size_t(s) * n_phi + i) * n_q + q];
            acc += b * h(q, k);
            sa += std::fabs(b) * std::fabs(h(q, k));
            ta += std::fabs(b) * th(q, k) + tb * std::fabs(h(q, k));
            ga += std::fabs(b) * gh(q, k);
          }
        }
      }
      report.a(i, k) = acc;
      report.products_a(i, k) = sa;
      report.theta_a(i, k) = ta;
      report.gamma_a(i, k) = ga;
    }
  }

  report.v.assign(std::size_t(n_phi), 0.0);
  report.products_v.assign(std::size_t(n_phi), 0.0);
  report.theta_v.assign(std::size_t(n_phi), 0.0);
  report.gamma_v.assign(std::size_t(n_phi), 0.0);
  for (int i = 0; i < n_phi; ++i) {
    double acc = 0.0, sv = 0.0, tv = 0.0, gv = 0.0;
    for (int s = 0; s < n_d; ++s) {
      for (int q = 0; q < n_q; ++q) {
        double b = tab.at(s, i, q);
        double tb = report.theta_b[(std::size_t(s) * n_phi + i) * n_q + q];
        std::size_t idx = std::size_t(s) * n_q + q;
        acc += b * report.r[idx];
        sv += std::fabs(b) * std::fabs(report.r[idx]);
        tv += std::fabs(b) * report.theta_r[idx] + tb * std::fabs(report.r[idx]);
        gv += std::fabs(b) * report.gamma_r[idx];
      }
    }
    report.v[i] = acc;
    report.products_v[i] = sv;
    report.theta_v[i] = tv;
    report.gamma_v[i] = gv;
  }

  double u_p = format_info(setup.config.u_p).u;
  double u_g = format_info(setup.config.u_g).u;
  double u_q = format_info(setup.config.u_q).u;
  double u_s = format_info(setup.config.u_s).u;
  double nan = std::numeric_limits<double>::quiet_NaN();

  double a_norm = max_abs(report.a);
  if (a_norm > 0.0) {
    report.kappa_q_a = max_abs(report.products_a) / a_norm;
    report.kappa_p_a = max_abs(report.theta_a) / a_norm;
    report.kappa_g_a = max_abs(report.gamma_a) / a_norm;
    report.bound_a = (u_s + n_q * u_q) * report.kappa_q_a +
                     u_p * report.kappa_p_a + u_g * report.kappa_g_a;
    report.a_applicable = true;
  } else {
    report.kappa_q_a = report.kappa_p_a = report.kappa_g_a = nan;
    report.bound_a = nan;
  }

  double v_norm = max_abs(report.v);
  if (v_norm > 0.0) {
    report.kappa_q_v = max_abs(report.products_v) / v_norm;
    report.kappa_p_v = max_abs(report.theta_v) / v_norm;
    report.kappa_g_v = max_abs(report.gamma_v) / v_norm;
    report.bound_v = (u_s + n_q * u_q) * report.kappa_q_v +
                     u_p * report.kappa_p_v + u_g * report.kappa_g_v;
    report.v_applicable = true;
  } else {
    report.kappa_q_v = report.kappa_p_v = report.kappa_g_v = nan;
    report.bound_v = nan;
  }
  return report;
}

double assembly_bound(const BoundReport& report, int m_k, ModeKind mode) {
  if (m_k < 1) {
    throw ConfigError("assembly bound needs m_k >= 1");
  }
  double factor = mode == ModeKind::bilinear ? double(m_k) * m_k : double(m_k);
  return factor * report.bound_for(mode);
}

}  // namespace mpfem
