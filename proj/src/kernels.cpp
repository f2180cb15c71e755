#include "mpfem/kernels.hpp"

#include <string>

#include "mpfem/common.hpp"

namespace mpfem {

FormKind form_from_name(const std::string& name) {
  if (name == "mass") return FormKind::mass;
  if (name == "poisson") return FormKind::poisson;
  throw ConfigError("unknown form: '" + name + "'");
}

ModeKind mode_from_name(const std::string& name) {
  if (name == "bilinear") return ModeKind::bilinear;
  if (name == "action") return ModeKind::action;
  throw ConfigError("unknown mode: '" + name + "'");
}

const char* form_name(FormKind form) {
  return form == FormKind::mass ? "mass" : "poisson";
}

const char* mode_name(ModeKind mode) {
  return mode == ModeKind::bilinear ? "bilinear" : "action";
}

void validate_config(const KernelConfig& config) {
  if (config.n_batch < 1) throw ConfigError("batch size must be positive");
  if (config.engine == EngineKind::matrix) {
    MatmulUnitSpec unit;
    if (config.u_s != unit.input || config.u_q != unit.accum) {
      throw ConfigError(
          "matrix engine requires the unit's native formats: u_s = " +
          std::string(format_info(unit.input).name) +
          ", u_q = " + std::string(format_info(unit.accum).name));
    }
  }
}

bool follows_precision_ordering(const KernelConfig& config) {
  double us = format_info(config.u_s).u;
  return format_info(config.u_p).u <= us && format_info(config.u_g).u <= us &&
         format_info(config.u_q).u <= us;
}

KernelConfig reference_config(FormKind form, ModeKind mode) {
  KernelConfig config;
  config.form = form;
  config.mode = mode;
  return config;
}

namespace {

// Copies tabulation slabs into the horizontally concatenated operand driving
// the engine matmul: one B_s block per depth segment.
Mat concatenate_slabs(const Tabulation& tab, const std::vector<int>& slab_order) {
  Mat cat(tab.n_phi, int(slab_order.size()) * tab.n_q);
  for (int block = 0; block < int(slab_order.size()); ++block) {
    int s = slab_order[block];
    for (int k = 0; k < tab.n_phi; ++k) {
      for (int q = 0; q < tab.n_q; ++q) {
        cat(k, block * tab.n_q + q) = tab.at(s, k, q);
      }
    }
  }
  return cat;
}

}  // namespace

KernelSetup make_setup(const ReferenceCell& cell, int p, const KernelConfig& config) {
  return make_setup(cell, p, config, rule_for(cell, p));
}

KernelSetup make_setup(const ReferenceCell& cell, int p, const KernelConfig& config,
                       const QuadratureRule& rule) {
  validate_config(config);
  KernelSetup setup;
  setup.config = config;
  setup.basis = build_basis(cell, p);
  setup.rule = rule;
  bool gradients = config.form == FormKind::poisson;
  setup.n_d = gradients ? cell.dim : 1;
  setup.tab_store = tabulate(setup.basis, rule, config.u_p, config.u_s, gradients,
                             setup.setup_flags);
  setup.tab_values = tabulate(setup.basis, rule, config.u_p, config.u_p, false,
                              setup.setup_flags);
  setup.store_slabs.reserve(setup.n_d);
  for (int s = 0; s < setup.n_d; ++s) {
    Mat slab(setup.basis.n_phi, rule.n_points);
    for (int k = 0; k < setup.basis.n_phi; ++k) {
      for (int q = 0; q < rule.n_points; ++q) slab(k, q) = setup.tab_store.at(s, k, q);
    }
    setup.store_slabs.push_back(std::move(slab));
  }

  std::vector<int> bilinear_order, action_order;
  for (int s = 0; s < setup.n_d; ++s) {
    action_order.push_back(s);
    for (int t = 0; t < setup.n_d; ++t) bilinear_order.push_back(s);
  }
  setup.b_cat_bilinear = concatenate_slabs(setup.tab_store, bilinear_order);
  setup.b_cat_action = concatenate_slabs(setup.tab_store, action_order);
  return setup;
}

namespace {

// z(x_q) for every rule point: evaluated at u_p over the value tabulation,
// then cast to u_g. Empty z means constant one (handled by the callers).
std::vector<double> eval_z_at_ug(const KernelSetup& setup, const Coefficients& z,
                                 FpFlags& flags) {
  const KernelConfig& config = setup.config;
  const Tabulation& tab = setup.tab_values;
  std::vector<double> zhat(z.size() ? std::size_t(tab.n_q) : 0);
  if (z.empty()) return zhat;
  if (int(z.size()) != setup.basis.n_phi) {
    throw ConfigError("coefficient z needs one entry per basis function");
  }
  std::vector<double> zp(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    zp[i] = fp_cast(z[i], Fmt::fp64, config.u_p, flags);
  }
  for (int q = 0; q < tab.n_q; ++q) {
    double acc = 0.0;
    for (int k = 0; k < tab.n_phi; ++k) {
      acc = fp_add(acc, fp_mul(zp[k], tab.at(0, k, q), config.u_p, flags), config.u_p,
                   flags);
    }
    zhat[q] = fp_cast(acc, config.u_p, config.u_g, flags);
  }
  return zhat;
}

// w(x_q) (mass) or grad w(x_q) per axis (Poisson) for a batch of coefficient
// vectors, cast to u_g. Slab-major result: value(s, cell, q).
// One path for every engine: coefficients are rounded to u_s, contracted
// against the u_s tabulation through the configured engine accumulating at
// u_p, then cast to u_g. Engine equivalence makes the result bit-independent
// of the engine choice, and whenever u_s = u_p the path is exactly a plain
// u_p evaluation.
std::vector<double> eval_w_at_ug(const KernelSetup& setup,
                                 const std::vector<Coefficients>& w, FpFlags& flags) {
  const KernelConfig& config = setup.config;
  int batch = int(w.size());
  int n_q = setup.rule.n_points;
  int n_phi = setup.basis.n_phi;
  std::vector<double> out(std::size_t(setup.n_d) * batch * n_q);
  if (batch == 0) return out;
  Mat wmat(batch, n_phi);
  for (int j = 0; j < batch; ++j) {
    if (int(w[j].size()) != n_phi) {
      throw ConfigError("coefficient w needs one entry per basis function");
    }
    for (int k = 0; k < n_phi; ++k) {
      wmat(j, k) = fp_cast(w[j][k], Fmt::fp64, config.u_s, flags);
    }
  }
  for (int s = 0; s < setup.n_d; ++s) {
    Mat vals =
        blocked_matmul(wmat, setup.store_slabs[s], config.engine, config.u_p, flags);
    for (int j = 0; j < batch; ++j) {
      for (int q = 0; q < n_q; ++q) {
        out[(std::size_t(s) * batch + j) * n_q + q] =
            fp_cast(vals(j, q), config.u_p, config.u_g, flags);
      }
    }
  }
  return out;
}

}  // namespace

std::vector<double> build_C(const KernelSetup& setup, const GeometryData& geom,
                            const Coefficients& z, FpFlags& flags) {
  const KernelConfig& config = setup.config;
  int n_d = setup.n_d;
  int n_q = setup.rule.n_points;
  std::vector<double> zhat = eval_z_at_ug(setup, z, flags);
  std::vector<double> c(std::size_t(n_d) * n_d * n_q);
  for (int q = 0; q < n_q; ++q) {
    double omega = fp_cast(setup.rule.weights[q], Fmt::fp64, config.u_g, flags);
    const GeometryPoint& gp = geom.at(q);
    for (int s = 0; s < n_d; ++s) {
      for (int t = 0; t < n_d; ++t) {
        double value = fp_mul(omega, gp.tensor(s, t), config.u_g, flags);
        if (!z.empty()) value = fp_mul(value, zhat[q], config.u_g, flags);
        c[(std::size_t(s) * n_d + t) * n_q + q] =
            fp_cast(value, config.u_g, config.u_s, flags);
      }
    }
  }
  return c;
}

Mat build_H(const KernelSetup& setup, const std::vector<double>& c_diag, int s, int t,
            FpFlags& flags) {
  const KernelConfig& config = setup.config;
  int n_q = setup.rule.n_points;
  int n_phi = setup.basis.n_phi;
  const double* c_st = c_diag.data() + (std::size_t(s) * setup.n_d + t) * n_q;
  Mat h(n_q, n_phi);
  for (int q = 0; q < n_q; ++q) {
    for (int k = 0; k < n_phi; ++k) {
      h(q, k) = fp_mul(c_st[q], setup.tab_store.at(t, k, q), config.u_s, flags);
    }
  }
  return h;
}

std::vector<double> build_r(const KernelSetup& setup, const GeometryData& geom,
                            const Coefficients& z, const Coefficients& w,
                            FpFlags& flags) {
  const KernelConfig& config = setup.config;
  int n_d = setup.n_d;
  int n_q = setup.rule.n_points;
  std::vector<double> zhat = eval_z_at_ug(setup, z, flags);
  std::vector<double> what = eval_w_at_ug(setup, {w}, flags);
  std::vector<double> r(std::size_t(n_d) * n_q);
  for (int q = 0; q < n_q; ++q) {
    double omega = fp_cast(setup.rule.weights[q], Fmt::fp64, config.u_g, flags);
    const GeometryPoint& gp = geom.at(q);
    for (int s = 0; s < n_d; ++s) {
      // (G w)_s: matvec row s with t ascending, all at u_g.
      double t1 = 0.0;
      for (int t = 0; t < n_d; ++t) {
        double wt = what[std::size_t(t) * n_q + q];
        t1 = fp_add(t1, fp_mul(gp.tensor(s, t), wt, config.u_g, flags), config.u_g,
                    flags);
      }
      double m1 = fp_mul(omega, t1, config.u_g, flags);
      if (!z.empty()) m1 = fp_mul(m1, zhat[q], config.u_g, flags);
      r[std::size_t(s) * n_q + q] = fp_cast(m1, config.u_g, config.u_s, flags);
    }
  }
  return r;
}

Mat bilinear_kernel(const KernelSetup& setup, const GeometryData& geom,
                    const Coefficients& z, FpFlags& flags) {
  const KernelConfig& config = setup.config;
  if (config.mode != ModeKind::bilinear) {
    throw ConfigError("configuration is not a bilinear-mode config");
  }
  int n_d = setup.n_d;
  int n_q = setup.rule.n_points;
  int n_phi = setup.basis.n_phi;
  std::vector<double> c = build_C(setup, geom, z, flags);

  Mat h_cat(n_d * n_d * n_q, n_phi);
  for (int s = 0; s < n_d; ++s) {
    for (int t = 0; t < n_d; ++t) {
      const double* c_st = c.data() + (std::size_t(s) * n_d + t) * n_q;
      int row0 = (s * n_d + t) * n_q;
      for (int q = 0; q < n_q; ++q) {
        for (int k = 0; k < n_phi; ++k) {
          h_cat(row0 + q, k) =
              fp_mul(c_st[q], setup.tab_store.at(t, k, q), config.u_s, flags);
        }
      }
    }
  }
  return blocked_matmul(setup.b_cat_bilinear, h_cat, config.engine, config.u_q, flags);
}

Mat action_kernel(const KernelSetup& setup, const std::vector<GeometryData>& geoms,
                  const std::vector<Coefficients>& w, const Coefficients& z,
                  FpFlags& flags) {
  const KernelConfig& config = setup.config;
  if (config.mode != ModeKind::action) {
    throw ConfigError("configuration is not an action-mode config");
  }
  if (geoms.size() != w.size()) {
    throw ConfigError("action batch needs one coefficient vector per cell");
  }
  int batch = int(geoms.size());
  int n_d = setup.n_d;
  int n_q = setup.rule.n_points;
  std::vector<double> zhat = eval_z_at_ug(setup, z, flags);
  std::vector<double> what = eval_w_at_ug(setup, w, flags);

  Mat r_cat(n_d * n_q, batch);
  for (int j = 0; j < batch; ++j) {
    for (int q = 0; q < n_q; ++q) {
      double omega = fp_cast(setup.rule.weights[q], Fmt::fp64, config.u_g, flags);
      const GeometryPoint& gp = geoms[j].at(q);
      for (int s = 0; s < n_d; ++s) {
        double t1 = 0.0;
        for (int t = 0; t < n_d; ++t) {
          double wt = what[(std::size_t(t) * batch + j) * n_q + q];
          t1 = fp_add(t1, fp_mul(gp.tensor(s, t), wt, config.u_g, flags), config.u_g,
                      flags);
        }
        double m1 = fp_mul(omega, t1, config.u_g, flags);
        if (!z.empty()) m1 = fp_mul(m1, zhat[q], config.u_g, flags);
        r_cat(s * n_q + q, j) = fp_cast(m1, config.u_g, config.u_s, flags);
      }
    }
  }
  return blocked_matmul(setup.b_cat_action, r_cat, config.engine, config.u_q, flags);
}

}  // namespace mpfem
