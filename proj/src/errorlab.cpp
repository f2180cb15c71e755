#include "mpfem/errorlab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "mpfem/common.hpp"
#include "mpfem/geometry.hpp"
#include "mpfem/linalg.hpp"
#include "mpfem/quadrature.hpp"

namespace mpfem {

FitResult fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ConfigError("fit_loglog: size mismatch");
  const int n = int(x.size());
  if (n < 2) throw ConfigError("fit_loglog: need at least two points");
  std::vector<double> lx(n), ly(n);
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]) || x[i] <= 0.0 || y[i] <= 0.0)
      throw ConfigError("fit_loglog: values must be positive and finite");
    lx[i] = std::log10(x[i]);
    ly[i] = std::log10(y[i]);
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double det = n * sxx - sx * sx;
  if (det <= 0.0) throw ConfigError("fit_loglog: abscissae do not span a range");
  FitResult fit;
  fit.slope = (n * sxy - sx * sy) / det;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = ly[i] - fit.slope * lx[i] - fit.intercept;
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

double constancy_ratio(const ErrorReport& report) {
  if (report.points.empty()) throw ConfigError("constancy_ratio: empty report");
  const double first = report.points.front().err_rel_normalized;
  if (!(first > 0.0)) throw ConfigError("constancy_ratio: first point not positive");
  double peak = 0.0;
  for (const ErrorPoint& pt : report.points)
    peak = std::max(peak, pt.err_rel_normalized);
  return peak / first;
}

std::string config_label(const KernelConfig& config) {
  std::string s;
  s += format_info(config.u_p).name;
  s += '_';
  s += format_info(config.u_g).name;
  s += '_';
  s += format_info(config.u_q).name;
  s += '_';
  s += format_info(config.u_s).name;
  s += '_';
  s += engine_name(config.engine);
  return s;
}

std::string csv_header() {
  return "param,config,form,mode,p,n_q,kappa2J,kappaK,err_rel_normalized,"
         "bound_rel,slope_window,seed\n";
}

namespace {

void append_csv_row(std::string& out, const ErrorPoint& pt) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.17g,%s,%s,%s,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%llu\n",
                pt.param, pt.config.c_str(), form_name(pt.form), mode_name(pt.mode), pt.p,
                pt.n_q, pt.kappa2, pt.kappa_cell, pt.err_rel_normalized, pt.bound_rel,
                pt.slope, static_cast<unsigned long long>(pt.seed));
  out += buf;
}

// Worst entrywise discrepancy of a against the binary64 reference, relative
// to the reference magnitude. A NaN discrepancy counts as unbounded error;
// a plain max would silently skip it.
double rel_err_entrywise(const Mat& a, const Mat& ref) {
  double diff = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < ref.a.size(); ++i) {
    const double d = std::fabs(a.a[i] - ref.a[i]);
    if (std::isnan(d)) return std::numeric_limits<double>::infinity();
    diff = std::max(diff, d);
    norm = std::max(norm, std::fabs(ref.a[i]));
  }
  return diff / (norm > 0.0 ? norm : 1.0);
}

}  // namespace

std::string report_to_csv(const ErrorReport& report) {
  std::string out = csv_header();
  for (const ErrorPoint& pt : report.points) append_csv_row(out, pt);
  return out;
}

std::string reports_to_csv(const std::vector<ErrorReport>& reports) {
  std::string out = csv_header();
  for (const ErrorReport& rep : reports)
    for (const ErrorPoint& pt : rep.points) append_csv_row(out, pt);
  return out;
}

std::string bound_table_to_csv(const BoundCheckTable& table) {
  std::string out = csv_header();
  for (const BoundCheckRow& row : table.rows) {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%d,%s,%s,%s,%d,%d,%.17g,%.17g,%.17g,%.17g,0,%llu\n",
                  row.cell, row.config.c_str(), form_name(row.form), mode_name(row.mode),
                  row.p, row.n_q, row.kappa2, row.kappa_cell, row.observed, row.bound,
                  static_cast<unsigned long long>(row.seed));
    out += buf;
  }
  return out;
}

namespace {

constexpr const char* kSeriesColors[6] = {"#1b6ca8", "#c23b22", "#2e8b57",
                                          "#8860b2", "#c08a00", "#555555"};

double svg_x(double lx, double lo, double hi) {
  if (hi <= lo) return 320.0;
  return 70.0 + (lx - lo) / (hi - lo) * 540.0;
}

double svg_y(double ly, double lo, double hi) {
  if (hi <= lo) return 240.0;
  return 430.0 - (ly - lo) / (hi - lo) * 390.0;
}

}  // namespace

std::string reports_to_svg(const std::vector<ErrorReport>& reports) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const ErrorReport& rep : reports)
    for (const ErrorPoint& pt : rep.points) {
      if (!(pt.param > 0.0) || !std::isfinite(pt.err_rel_normalized) ||
          !(pt.err_rel_normalized > 0.0))
        continue;
      xlo = std::min(xlo, std::log10(pt.param));
      xhi = std::max(xhi, std::log10(pt.param));
      ylo = std::min(ylo, std::log10(pt.err_rel_normalized));
      yhi = std::max(yhi, std::log10(pt.err_rel_normalized));
    }
  const bool have_data = std::isfinite(xlo) && std::isfinite(ylo);
  if (!have_data) {
    xlo = 0.0;
    xhi = 1.0;
    ylo = 0.0;
    yhi = 1.0;
  }
  if (xhi - xlo < 1e-12) xhi = xlo + 1.0;
  if (yhi - ylo < 1e-12) yhi = ylo + 1.0;

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
         "viewBox=\"0 0 640 480\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"white\"/>\n";
  out += "<rect x=\"70\" y=\"40\" width=\"540\" height=\"390\" fill=\"none\" "
         "stroke=\"#333\"/>\n";
  char buf[256];
  for (int d = int(std::ceil(xlo)); d <= int(std::floor(xhi)); ++d) {
    const double px = svg_x(double(d), xlo, xhi);
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.1f\" y1=\"430\" x2=\"%.1f\" y2=\"436\" stroke=\"#333\"/>"
                  "<text x=\"%.1f\" y=\"450\" font-size=\"11\" text-anchor=\"middle\" "
                  "fill=\"#333\">1e%d</text>\n",
                  px, px, px, d);
    out += buf;
  }
  for (int d = int(std::ceil(ylo)); d <= int(std::floor(yhi)); ++d) {
    const double py = svg_y(double(d), ylo, yhi);
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"64\" y1=\"%.1f\" x2=\"70\" y2=\"%.1f\" stroke=\"#333\"/>"
                  "<text x=\"60\" y=\"%.1f\" font-size=\"11\" text-anchor=\"end\" "
                  "fill=\"#333\">1e%d</text>\n",
                  py, py, py + 4.0, d);
    out += buf;
  }
  int series = 0;
  for (const ErrorReport& rep : reports) {
    const char* color = kSeriesColors[series % 6];
    std::string pts;
    for (const ErrorPoint& pt : rep.points) {
      if (!(pt.param > 0.0) || !std::isfinite(pt.err_rel_normalized) ||
          !(pt.err_rel_normalized > 0.0))
        continue;
      std::snprintf(buf, sizeof buf, "%.1f,%.1f ",
                    svg_x(std::log10(pt.param), xlo, xhi),
                    svg_y(std::log10(pt.err_rel_normalized), ylo, yhi));
      pts += buf;
    }
    out += "<polyline fill=\"none\" stroke=\"";
    out += color;
    out += "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    std::snprintf(buf, sizeof buf,
                  "<text x=\"80\" y=\"%d\" font-size=\"12\" fill=\"%s\">%s "
                  "(slope %.3g)</text>\n",
                  58 + 16 * series, color, rep.label.c_str(), rep.fit.slope);
    out += buf;
    ++series;
  }
  out += "</svg>\n";
  return out;
}

std::vector<double> log_spaced(double lo, double hi, int n) {
  if (n < 1 || !(lo > 0.0) || !(hi > 0.0)) throw ConfigError("log_spaced: bad range");
  std::vector<double> out(static_cast<std::size_t>(n));
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (int i = 0; i < n; ++i)
    out[std::size_t(i)] = lo * std::pow(hi / lo, double(i) / double(n - 1));
  return out;
}

namespace {

double thin_tet_kappa2(double eps) {
  const Mesh mesh = epsilon_tet(eps);
  const ReferenceCell cell{CellKind::simplex, 3};
  const QuadratureRule rule = rule_for(cell, 1);
  FpFlags flags;
  const GeometryData geom = cell_geometry(mesh, 0, rule, FormKind::mass, Fmt::fp64, flags);
  return geom.at(0).kappa2;
}

}  // namespace

double epsilon_for_kappa2(double kappa2_target) {
  if (!(kappa2_target > 1.0) || !std::isfinite(kappa2_target))
    throw ConfigError("epsilon_for_kappa2: target must exceed one");
  // kappa2 decreases as the tet thickens, so bisect on log eps.
  double lo = 1e-9, hi = 2.0;
  if (thin_tet_kappa2(hi) > kappa2_target)
    throw ConfigError("epsilon_for_kappa2: target below the thick-tet conditioning");
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    const double k = thin_tet_kappa2(mid);
    if (std::abs(k - kappa2_target) <= 1e-3 * kappa2_target) return mid;
    if (k > kappa2_target)
      lo = mid;
    else
      hi = mid;
  }
  throw CheckError("epsilon_for_kappa2: bisection failed to converge");
}

ErrorReport geometry_sweep(const std::vector<double>& eps_list, Fmt u_g) {
  if (eps_list.empty()) throw ConfigError("geometry_sweep: empty parameter list");
  ErrorReport rep;
  rep.label = std::string("geometry_") + format_info(u_g).name;
  rep.normalizing_u = format_info(u_g).u;
  const ReferenceCell cell{CellKind::simplex, 3};
  const QuadratureRule rule = rule_for(cell, 1);
  rep.points.resize(eps_list.size());
  parallel_for(int(eps_list.size()), [&](int i) {
    const double eps = eps_list[std::size_t(i)];
    const Mesh mesh = epsilon_tet(eps);
    FpFlags f64;
    const GeometryData g64 =
        cell_geometry(mesh, 0, rule, FormKind::poisson, Fmt::fp64, f64);
    ErrorPoint pt;
    pt.param = eps;
    pt.config = rep.label;
    pt.form = FormKind::poisson;
    pt.p = 1;
    pt.n_q = rule.n_points;
    pt.kappa2 = g64.at(0).kappa2;
    pt.kappa_cell = g64.at(0).kappa_cell;
    try {
      FpFlags fg;
      const GeometryData gg = cell_geometry(mesh, 0, rule, FormKind::poisson, u_g, fg);
      pt.flags = fg;
      pt.err_rel_normalized =
          rel_err_entrywise(gg.at(0).tensor, g64.at(0).tensor) / rep.normalizing_u;
    } catch (const CheckError&) {
      // The factorization collapsed (zero pivot after underflow); the point
      // stays in the table with an infinite error and is excluded from the fit.
      pt.flags.underflow = true;
      pt.err_rel_normalized = std::numeric_limits<double>::infinity();
    }
    rep.points[std::size_t(i)] = pt;
  });
  std::vector<double> xs, ys;
  for (const ErrorPoint& pt : rep.points)
    if (std::isfinite(pt.err_rel_normalized) && pt.err_rel_normalized > 0.0) {
      xs.push_back(pt.kappa2);
      ys.push_back(pt.err_rel_normalized);
    }
  if (xs.size() >= 2) rep.fit = fit_loglog(xs, ys);
  for (ErrorPoint& pt : rep.points) pt.slope = rep.fit.slope;
  return rep;
}

namespace {

// Shared degree sweep: per degree, max-over-cells local error of the
// configured run against the all-binary64 reference run, divided by
// normalizing_u. z is constantly one; actions draw one w per cell from the
// running rng in cell order.
ErrorReport sweep_degrees(FormKind form, ModeKind mode, const Mesh& mesh,
                          const std::vector<int>& p_list, KernelConfig config,
                          uint64_t seed, double normalizing_u) {
  if (p_list.empty()) throw ConfigError("degree sweep: empty degree list");
  config.form = form;
  config.mode = mode;
  validate_config(config);
  ErrorReport rep;
  rep.label = std::string(form_name(form)) + "_" + mode_name(mode) + "_" +
              config_label(config);
  rep.normalizing_u = normalizing_u;
  const ReferenceCell cell{mesh.kind, mesh.dim};
  Rng rng(seed);
  for (int p : p_list) {
    if (p < 1) throw ConfigError("degree sweep: degree must be positive");
    const KernelSetup setup = make_setup(cell, p, config);
    KernelConfig ref_config = reference_config(form, mode);
    ref_config.n_batch = config.n_batch;
    const KernelSetup ref_setup = make_setup(cell, p, ref_config);
    const int n_phi = setup.basis.n_phi;
    const int n_run = select_cells(mesh.n_cells(), n_phi, config.n_batch);

    std::vector<Coefficients> ws;
    if (mode == ModeKind::action) {
      ws.resize(std::size_t(n_run));
      for (int c = 0; c < n_run; ++c) {
        ws[std::size_t(c)].resize(std::size_t(n_phi));
        // Same-signed coefficients: a zero-mean draw would let the
        // accumulation roundoff cancel stochastically and hide the growth
        // this sweep measures.
        for (double& wi : ws[std::size_t(c)]) wi = rng.uniform(0.0, 1.0);
      }
    }

    std::vector<double> errs(std::size_t(n_run), 0.0);
    std::vector<double> k2s(std::size_t(n_run), 0.0), kks(std::size_t(n_run), 0.0);
    std::vector<FpFlags> fls(static_cast<std::size_t>(n_run));
    if (mode == ModeKind::bilinear) {
      parallel_for(n_run, [&](int c) {
        FpFlags fc, f64;
        const GeometryData gg =
            cell_geometry(mesh, c, setup.rule, form, config.u_g, fc);
        const GeometryData g64 =
            cell_geometry(mesh, c, setup.rule, form, Fmt::fp64, f64);
        const Mat a = bilinear_kernel(setup, gg, {}, fc);
        FpFlags fr;
        const Mat a64 = bilinear_kernel(ref_setup, g64, {}, fr);
        errs[std::size_t(c)] = rel_err_entrywise(a, a64);
        fls[std::size_t(c)] = fc;
        for (const GeometryPoint& gp : g64.points) {
          k2s[std::size_t(c)] = std::max(k2s[std::size_t(c)], gp.kappa2);
          kks[std::size_t(c)] = std::max(kks[std::size_t(c)], gp.kappa_cell);
        }
      });
    } else {
      for (int start = 0; start < n_run; start += config.n_batch) {
        const int count = std::min(config.n_batch, n_run - start);
        std::vector<GeometryData> ggs(static_cast<std::size_t>(count));
        std::vector<GeometryData> g64s(static_cast<std::size_t>(count));
        std::vector<Coefficients> wb(static_cast<std::size_t>(count));
        FpFlags fbatch;
        for (int j = 0; j < count; ++j) {
          FpFlags f64;
          ggs[std::size_t(j)] =
              cell_geometry(mesh, start + j, setup.rule, form, config.u_g, fbatch);
          g64s[std::size_t(j)] =
              cell_geometry(mesh, start + j, setup.rule, form, Fmt::fp64, f64);
          wb[std::size_t(j)] = ws[std::size_t(start + j)];
        }
        const Mat v = action_kernel(setup, ggs, wb, {}, fbatch);
        FpFlags fr;
        const Mat v64 = action_kernel(ref_setup, g64s, wb, {}, fr);
        for (int j = 0; j < count; ++j) {
          double diff = 0.0, norm = 0.0;
          bool unbounded = false;
          for (int k = 0; k < n_phi; ++k) {
            const double d = std::abs(v(k, j) - v64(k, j));
            if (std::isnan(d)) {
              unbounded = true;
              break;
            }
            diff = std::max(diff, d);
            norm = std::max(norm, std::abs(v64(k, j)));
          }
          errs[std::size_t(start + j)] =
              unbounded ? std::numeric_limits<double>::infinity()
                        : diff / (norm > 0.0 ? norm : 1.0);
          fls[std::size_t(start + j)] = fbatch;
          for (const GeometryPoint& gp : g64s[std::size_t(j)].points) {
            k2s[std::size_t(start + j)] =
                std::max(k2s[std::size_t(start + j)], gp.kappa2);
            kks[std::size_t(start + j)] =
                std::max(kks[std::size_t(start + j)], gp.kappa_cell);
          }
        }
      }
    }

    ErrorPoint pt;
    pt.param = double(setup.rule.n_points);
    pt.config = config_label(config);
    pt.form = form;
    pt.mode = mode;
    pt.p = p;
    pt.n_q = setup.rule.n_points;
    pt.seed = seed;
    pt.flags = setup.setup_flags;
    for (int c = 0; c < n_run; ++c) {
      pt.err_rel_normalized = std::max(pt.err_rel_normalized, errs[std::size_t(c)]);
      pt.kappa2 = std::max(pt.kappa2, k2s[std::size_t(c)]);
      pt.kappa_cell = std::max(pt.kappa_cell, kks[std::size_t(c)]);
      pt.flags.merge(fls[std::size_t(c)]);
    }
    pt.err_rel_normalized /= normalizing_u;
    rep.points.push_back(pt);
  }
  std::vector<double> xs, ys;
  for (const ErrorPoint& pt : rep.points)
    if (std::isfinite(pt.err_rel_normalized) && pt.err_rel_normalized > 0.0) {
      xs.push_back(pt.param);
      ys.push_back(pt.err_rel_normalized);
    }
  if (xs.size() >= 2) rep.fit = fit_loglog(xs, ys);
  for (ErrorPoint& pt : rep.points) pt.slope = rep.fit.slope;
  return rep;
}

}  // namespace

ErrorReport nq_sweep(FormKind form, ModeKind mode, const Mesh& mesh,
                     const std::vector<int>& p_list, const KernelConfig& base,
                     uint64_t seed) {
  return sweep_degrees(form, mode, mesh, p_list, base, seed,
                       format_info(base.u_q).u);
}

KernelConfig mixed_storage_config(FormKind form, ModeKind mode) {
  KernelConfig config;
  config.form = form;
  config.mode = mode;
  config.u_p = config.u_g = config.u_q = Fmt::fp32;
  config.u_s = Fmt::bf16;
  config.engine = EngineKind::matrix;
  return config;
}

KernelConfig half_compute_config(FormKind form, ModeKind mode) {
  KernelConfig config;
  config.form = form;
  config.mode = mode;
  config.u_p = config.u_q = config.u_s = Fmt::fp16;
  config.u_g = Fmt::fp32;
  config.engine = EngineKind::scalar;
  return config;
}

std::vector<ErrorReport> precision_comparison(FormKind form, ModeKind mode,
                                              const Mesh& mesh,
                                              const std::vector<int>& p_list,
                                              uint64_t seed, int n_batch) {
  std::vector<ErrorReport> out;
  for (KernelConfig config :
       {mixed_storage_config(form, mode), half_compute_config(form, mode)}) {
    config.n_batch = n_batch;
    out.push_back(sweep_degrees(form, mode, mesh, p_list, config, seed,
                                format_info(config.u_s).u));
  }
  return out;
}

BoundCheckTable bound_check(const Mesh& mesh, int p,
                            const std::vector<KernelConfig>& configs,
                            const std::vector<int>& cells, uint64_t seed,
                            double slack) {
  if (configs.empty()) throw ConfigError("bound_check: no configurations");
  if (cells.empty()) throw ConfigError("bound_check: no cells");
  if (!(slack > 0.0)) throw ConfigError("bound_check: slack must be positive");
  for (int c : cells)
    if (c < 0 || c >= mesh.n_cells()) throw ConfigError("bound_check: cell out of range");

  const ReferenceCell cell{mesh.kind, mesh.dim};
  const LagrangeBasis basis = build_basis(cell, p);
  const BasisConditioning cond = basis_condition_numbers(basis);
  const int n_phi = basis.n_phi;

  // One z and one w per listed cell, drawn up front in listing order and
  // shared by every configuration so the comparisons see identical data.
  Rng rng(seed);
  std::vector<Coefficients> zs(cells.size()), ws(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    zs[i].resize(std::size_t(n_phi));
    ws[i].resize(std::size_t(n_phi));
    for (double& zi : zs[i]) zi = rng.uniform(0.5, 1.5);
    for (double& wi : ws[i]) wi = rng.uniform(-1.0, 1.0);
  }

  BoundCheckTable table;
  table.slack = slack;
  for (const KernelConfig& base : configs) {
    for (FormKind form : {FormKind::mass, FormKind::poisson}) {
      KernelConfig cfg = base;
      cfg.form = form;
      cfg.mode = ModeKind::bilinear;
      const KernelSetup setup_b = make_setup(cell, p, cfg);
      cfg.mode = ModeKind::action;
      const KernelSetup setup_a = make_setup(cell, p, cfg);
      std::vector<BoundCheckRow> rows(2 * cells.size());
      parallel_for(int(cells.size()), [&](int i) {
        const int c = cells[std::size_t(i)];
        FpFlags f64, fg;
        const GeometryData g64 =
            cell_geometry(mesh, c, setup_b.rule, form, Fmt::fp64, f64);
        const GeometryData gg =
            cell_geometry(mesh, c, setup_b.rule, form, cfg.u_g, fg);
        const BoundReport report =
            kernel_bounds(setup_b, cond, g64, zs[std::size_t(i)], ws[std::size_t(i)]);

        BoundCheckRow row;
        row.config = config_label(base);
        row.form = form;
        row.cell = c;
        row.p = p;
        row.n_q = setup_b.rule.n_points;
        row.seed = seed;
        for (const GeometryPoint& gp : g64.points) {
          row.kappa2 = std::max(row.kappa2, gp.kappa2);
          row.kappa_cell = std::max(row.kappa_cell, gp.kappa_cell);
        }

        FpFlags fk;
        const Mat a_hat = bilinear_kernel(setup_b, gg, zs[std::size_t(i)], fk);
        row.mode = ModeKind::bilinear;
        row.observed = rel_err_entrywise(a_hat, report.a);
        row.bound = report.bound_a;
        row.pass = report.a_applicable && row.observed <= slack * row.bound;
        rows[2 * std::size_t(i)] = row;

        const Mat v_hat = action_kernel(setup_a, {gg}, {ws[std::size_t(i)]},
                                        zs[std::size_t(i)], fk);
        double diff = 0.0;
        bool unbounded = false;
        for (int k = 0; k < n_phi; ++k) {
          const double d = std::abs(v_hat(k, 0) - report.v[std::size_t(k)]);
          if (std::isnan(d)) {
            unbounded = true;
            break;
          }
          diff = std::max(diff, d);
        }
        row.mode = ModeKind::action;
        row.observed = unbounded ? std::numeric_limits<double>::infinity()
                                 : diff / max_abs(report.v);
        row.bound = report.bound_v;
        row.pass = report.v_applicable && row.observed <= slack * row.bound;
        rows[2 * std::size_t(i) + 1] = row;
      });
      for (BoundCheckRow& row : rows) {
        table.all_pass = table.all_pass && row.pass;
        table.rows.push_back(std::move(row));
      }
    }
  }
  return table;
}

}  // namespace mpfem
