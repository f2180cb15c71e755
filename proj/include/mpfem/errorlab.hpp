#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "mpfem/bounds.hpp"
#include "mpfem/kernels.hpp"
#include "mpfem/mesh.hpp"

namespace mpfem {

// One sweep sample: the parameter value, the aggregated error metric, and
// enough context to reproduce the run. bound_rel stays 0 for sweeps that do
// not evaluate the a-priori bound. flags carries what the reduced-precision
// run raised at this point; a failed point (e.g. singular geometry after
// underflow) reports an infinite error.
struct ErrorPoint {
  double param = 0.0;
  std::string config;
  FormKind form = FormKind::mass;
  ModeKind mode = ModeKind::bilinear;
  int p = 0;
  int n_q = 0;
  double kappa2 = 0.0;
  double kappa_cell = 0.0;
  double err_rel_normalized = 0.0;
  double bound_rel = 0.0;
  double slope = 0.0;
  uint64_t seed = 0;
  FpFlags flags;
};

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // rms residual in log10 units
};

// Ordinary least squares on (log10 x, log10 y) pairs. Throws ConfigError on
// fewer than two points or nonpositive values.
FitResult fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

// A sweep's samples plus the fit of err_rel_normalized against param over the
// finite points. normalizing_u is the roundoff every error was divided by.
struct ErrorReport {
  std::string label;
  double normalizing_u = 1.0;
  FitResult fit;
  std::vector<ErrorPoint> points;
};

// max over points / value at the first point.
double constancy_ratio(const ErrorReport& report);

// Compact CSV-safe descriptor: up_ug_uq_us_engine.
std::string config_label(const KernelConfig& config);

// Exact schema: param,config,form,mode,p,n_q,kappa2J,kappaK,
// err_rel_normalized,bound_rel,slope_window,seed. Values print with %.17g, so
// a rerun with the same seed is byte identical.
std::string csv_header();
std::string report_to_csv(const ErrorReport& report);
std::string reports_to_csv(const std::vector<ErrorReport>& reports);

// Minimal log-log SVG line chart: err_rel_normalized against param, one
// polyline per report.
std::string reports_to_svg(const std::vector<ErrorReport>& reports);

// n log-spaced values from lo to hi inclusive.
std::vector<double> log_spaced(double lo, double hi, int n);

// Thickness whose thin-tet binary64 Jacobian condition number hits the target
// within 0.1%, by bisection over [1e-9, 2].
double epsilon_for_kappa2(double kappa2_target);

// Thin-tet geometry degradation: relative error of the geometry tensor
// computed at u_g against binary64, normalized by the u_g roundoff, fitted
// against the Jacobian condition number.
ErrorReport geometry_sweep(const std::vector<double>& eps_list, Fmt u_g);

// Quadrature-count growth at fixed precisions: per degree, the max-over-cells
// local error against the all-binary64 reference run of the same algorithm,
// normalized by the accumulation roundoff and fitted against the quadrature
// count. The coefficient z is one; actions draw one uniform [0, 1) w per
// cell from the seed.
ErrorReport nq_sweep(FormKind form, ModeKind mode, const Mesh& mesh,
                     const std::vector<int>& p_list, const KernelConfig& base,
                     uint64_t seed);

// The two accelerator-style precision assignments compared degree by degree.
KernelConfig mixed_storage_config(FormKind form, ModeKind mode);
KernelConfig half_compute_config(FormKind form, ModeKind mode);

// Runs both configurations over the degree list, each report normalized by
// its own storage roundoff. n_batch overrides the configurations' batch size
// so small meshes keep a nonempty cell selection.
std::vector<ErrorReport> precision_comparison(FormKind form, ModeKind mode,
                                              const Mesh& mesh,
                                              const std::vector<int>& p_list,
                                              uint64_t seed, int n_batch = 64);

// One dominance sample: raw relative error against the a-priori bound.
struct BoundCheckRow {
  std::string config;
  FormKind form = FormKind::mass;
  ModeKind mode = ModeKind::bilinear;
  int cell = 0;
  int p = 0;
  int n_q = 0;
  double kappa2 = 0.0;
  double kappa_cell = 0.0;
  double observed = 0.0;
  double bound = 0.0;
  uint64_t seed = 0;
  bool pass = false;
};

struct BoundCheckTable {
  double slack = 1.0;
  bool all_pass = true;
  std::vector<BoundCheckRow> rows;
};

// Dominance check: every listed cell, both forms and both modes per listed
// precision assignment (the form and mode fields of the configs are
// overridden). observed and bound are raw relative errors; a row passes when
// observed <= slack * bound.
BoundCheckTable bound_check(const Mesh& mesh, int p,
                            const std::vector<KernelConfig>& configs,
                            const std::vector<int>& cells, uint64_t seed,
                            double slack = 1.0);

// Same 12-column schema as the sweep CSV: param holds the cell index,
// err_rel_normalized the raw observed error, bound_rel the raw bound.
std::string bound_table_to_csv(const BoundCheckTable& table);

}  // namespace mpfem
