// Command-line front end: configure, run, and export kernel experiments.
// Exit codes: 0 success, 2 configuration error, 3 check failure.
// MPFEM_THREADS caps sweep parallelism (0 or unset = one thread per core).
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mpfem/assembly.hpp"
#include "mpfem/bounds.hpp"
#include "mpfem/errorlab.hpp"
#include "mpfem/mesh.hpp"

using nlohmann::json;
using namespace mpfem;

namespace {

void reject_unknown_keys(const json& obj, const std::vector<std::string>& allowed,
                         const std::string& where) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const std::string& key : allowed) known = known || item.key() == key;
    if (!known)
      throw ConfigError(where + ": unknown key '" + item.key() + "'");
  }
}

ReferenceCell cell_from_name(const std::string& name) {
  if (name == "tet") return ReferenceCell{CellKind::simplex, 3};
  if (name == "hex") return ReferenceCell{CellKind::box, 3};
  throw ConfigError("unknown cell: '" + name + "' (expected tet or hex)");
}

// Everything a run can specify. Mesh and degree list fall back to defaults
// sized so the default batch still selects a nonempty cell set.
struct RunConfig {
  KernelConfig kernel;
  ReferenceCell cell{CellKind::simplex, 3};
  std::vector<int> p_list;
  Mesh mesh;
  bool has_mesh = false;
  uint64_t seed = 1;
};

Mesh mesh_from_json(const json& m) {
  if (!m.is_object()) throw ConfigError("config: mesh must be an object");
  if (m.contains("file")) {
    reject_unknown_keys(m, {"file"}, "config.mesh");
    return load_mesh(m.at("file").get<std::string>());
  }
  reject_unknown_keys(m, {"kind", "nx", "ny", "nz", "extent", "jitter", "seed"},
                      "config.mesh");
  const std::string kind = m.at("kind").get<std::string>();
  const int nx = m.at("nx").get<int>();
  const int ny = m.at("ny").get<int>();
  const int nz = m.at("nz").get<int>();
  const double extent = m.value("extent", 1.0);
  const double jitter = m.value("jitter", 0.15);
  const uint64_t seed = m.value("seed", uint64_t(1));
  if (kind == "tet") return structured_tet_mesh(nx, ny, nz, extent, jitter, seed);
  if (kind == "hex") return structured_box_mesh(nx, ny, nz, extent, jitter, seed);
  throw ConfigError("config.mesh: unknown kind '" + kind + "'");
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  if (!root.is_object()) throw ConfigError(path + ": top level must be an object");
  reject_unknown_keys(root,
                      {"schema_version", "form", "mode", "cell", "p", "precisions",
                       "engine", "n_batch", "mesh", "seed"},
                      path);
  try {
    if (root.value("schema_version", 0) != 1)
      throw ConfigError(path + ": schema_version must be 1");
    RunConfig cfg;
    if (root.contains("form"))
      cfg.kernel.form = form_from_name(root.at("form").get<std::string>());
    if (root.contains("mode"))
      cfg.kernel.mode = mode_from_name(root.at("mode").get<std::string>());
    if (root.contains("cell"))
      cfg.cell = cell_from_name(root.at("cell").get<std::string>());
    if (root.contains("precisions")) {
      const json& prec = root.at("precisions");
      reject_unknown_keys(prec, {"u_p", "u_g", "u_q", "u_s"}, "config.precisions");
      if (prec.contains("u_p"))
        cfg.kernel.u_p = format_from_name(prec.at("u_p").get<std::string>());
      if (prec.contains("u_g"))
        cfg.kernel.u_g = format_from_name(prec.at("u_g").get<std::string>());
      if (prec.contains("u_q"))
        cfg.kernel.u_q = format_from_name(prec.at("u_q").get<std::string>());
      if (prec.contains("u_s"))
        cfg.kernel.u_s = format_from_name(prec.at("u_s").get<std::string>());
    }
    if (root.contains("engine"))
      cfg.kernel.engine = engine_from_name(root.at("engine").get<std::string>());
    if (root.contains("n_batch")) cfg.kernel.n_batch = root.at("n_batch").get<int>();
    if (root.contains("seed")) cfg.seed = root.at("seed").get<uint64_t>();
    if (root.contains("p")) {
      const json& p = root.at("p");
      if (p.is_number_integer()) {
        cfg.p_list.push_back(p.get<int>());
      } else if (p.is_array()) {
        for (const json& v : p) cfg.p_list.push_back(v.get<int>());
      } else {
        throw ConfigError(path + ": p must be an integer or an integer array");
      }
    }
    if (root.contains("mesh")) {
      cfg.mesh = mesh_from_json(root.at("mesh"));
      cfg.has_mesh = true;
      cfg.cell = ReferenceCell{cfg.mesh.kind, cfg.mesh.dim};
    }
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// Defaults keep runs at desk scale; a config file overrides them.
void apply_defaults(RunConfig& cfg) {
  if (!cfg.has_mesh) {
    cfg.mesh = cfg.cell.kind == CellKind::simplex ? structured_tet_mesh(2, 2, 2)
                                                  : structured_box_mesh(2, 2, 2);
    cfg.has_mesh = true;
    const int fit = cfg.mesh.n_cells() < cfg.kernel.n_batch ? cfg.mesh.n_cells()
                                                            : cfg.kernel.n_batch;
    cfg.kernel.n_batch = fit < 1 ? 1 : fit;
  }
  if (cfg.p_list.empty()) {
    const int p_max = cfg.cell.kind == CellKind::simplex ? 8 : 6;
    for (int p = 2; p <= p_max; ++p) cfg.p_list.push_back(p);
  }
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) throw ConfigError("empty entry in list: '" + text + "'");
    out.push_back(std::stoi(tok));
  }
  if (out.empty()) throw ConfigError("empty list: '" + text + "'");
  return out;
}

std::pair<double, double> parse_range(const std::string& text) {
  const std::size_t colon = text.find(':');
  if (colon == std::string::npos)
    throw ConfigError("range must look like 1e-1:1e-7, got '" + text + "'");
  return {std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write: " + path);
  out << text;
}

// Re-expresses a report against a different normalizing roundoff.
ErrorReport renormalize(ErrorReport report, double new_u) {
  const double scale = report.normalizing_u / new_u;
  for (ErrorPoint& pt : report.points) pt.err_rel_normalized *= scale;
  report.fit.intercept += std::log10(scale);
  report.normalizing_u = new_u;
  return report;
}

int run_basis(const std::string& cell_name, int p, const std::string& u_p_name,
              const std::string& u_s_name, bool gradients, const std::string& out) {
  const ReferenceCell cell = cell_from_name(cell_name);
  const Fmt u_p = format_from_name(u_p_name);
  const Fmt u_s = format_from_name(u_s_name);
  const LagrangeBasis basis = build_basis(cell, p);
  const QuadratureRule rule = rule_for(cell, p);
  FpFlags flags;
  const Tabulation tab = tabulate(basis, rule, u_p, u_s, gradients, flags);
  const BasisConditioning cond = basis_condition_numbers(basis);

  std::string text;
  char buf[256];
  std::snprintf(buf, sizeof buf, "# cell=%s p=%d n_phi=%d n_q=%d n_d=%d u_p=%s u_s=%s\n",
                cell_name.c_str(), p, tab.n_phi, tab.n_q, tab.n_d,
                format_info(u_p).name, format_info(u_s).name);
  text += buf;
  std::snprintf(buf, sizeof buf, "# lebesgue=%.17g grad_lebesgue=%.17g,%.17g,%.17g\n",
                cond.lebesgue, cond.grad_lebesgue[0], cond.grad_lebesgue[1],
                cond.grad_lebesgue[2]);
  text += buf;
  std::snprintf(buf, sizeof buf, "# flags overflow=%d underflow=%d invalid=%d\n",
                int(flags.overflow), int(flags.underflow), int(flags.invalid));
  text += buf;
  text += "s,k,q,value\n";
  for (int s = 0; s < tab.n_d; ++s)
    for (int k = 0; k < tab.n_phi; ++k)
      for (int q = 0; q < tab.n_q; ++q) {
        std::snprintf(buf, sizeof buf, "%d,%d,%d,%.17g\n", s, k, q, tab.at(s, k, q));
        text += buf;
      }
  write_output(text, out);
  return 0;
}

int run_kernel(const std::string& config_path, const std::string& out) {
  RunConfig cfg = parse_config_file(config_path);
  apply_defaults(cfg);
  ErrorReport report = nq_sweep(cfg.kernel.form, cfg.kernel.mode, cfg.mesh,
                                cfg.p_list, cfg.kernel, cfg.seed);
  report = renormalize(report, format_info(cfg.kernel.u_s).u);
  std::string text = report_to_csv(report);
  double worst = 0.0;
  for (const ErrorPoint& pt : report.points)
    worst = std::max(worst, pt.err_rel_normalized);
  char buf[160];
  std::snprintf(buf, sizeof buf, "# max err_rel_normalized=%.17g (unit %s)\n", worst,
                format_info(cfg.kernel.u_s).name);
  text += buf;
  write_output(text, out);
  return 0;
}

int run_sweep_geometry(const std::string& fmt_name, const std::string& decades,
                       int n_points, const std::string& out, const std::string& svg) {
  const Fmt u_g = format_from_name(fmt_name);
  const auto [eps_hi, eps_lo] = parse_range(decades);
  std::vector<double> eps_list = log_spaced(eps_hi, eps_lo, n_points);
  const ErrorReport report = geometry_sweep(eps_list, u_g);
  write_output(reports_to_csv({report}), out);
  if (!svg.empty()) write_output(reports_to_svg({report}), svg);
  return 0;
}

int run_sweep_nq(const std::string& config_path, const std::string& p_list_text,
                 const std::string& out, const std::string& svg) {
  RunConfig cfg;
  if (!config_path.empty()) {
    cfg = parse_config_file(config_path);
  } else {
    // The headline reduced-accumulation assignment.
    cfg.kernel.u_q = Fmt::fp16;
    cfg.kernel.u_p = cfg.kernel.u_g = cfg.kernel.u_s = Fmt::fp32;
  }
  if (!p_list_text.empty()) cfg.p_list = parse_int_list(p_list_text);
  apply_defaults(cfg);
  const ErrorReport report = nq_sweep(cfg.kernel.form, cfg.kernel.mode, cfg.mesh,
                                      cfg.p_list, cfg.kernel, cfg.seed);
  write_output(reports_to_csv({report}), out);
  if (!svg.empty()) write_output(reports_to_svg({report}), svg);
  return 0;
}

int run_sweep_degree(const std::string& forms_text, const std::string& modes_text,
                     const std::string& cell_name, const std::string& p_list_text,
                     const std::string& config_path, const std::string& out_dir,
                     bool with_svg) {
  RunConfig base;
  if (!config_path.empty()) base = parse_config_file(config_path);
  if (!cell_name.empty()) base.cell = cell_from_name(cell_name);
  if (!p_list_text.empty()) base.p_list = parse_int_list(p_list_text);
  apply_defaults(base);

  std::vector<FormKind> forms;
  std::stringstream fs(forms_text);
  std::string tok;
  while (std::getline(fs, tok, ',')) forms.push_back(form_from_name(tok));
  std::vector<ModeKind> modes;
  std::stringstream ms(modes_text);
  while (std::getline(ms, tok, ',')) modes.push_back(mode_from_name(tok));
  if (forms.empty() || modes.empty())
    throw ConfigError("sweep-degree: need at least one form and one mode");

  for (FormKind form : forms)
    for (ModeKind mode : modes) {
      const std::vector<ErrorReport> reports = precision_comparison(
          form, mode, base.mesh, base.p_list, base.seed, base.kernel.n_batch);
      const std::string stem = out_dir + "/degree_" + form_name(form) + "_" +
                               mode_name(mode);
      write_output(reports_to_csv(reports), stem + ".csv");
      if (with_svg) write_output(reports_to_svg(reports), stem + ".svg");
      std::cout << stem << ".csv\n";
    }
  return 0;
}

int run_assemble(const std::string& config_path, const std::string& continuity_name,
                 const std::string& out) {
  RunConfig cfg = parse_config_file(config_path);
  apply_defaults(cfg);
  const int p = cfg.p_list.front();
  Continuity cont;
  if (continuity_name == "cg") {
    cont = Continuity::continuous;
  } else if (continuity_name == "dg") {
    cont = Continuity::discontinuous;
  } else {
    throw ConfigError("unknown continuity: '" + continuity_name + "'");
  }

  const KernelSetup setup = make_setup(cfg.cell, p, cfg.kernel);
  const DofMap dofmap = build_dofmap(cfg.mesh, setup.basis, cont);
  const int n_cells = cfg.mesh.n_cells();
  FpFlags flags;
  std::string text;
  char buf[160];
  if (cfg.kernel.mode == ModeKind::bilinear) {
    std::vector<Mat> locals(std::size_t(n_cells));
    for (int c = 0; c < n_cells; ++c) {
      const GeometryData gg =
          cell_geometry(cfg.mesh, c, setup.rule, cfg.kernel.form, cfg.kernel.u_g, flags);
      locals[std::size_t(c)] = bilinear_kernel(setup, gg, {}, flags);
    }
    const SparseCoo coo = assemble_matrix(locals, dofmap, cfg.kernel.u_q, flags);
    std::snprintf(buf, sizeof buf, "# dofs=%d nnz=%d max_multiplicity=%d\n",
                  dofmap.n_dofs, coo.nnz(), dofmap.max_multiplicity);
    text = buf + coo_to_text(coo);
  } else {
    Rng rng(cfg.seed);
    std::vector<std::vector<double>> locals(std::size_t(n_cells));
    for (int c = 0; c < n_cells; ++c) {
      Coefficients w(std::size_t(setup.basis.n_phi));
      for (double& wi : w) wi = rng.uniform(0.0, 1.0);
      const GeometryData gg =
          cell_geometry(cfg.mesh, c, setup.rule, cfg.kernel.form, cfg.kernel.u_g, flags);
      const Mat v = action_kernel(setup, {gg}, {w}, {}, flags);
      locals[std::size_t(c)].assign(v.a.begin(), v.a.end());
    }
    const std::vector<double> vec = assemble_vector(locals, dofmap, cfg.kernel.u_q, flags);
    std::snprintf(buf, sizeof buf, "# dofs=%d max_multiplicity=%d\n", dofmap.n_dofs,
                  dofmap.max_multiplicity);
    text = buf + vector_to_text(vec);
  }
  write_output(text, out);
  return 0;
}

int run_check_bounds(const std::string& config_path, int n_cells, double slack,
                     const std::string& out) {
  RunConfig cfg = parse_config_file(config_path);
  apply_defaults(cfg);
  const int p = cfg.p_list.front();
  const int available = cfg.mesh.n_cells();
  if (n_cells > available) n_cells = available;
  Rng rng(cfg.seed);
  std::vector<bool> used(std::size_t(available), false);
  std::vector<int> cells;
  while (int(cells.size()) < n_cells) {
    const int c = rng.uniform_int(available);
    if (used[std::size_t(c)]) continue;
    used[std::size_t(c)] = true;
    cells.push_back(c);
  }
  const BoundCheckTable table =
      bound_check(cfg.mesh, p, {cfg.kernel}, cells, cfg.seed, slack);
  std::string text = bound_table_to_csv(table);
  int failed = 0;
  for (const BoundCheckRow& row : table.rows) failed += !row.pass;
  char buf[120];
  std::snprintf(buf, sizeof buf, "# rows=%zu failed=%d slack=%.17g\n", table.rows.size(),
                failed, table.slack);
  text += buf;
  write_output(text, out);
  return table.all_pass ? 0 : 3;
}

int run_report(const std::string& in_path, const std::string& out) {
  std::ifstream in(in_path);
  if (!in) throw ConfigError("cannot open: " + in_path);
  std::string line;
  if (!std::getline(in, line) || line != csv_header().substr(0, csv_header().size() - 1))
    throw ConfigError(in_path + ": unrecognized CSV header");
  std::vector<ErrorReport> reports;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) fields.push_back(tok);
    if (fields.size() != 12)
      throw ConfigError(in_path + ": expected 12 columns, got line '" + line + "'");
    ErrorPoint pt;
    pt.param = std::stod(fields[0]);
    pt.config = fields[1];
    pt.p = std::stoi(fields[4]);
    pt.n_q = std::stoi(fields[5]);
    pt.kappa2 = std::stod(fields[6]);
    pt.kappa_cell = std::stod(fields[7]);
    pt.err_rel_normalized = std::stod(fields[8]);
    pt.bound_rel = std::stod(fields[9]);
    pt.slope = std::stod(fields[10]);
    pt.seed = std::stoull(fields[11]);
    ErrorReport* dest = nullptr;
    for (ErrorReport& rep : reports)
      if (rep.label == pt.config) dest = &rep;
    if (dest == nullptr) {
      reports.push_back({});
      reports.back().label = pt.config;
      dest = &reports.back();
    }
    dest->fit.slope = pt.slope;
    dest->points.push_back(pt);
  }
  if (reports.empty()) throw ConfigError(in_path + ": no data rows");
  write_output(reports_to_svg(reports), out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "mpfem: finite element kernels under emulated low-precision floating point.\n"
      "MPFEM_THREADS caps parallelism (0 or unset = one thread per core)."};
  app.require_subcommand(1);

  std::string config_path, out, svg, in_path, out_dir = ".";
  std::string cell_name = "tet", u_p_name = "fp64", u_s_name = "fp64";
  std::string fmt_name = "fp32", decades = "1e-1:1e-7";
  std::string forms_text = "mass,poisson", modes_text = "bilinear,action";
  std::string p_list_text, continuity_name = "cg";
  int p = 2, n_points = 13, n_cells = 100;
  double slack = 1.0;
  bool gradients = false, with_svg = false;

  CLI::App* basis = app.add_subcommand("basis", "Dump a tabulation and its condition numbers");
  basis->add_option("--cell", cell_name, "tet or hex");
  basis->add_option("--p", p, "polynomial degree")->check(CLI::PositiveNumber);
  basis->add_option("--u-p", u_p_name, "evaluation format");
  basis->add_option("--u-s", u_s_name, "storage format");
  basis->add_flag("--gradients", gradients, "tabulate gradients instead of values");
  basis->add_option("--out", out, "output path (default stdout)");

  CLI::App* kernel = app.add_subcommand("kernel", "Run one configuration against the binary64 oracle");
  kernel->add_option("--config", config_path, "JSON config file")->required();
  kernel->add_option("--out", out, "output path (default stdout)");

  CLI::App* sweep_geo = app.add_subcommand("sweep-geometry", "Thin-cell geometry error sweep");
  sweep_geo->add_option("--fmt", fmt_name, "geometry format");
  sweep_geo->add_option("--eps-decades", decades, "thickness range hi:lo, e.g. 1e-1:1e-7");
  sweep_geo->add_option("--points", n_points, "sample count")->check(CLI::PositiveNumber);
  sweep_geo->add_option("--out", out, "CSV path (default stdout)");
  sweep_geo->add_option("--svg", svg, "also write an SVG chart here");

  CLI::App* sweep_nq = app.add_subcommand("sweep-nq", "Error growth against quadrature count");
  sweep_nq->add_option("--config", config_path, "JSON config file");
  sweep_nq->add_option("--p-list", p_list_text, "degrees, e.g. 2,3,4");
  sweep_nq->add_option("--out", out, "CSV path (default stdout)");
  sweep_nq->add_option("--svg", svg, "also write an SVG chart here");

  CLI::App* sweep_deg = app.add_subcommand(
      "sweep-degree", "Compare the mixed and half-precision assignments per degree");
  sweep_deg->add_option("--forms", forms_text, "comma list of mass,poisson");
  sweep_deg->add_option("--modes", modes_text, "comma list of bilinear,action");
  sweep_deg->add_option("--cell", cell_name, "tet or hex (when no config mesh)")
      ->default_str("");
  sweep_deg->add_option("--p-list", p_list_text, "degrees, e.g. 2,3,4");
  sweep_deg->add_option("--config", config_path, "JSON config file");
  sweep_deg->add_option("--out-dir", out_dir, "directory for the CSV files");
  sweep_deg->add_flag("--svg", with_svg, "also write SVG charts");

  CLI::App* assemble = app.add_subcommand("assemble", "Assemble the global matrix or vector");
  assemble->add_option("--config", config_path, "JSON config file")->required();
  assemble->add_option("--continuity", continuity_name, "cg or dg");
  assemble->add_option("--out", out, "output path (default stdout)");

  CLI::App* check = app.add_subcommand("check-bounds", "Error bound dominance check");
  check->add_option("--config", config_path, "JSON config file")->required();
  check->add_option("--cells", n_cells, "random cells to test")->check(CLI::PositiveNumber);
  check->add_option("--slack", slack, "bound slack factor");
  check->add_option("--out", out, "CSV path (default stdout)");

  CLI::App* report = app.add_subcommand("report", "Render a sweep CSV as an SVG chart");
  report->add_option("--in", in_path, "sweep CSV file")->required();
  report->add_option("--out", out, "SVG path (default stdout)");

  std::string sweep_deg_cell;
  sweep_deg->get_option("--cell")->results();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (basis->parsed()) return run_basis(cell_name, p, u_p_name, u_s_name, gradients, out);
    if (kernel->parsed()) return run_kernel(config_path, out);
    if (sweep_geo->parsed())
      return run_sweep_geometry(fmt_name, decades, n_points, out, svg);
    if (sweep_nq->parsed()) return run_sweep_nq(config_path, p_list_text, out, svg);
    if (sweep_deg->parsed()) {
      const std::string chosen =
          sweep_deg->get_option("--cell")->count() > 0 ? cell_name : std::string();
      return run_sweep_degree(forms_text, modes_text, chosen, p_list_text, config_path,
                              out_dir, with_svg);
    }
    if (assemble->parsed()) return run_assemble(config_path, continuity_name, out);
    if (check->parsed()) return run_check_bounds(config_path, n_cells, slack, out);
    if (report->parsed()) return run_report(in_path, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const CheckError& e) {
    std::cerr << "check failed: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
