#include <fstream>

#include "json.hpp"
#include "mpfem/common.hpp"
#include "mpfem/mesh.hpp"

namespace mpfem {

void save_mesh(const Mesh& mesh, const std::string& path) {
  nlohmann::json j;
  j["kind"] = mesh.kind == CellKind::box ? "box" : "simplex";
  j["dim"] = mesh.dim;
  nlohmann::json vs = nlohmann::json::array();
  for (const auto& v : mesh.vertices) {
    nlohmann::json row = nlohmann::json::array();
    for (int a = 0; a < mesh.dim; ++a) row.push_back(v[a]);
    vs.push_back(std::move(row));
  }
  j["vertices"] = std::move(vs);
  nlohmann::json cs = nlohmann::json::array();
  for (const auto& c : mesh.cells) cs.push_back(c);
  j["cells"] = std::move(cs);
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write mesh file: " + path);
  out << j.dump(1) << "\n";
}

Mesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mesh file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("mesh file is not valid JSON: " + std::string(e.what()));
  }
  if (!j.is_object()) throw ConfigError("mesh file must hold a JSON object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key != "kind" && key != "dim" && key != "vertices" && key != "cells") {
      throw ConfigError("unknown key in mesh file: '" + key + "'");
    }
  }
  for (const char* key : {"kind", "dim", "vertices", "cells"}) {
    if (!j.contains(key)) throw ConfigError(std::string("mesh file misses key '") + key + "'");
  }

  Mesh mesh;
  std::string kind = j["kind"].get<std::string>();
  if (kind == "box") {
    mesh.kind = CellKind::box;
  } else if (kind == "simplex") {
    mesh.kind = CellKind::simplex;
  } else {
    throw ConfigError("mesh kind must be 'box' or 'simplex'");
  }
  mesh.dim = j["dim"].get<int>();
  if (mesh.dim < 1 || mesh.dim > 3) throw ConfigError("mesh dim must be 1, 2 or 3");
  for (const auto& row : j["vertices"]) {
    if (!row.is_array() || int(row.size()) != mesh.dim) {
      throw ConfigError("each vertex needs exactly dim coordinates");
    }
    std::array<double, 3> v{0.0, 0.0, 0.0};
    for (int a = 0; a < mesh.dim; ++a) v[a] = row[a].get<double>();
    mesh.vertices.push_back(v);
  }
  int expect = geometry_vertex_count(ReferenceCell{mesh.kind, mesh.dim});
  for (const auto& row : j["cells"]) {
    if (!row.is_array() || int(row.size()) != expect) {
      throw ConfigError("each cell needs exactly " + std::to_string(expect) + " vertices");
    }
    std::vector<int> cell;
    for (const auto& e : row) cell.push_back(e.get<int>());
    mesh.cells.push_back(std::move(cell));
  }
  validate_mesh(mesh);
  return mesh;
}

}  // namespace mpfem
