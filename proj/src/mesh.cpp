#include "mpfem/mesh.hpp"

#include <cmath>
#include <limits>
#include <unordered_map>

#include "mpfem/common.hpp"
#include "mpfem/quadrature.hpp"

namespace mpfem {

std::vector<std::array<double, 3>> Mesh::cell_vertices(int c) const {
  std::vector<std::array<double, 3>> xs;
  xs.reserve(cells[c].size());
  for (int v : cells[c]) xs.push_back(vertices[v]);
  return xs;
}

namespace {

double det3(const double j[3][3]) {
  return j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1]) -
         j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0]) +
         j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
}

// Binary64 geometry Jacobian of one cell at a reference point.
double cell_jacobian_det(const Mesh& mesh, const LagrangeBasis& geom, int c,
                         const double* xref) {
  FpFlags fl;
  double j[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
  const auto& cell = mesh.cells[c];
  for (int k = 0; k < int(cell.size()); ++k) {
    auto g = eval_basis_gradient(geom, k, xref, Fmt::fp64, fl);
    const auto& v = mesh.vertices[cell[k]];
    for (int i = 0; i < mesh.dim; ++i) {
      for (int s = 0; s < mesh.dim; ++s) j[i][s] += v[i] * g[s];
    }
  }
  if (mesh.dim == 3) return det3(j);
  if (mesh.dim == 2) return j[0][0] * j[1][1] - j[0][1] * j[1][0];
  return j[0][0];
}

}  // namespace

void validate_mesh(const Mesh& mesh) {
  if (mesh.dim < 1 || mesh.dim > 3) throw CheckError("mesh dimension out of range");
  int expect = geometry_vertex_count(ReferenceCell{mesh.kind, mesh.dim});
  LagrangeBasis geom = build_basis(ReferenceCell{mesh.kind, mesh.dim}, 1);
  QuadratureRule probe = rule_for(ReferenceCell{mesh.kind, mesh.dim}, 2);
  for (int c = 0; c < mesh.n_cells(); ++c) {
    if (int(mesh.cells[c].size()) != expect) {
      throw CheckError("cell " + std::to_string(c) + " has wrong vertex count");
    }
    for (int v : mesh.cells[c]) {
      if (v < 0 || v >= int(mesh.vertices.size())) {
        throw CheckError("cell " + std::to_string(c) + " references missing vertex");
      }
    }
    if (mesh.kind == CellKind::simplex) {
      double centroid[3] = {0.25, 0.25, 0.25};
      if (cell_jacobian_det(mesh, geom, c, centroid) <= 0.0) {
        throw CheckError("cell " + std::to_string(c) + " is inverted");
      }
    } else {
      for (int q = 0; q < probe.n_points; ++q) {
        if (cell_jacobian_det(mesh, geom, c, probe.point(q)) <= 0.0) {
          throw CheckError("cell " + std::to_string(c) + " is inverted or degenerate");
        }
      }
    }
  }
}

namespace {

Mesh jittered_lattice(int nx, int ny, int nz, double extent, double jitter,
                      uint64_t seed) {
  if (nx < 1 || ny < 1 || nz < 1) throw ConfigError("mesh must have at least one cell per axis");
  if (extent <= 0.0) throw ConfigError("mesh extent must be positive");
  if (jitter < 0.0 || jitter > 0.45) throw ConfigError("jitter fraction must be in [0, 0.45]");
  Mesh mesh;
  mesh.kind = CellKind::box;
  mesh.dim = 3;
  double h[3] = {extent / nx, extent / ny, extent / nz};
  int n[3] = {nx, ny, nz};
  Rng rng(seed);
  mesh.vertices.reserve(std::size_t(nx + 1) * (ny + 1) * (nz + 1));
  for (int k = 0; k <= nz; ++k) {
    for (int j = 0; j <= ny; ++j) {
      for (int i = 0; i <= nx; ++i) {
        std::array<double, 3> v{i * h[0], j * h[1], k * h[2]};
        for (int a = 0; a < 3; ++a) v[a] += rng.uniform(-jitter * h[a], jitter * h[a]);
        mesh.vertices.push_back(v);
      }
    }
  }
  auto vid = [&](int i, int j, int k) {
    return i + (n[0] + 1) * (j + (n[1] + 1) * k);
  };
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        std::vector<int> cell(8);
        for (int b = 0; b < 8; ++b) {
          cell[b] = vid(i + (b & 1), j + ((b >> 1) & 1), k + ((b >> 2) & 1));
        }
        mesh.cells.push_back(std::move(cell));
      }
    }
  }
  return mesh;
}

}  // namespace

Mesh structured_box_mesh(int nx, int ny, int nz, double extent, double jitter,
                         uint64_t seed) {
  Mesh mesh = jittered_lattice(nx, ny, nz, extent, jitter, seed);
  validate_mesh(mesh);
  return mesh;
}

Mesh structured_tet_mesh(int nx, int ny, int nz, double extent, double jitter,
                         uint64_t seed) {
  Mesh lattice = jittered_lattice(nx, ny, nz, extent, jitter, seed);
  Mesh mesh;
  mesh.kind = CellKind::simplex;
  mesh.dim = 3;
  mesh.vertices = lattice.vertices;
  // Kuhn split: one tet per axis permutation, every tet shares the main
  // diagonal (corner 0 to corner 7), so face diagonals agree across cells.
  static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                  {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  mesh.cells.reserve(std::size_t(lattice.cells.size()) * 6);
  for (const auto& hex : lattice.cells) {
    for (const auto& perm : perms) {
      int bits = 0;
      std::vector<int> tet(4);
      tet[0] = hex[0];
      for (int step = 0; step < 3; ++step) {
        bits |= 1 << perm[step];
        tet[step + 1] = hex[bits];
      }
      // Restore positive orientation; an odd permutation flips it.
      const auto& a = mesh.vertices[tet[0]];
      const auto& b = mesh.vertices[tet[1]];
      const auto& c = mesh.vertices[tet[2]];
      const auto& d = mesh.vertices[tet[3]];
      double e[3][3];
      for (int i = 0; i < 3; ++i) {
        e[i][0] = b[i] - a[i];
        e[i][1] = c[i] - a[i];
        e[i][2] = d[i] - a[i];
      }
      if (det3(e) < 0.0) std::swap(tet[2], tet[3]);
      mesh.cells.push_back(std::move(tet));
    }
  }
  validate_mesh(mesh);
  return mesh;
}

Mesh epsilon_tet(double eps, bool scaled) {
  if (eps <= 0.0) throw ConfigError("epsilon must be positive");
  Mesh mesh;
  mesh.kind = CellKind::simplex;
  mesh.dim = 3;
  mesh.vertices = {{0.0, 0.0, 0.0}, {1.0, 1.0, 0.0}, {1.0, 0.0, 1.0}, {eps, 1.0, -1.0}};
  if (scaled) {
    double s = 1.0 / std::sqrt(3.0);
    std::array<double, 3> shift{1.0 / 3.0, 2.0 / 3.0, 4.0 / 3.0};
    for (auto& v : mesh.vertices) {
      for (int a = 0; a < 3; ++a) v[a] = v[a] * s + shift[a];
    }
  }
  mesh.cells = {{0, 1, 2, 3}};
  validate_mesh(mesh);
  return mesh;
}

namespace {

struct GridKey {
  int64_t k[3];
  bool operator==(const GridKey& o) const {
    return k[0] == o.k[0] && k[1] == o.k[1] && k[2] == o.k[2];
  }
};

struct GridKeyHash {
  std::size_t operator()(const GridKey& g) const {
    uint64_t h = 0x9e3779b97f4a7c15ull;
    for (int a = 0; a < 3; ++a) {
      h ^= uint64_t(g.k[a]) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return std::size_t(h);
  }
};

}  // namespace

DofMap build_dofmap(const Mesh& mesh, const LagrangeBasis& basis, Continuity cont) {
  if ((mesh.kind != basis.cell.kind) || (mesh.dim != basis.cell.dim)) {
    throw ConfigError("basis reference cell does not match the mesh");
  }
  DofMap map;
  map.n_local = basis.n_phi;
  map.cell_dofs.resize(std::size_t(mesh.n_cells()) * basis.n_phi);

  if (cont == Continuity::discontinuous) {
    for (std::size_t i = 0; i < map.cell_dofs.size(); ++i) map.cell_dofs[i] = int(i);
    map.n_dofs = int(map.cell_dofs.size());
    map.max_multiplicity = 1;
    return map;
  }

  // Smallest cell diameter sets the coincidence tolerance.
  double h = std::numeric_limits<double>::infinity();
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& cell = mesh.cells[c];
    double diam = 0.0;
    for (std::size_t a = 0; a < cell.size(); ++a) {
      for (std::size_t b = a + 1; b < cell.size(); ++b) {
        const auto& va = mesh.vertices[cell[a]];
        const auto& vb = mesh.vertices[cell[b]];
        double d2 = 0.0;
        for (int i = 0; i < 3; ++i) d2 += (va[i] - vb[i]) * (va[i] - vb[i]);
        diam = std::max(diam, d2);
      }
    }
    h = std::min(h, std::sqrt(diam));
  }
  double tol = 1e-9 * h;
  // Grid pitch covers the whole ambiguity radius, so with floor keys every
  // node within 100 tol of another is found by the 27-neighbor search.
  double pitch = 100.0 * tol;

  LagrangeBasis geom = build_basis(basis.cell, 1);
  FpFlags fl;
  std::unordered_map<GridKey, std::vector<std::pair<std::array<double, 3>, int>>,
                     GridKeyHash>
      grid;
  std::vector<int> multiplicity;

  for (int c = 0; c < mesh.n_cells(); ++c) {
    auto xs = mesh.cell_vertices(c);
    for (int k = 0; k < basis.n_phi; ++k) {
      // Physical position of the basis node through the geometry map.
      std::array<double, 3> x{0.0, 0.0, 0.0};
      for (int g = 0; g < int(xs.size()); ++g) {
        double psi = eval_basis(geom, g, basis.nodes[k].data(), Fmt::fp64, fl);
        for (int i = 0; i < mesh.dim; ++i) x[i] += xs[g][i] * psi;
      }
      GridKey key{};
      for (int a = 0; a < 3; ++a) key.k[a] = int64_t(std::floor(x[a] / pitch));
      int found = -1;
      double best = std::numeric_limits<double>::infinity();
      GridKey probe{};
      for (int dz = -1; dz <= 1; ++dz) {
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            probe.k[0] = key.k[0] + dx;
            probe.k[1] = key.k[1] + dy;
            probe.k[2] = key.k[2] + dz;
            auto it = grid.find(probe);
            if (it == grid.end()) continue;
            for (const auto& [pos, dofid] : it->second) {
              double d2 = 0.0;
              for (int a = 0; a < 3; ++a) d2 += (x[a] - pos[a]) * (x[a] - pos[a]);
              if (d2 < best) {
                best = d2;
                found = dofid;
              }
            }
          }
        }
      }
      double dist = std::sqrt(best);
      int dofid;
      if (found >= 0 && dist <= 0.5 * tol) {
        dofid = found;
      } else if (found >= 0 && dist <= 100.0 * tol) {
        throw CheckError("dof node collision: two basis nodes nearly coincide");
      } else {
        dofid = int(multiplicity.size());
        multiplicity.push_back(0);
        grid[key].push_back({x, dofid});
      }
      map.cell_dofs[std::size_t(c) * basis.n_phi + k] = dofid;
      ++multiplicity[dofid];
    }
  }
  map.n_dofs = int(multiplicity.size());
  for (int m : multiplicity) map.max_multiplicity = std::max(map.max_multiplicity, m);
  return map;
}

int select_cells(int n_cells, int n_phi, int n_batch) {
  if (n_cells < 1 || n_phi < 1 || n_batch < 1) {
    throw ConfigError("cell selection needs positive counts");
  }
  double cap = 2.0e6 / double(n_phi);
  int limited = int(std::min(double(n_cells), cap));
  int selected = (limited / n_batch) * n_batch;
  if (selected == 0) {
    throw ConfigError("cell selection is empty: fewer than one batch of cells fits");
  }
  return selected;
}

}  // namespace mpfem
