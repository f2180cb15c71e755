#pragma once
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mpfem/cell.hpp"
#include "mpfem/elements.hpp"

namespace mpfem {

// Unstructured conforming mesh of one cell kind. Hex cells list their corners
// in lattice-bit order (x bit 0, y bit 1, z bit 2), matching the degree-1 box
// basis; tets list the base vertex first.
struct Mesh {
  CellKind kind = CellKind::box;
  int dim = 3;
  std::vector<std::array<double, 3>> vertices;
  std::vector<std::vector<int>> cells;

  int n_cells() const { return int(cells.size()); }
  // Coordinates of cell c as a (n_vertices x dim) list.
  std::vector<std::array<double, 3>> cell_vertices(int c) const;
};

// Checks index ranges and strictly positive Jacobian determinants (sampled on
// a degree-2 rule for non-affine cells); throws CheckError on violation.
void validate_mesh(const Mesh& mesh);

// Axis-aligned box [0, extent]^3 split into nx x ny x nz hexes; every vertex
// is then displaced per axis by uniform(-jitter h, jitter h) with h the cell
// edge for that axis.
Mesh structured_box_mesh(int nx, int ny, int nz, double extent = 1.0,
                         double jitter = 0.15, uint64_t seed = 1);

// Same lattice with each hex cut into 6 tets around the main diagonal, so
// neighboring cells agree on face diagonals.
Mesh structured_tet_mesh(int nx, int ny, int nz, double extent = 1.0,
                         double jitter = 0.15, uint64_t seed = 1);

// Single-tet mesh that degenerates as eps -> 0 while keeping det J = eps
// (before scaling). scaled shrinks by 3^(-1/2) and shifts away from the
// origin so coordinates are O(1) and exercise nontrivial significands.
Mesh epsilon_tet(double eps, bool scaled = true);

enum class Continuity : uint8_t { continuous, discontinuous };

struct DofMap {
  int n_dofs = 0;
  int n_local = 0;
  std::vector<int> cell_dofs;  // n_cells x n_local, cell major
  int max_multiplicity = 1;    // largest number of cells sharing one dof

  int dof(int cell, int k) const { return cell_dofs[std::size_t(cell) * n_local + k]; }
};

// Global numbering of basis nodes. Continuous maps geometrically coincident
// nodes (within 1e-9 of the smallest cell diameter) to one dof and fails hard
// on near-coincidences inside the ambiguity band; discontinuous numbers every
// cell independently.
DofMap build_dofmap(const Mesh& mesh, const LagrangeBasis& basis, Continuity cont);

// Number of cells to run in an experiment: caps the work at about 2e6 basis
// function evaluations and rounds down to a whole number of batches. Throws
// ConfigError when nothing survives the rounding.
int select_cells(int n_cells, int n_phi, int n_batch);

// Strict JSON mesh files: {"kind", "dim", "vertices", "cells"}; unknown keys
// are rejected and the loaded mesh is validated.
void save_mesh(const Mesh& mesh, const std::string& path);
Mesh load_mesh(const std::string& path);

}  // namespace mpfem
