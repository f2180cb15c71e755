#pragma once
#include <string>
#include <vector>

#include "mpfem/linalg.hpp"
#include "mpfem/mesh.hpp"
#include "mpfem/softfloat.hpp"

namespace mpfem {

// Global sparse matrix in coordinate form: one entry per occupied position,
// sorted by (row, col), values in the accumulation format.
struct SparseCoo {
  int rows = 0;
  int cols = 0;
  std::vector<int> row;
  std::vector<int> col;
  std::vector<double> value;

  int nnz() const { return int(value.size()); }
  // 0.0 for positions without an entry.
  double at(int r, int c) const;
};

// Scatter-adds the local matrices into the global one, every addition rounded
// at fmt. Cells are visited in ascending order and local entries row major,
// so each global entry accumulates its contributors in a fixed order and the
// result is deterministic.
SparseCoo assemble_matrix(const std::vector<Mat>& local, const DofMap& dofmap,
                          Fmt fmt, FpFlags& flags);

// Same contract for local vectors; the global vector is dense.
std::vector<double> assemble_vector(const std::vector<std::vector<double>>& local,
                                    const DofMap& dofmap, Fmt fmt, FpFlags& flags);

// One "row col value" line per entry, values printed with %.17g.
std::string coo_to_text(const SparseCoo& coo);

// Vectors export as a single-column coordinate list: "row 0 value" lines.
std::string vector_to_text(const std::vector<double>& v);

}  // namespace mpfem
