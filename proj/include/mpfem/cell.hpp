#pragma once
#include <cstdint>

namespace mpfem {

enum class CellKind : uint8_t { simplex, box };

// Reference cells: unit box [0,1]^d or unit simplex {x >= 0, sum x <= 1}.
struct ReferenceCell {
  CellKind kind = CellKind::box;
  int dim = 3;
  bool operator==(const ReferenceCell&) const = default;
};

inline double reference_volume(const ReferenceCell& c) {
  if (c.kind == CellKind::box) return 1.0;
  double v = 1.0;
  for (int i = 2; i <= c.dim; ++i) v /= double(i);
  return v;
}

// Vertex count of the degree-1 geometry description.
inline int geometry_vertex_count(const ReferenceCell& c) {
  return c.kind == CellKind::box ? (1 << c.dim) : c.dim + 1;
}

}  // namespace mpfem
