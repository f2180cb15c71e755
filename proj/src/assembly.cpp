#include "mpfem/assembly.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <unordered_map>

#include "mpfem/common.hpp"

namespace mpfem {

double SparseCoo::at(int r, int c) const {
  auto begin = row.begin();
  auto lo = std::lower_bound(begin, row.end(), r);
  for (auto it = lo; it != row.end() && *it == r; ++it) {
    std::size_t i = std::size_t(it - begin);
    if (col[i] == c) return value[i];
  }
  return 0.0;
}

namespace {

int cell_count(const DofMap& dofmap) {
  if (dofmap.n_local <= 0 || dofmap.cell_dofs.size() % dofmap.n_local != 0) {
    throw ConfigError("dof map has no complete cells");
  }
  return int(dofmap.cell_dofs.size() / dofmap.n_local);
}

int checked_dof(const DofMap& dofmap, int cell, int k) {
  int dof = dofmap.dof(cell, k);
  if (dof < 0 || dof >= dofmap.n_dofs) {
    throw CheckError("dof index out of range");
  }
  return dof;
}

}  // namespace

SparseCoo assemble_matrix(const std::vector<Mat>& local, const DofMap& dofmap,
                          Fmt fmt, FpFlags& flags) {
  int n_cells = cell_count(dofmap);
  if (int(local.size()) != n_cells) {
    throw ConfigError("one local matrix per cell required");
  }
  int n_local = dofmap.n_local;
  std::unordered_map<std::uint64_t, double> acc;
  acc.reserve(std::size_t(n_cells) * n_local);
  for (int c = 0; c < n_cells; ++c) {
    const Mat& a = local[c];
    if (a.rows != n_local || a.cols != n_local) {
      throw ConfigError("local matrix does not match the dof map");
    }
    for (int i = 0; i < n_local; ++i) {
      int gi = checked_dof(dofmap, c, i);
      for (int j = 0; j < n_local; ++j) {
        int gj = checked_dof(dofmap, c, j);
        std::uint64_t key = std::uint64_t(gi) * dofmap.n_dofs + gj;
        double contrib = fp_cast(a(i, j), Fmt::fp64, fmt, flags);
        auto it = acc.find(key);
        if (it == acc.end()) {
          acc.emplace(key, contrib);
        } else {
          it->second = fp_add(it->second, contrib, fmt, flags);
        }
      }
    }
  }

  std::vector<std::uint64_t> keys;
  keys.reserve(acc.size());
  for (const auto& kv : acc) keys.push_back(kv.first);
  std::sort(keys.begin(), keys.end());

  SparseCoo coo;
  coo.rows = dofmap.n_dofs;
  coo.cols = dofmap.n_dofs;
  coo.row.reserve(keys.size());
  coo.col.reserve(keys.size());
  coo.value.reserve(keys.size());
  for (std::uint64_t key : keys) {
    coo.row.push_back(int(key / dofmap.n_dofs));
    coo.col.push_back(int(key % dofmap.n_dofs));
    coo.value.push_back(acc[key]);
  }
  return coo;
}

std::vector<double> assemble_vector(const std::vector<std::vector<double>>& local,
                                    const DofMap& dofmap, Fmt fmt, FpFlags& flags) {
  int n_cells = cell_count(dofmap);
  if (int(local.size()) != n_cells) {
    throw ConfigError("one local vector per cell required");
  }
  int n_local = dofmap.n_local;
  std::vector<double> global(std::size_t(dofmap.n_dofs), 0.0);
  std::vector<bool> touched(std::size_t(dofmap.n_dofs), false);
  for (int c = 0; c < n_cells; ++c) {
    const std::vector<double>& v = local[c];
    if (int(v.size()) != n_local) {
      throw ConfigError("local vector does not match the dof map");
    }
    for (int k = 0; k < n_local; ++k) {
      int g = checked_dof(dofmap, c, k);
      double contrib = fp_cast(v[k], Fmt::fp64, fmt, flags);
      if (!touched[g]) {
        global[g] = contrib;
        touched[g] = true;
      } else {
        global[g] = fp_add(global[g], contrib, fmt, flags);
      }
    }
  }
  return global;
}

std::string coo_to_text(const SparseCoo& coo) {
  std::string out;
  char line[96];
  for (int i = 0; i < coo.nnz(); ++i) {
    std::snprintf(line, sizeof line, "%d %d %.17g\n", coo.row[i], coo.col[i],
                  coo.value[i]);
    out += line;
  }
  return out;
}

std::string vector_to_text(const std::vector<double>& v) {
  std::string out;
  char line[96];
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::snprintf(line, sizeof line, "%zu 0 %.17g\n", i, v[i]);
    out += line;
  }
  return out;
}

}  // namespace mpfem
