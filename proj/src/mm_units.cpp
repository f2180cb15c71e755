#include "mpfem/mm_units.hpp"

#include <string>

#include "mpfem/common.hpp"

namespace mpfem {

EngineKind engine_from_name(const std::string& name) {
  if (name == "scalar") return EngineKind::scalar;
  if (name == "vector") return EngineKind::vector;
  if (name == "matrix") return EngineKind::matrix;
  throw ConfigError("unknown engine: '" + name + "'");
}

const char* engine_name(EngineKind engine) {
  switch (engine) {
    case EngineKind::scalar: return "scalar";
    case EngineKind::vector: return "vector";
    default: return "matrix";
  }
}

void validate_unit(const MatmulUnitSpec& spec) {
  if (spec.rows < 1 || spec.cols < 1 || spec.depth < 1) {
    throw ConfigError("matmul tile shape must be positive");
  }
  if (spec.depth % 2 != 0) throw ConfigError("matmul tile depth must be even");
  if (format_info(spec.accum).t <= format_info(spec.input).t) {
    throw ConfigError("accumulate format must be strictly wider than input format");
  }
}

void validate_unit(const VectorUnitSpec& spec) {
  if (spec.output_width < 1 || spec.input_width != 2 * spec.output_width) {
    throw ConfigError("vector unit needs a 2:1 input to output width ratio");
  }
  if (format_info(spec.accum).t <= format_info(spec.input).t) {
    throw ConfigError("accumulate format must be strictly wider than input format");
  }
}

void tile_fmma(Mat& c, const Mat& a, const Mat& b, const MatmulUnitSpec& spec,
               FpFlags& flags) {
  if (c.rows != spec.rows || c.cols != spec.cols || a.rows != spec.rows ||
      a.cols != spec.depth || b.rows != spec.depth || b.cols != spec.cols) {
    throw ConfigError("tile operand shape mismatch");
  }
  SubnormalPolicy policy = spec.flush_output_subnormals
                               ? SubnormalPolicy::flush_to_zero
                               : SubnormalPolicy::supported;
  for (int i = 0; i < spec.rows; ++i) {
    for (int j = 0; j < spec.cols; ++j) {
      double acc = c(i, j);
      for (int k = 0; k < spec.depth; ++k) {
        double p = fp_mul(a(i, k), b(k, j), spec.accum, flags);
        acc = fp_add(acc, p, spec.accum, flags, policy);
      }
      c(i, j) = acc;
    }
  }
}

void vector_mdot(double* c, const double* a, const double* b,
                 const VectorUnitSpec& spec, FpFlags& flags) {
  for (int i = 0; i < spec.output_width; ++i) {
    double even = fp_mul(a[2 * i], b[2 * i], spec.accum, flags);
    c[i] = fp_add(c[i], even, spec.accum, flags);
    double odd = fp_mul(a[2 * i + 1], b[2 * i + 1], spec.accum, flags);
    c[i] = fp_add(c[i], odd, spec.accum, flags);
  }
}

namespace {

Mat scalar_matmul(const Mat& a, const Mat& b, Fmt accum, FpFlags& flags) {
  Mat c(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) {
    for (int j = 0; j < b.cols; ++j) {
      double acc = 0.0;
      for (int k = 0; k < a.cols; ++k) {
        acc = fp_add(acc, fp_mul(a(i, k), b(k, j), accum, flags), accum, flags);
      }
      c(i, j) = acc;
    }
  }
  return c;
}

// Depth padding uses +0 in A and -0 in B: the padded products are -0, and
// adding -0 changes no value (including signed zeros), so padded tiles
// accumulate exactly the unpadded sequence.
Mat padded(const Mat& m, int rows, int cols, double fill) {
  Mat out(rows, cols);
  for (double& v : out.a) v = fill;
  for (int i = 0; i < m.rows; ++i) {
    for (int j = 0; j < m.cols; ++j) out(i, j) = m(i, j);
  }
  return out;
}

Mat matrix_matmul(const Mat& a, const Mat& b, Fmt accum, FpFlags& flags,
                  MatmulUnitSpec spec) {
  spec.accum = accum;
  validate_unit(spec);
  int mt = (a.rows + spec.rows - 1) / spec.rows;
  int nt = (b.cols + spec.cols - 1) / spec.cols;
  int kt = (a.cols + spec.depth - 1) / spec.depth;
  Mat ap = padded(a, mt * spec.rows, kt * spec.depth, 0.0);
  Mat bp = padded(b, kt * spec.depth, nt * spec.cols, -0.0);
  Mat c(a.rows, b.cols);
  Mat ct(spec.rows, spec.cols);
  Mat at(spec.rows, spec.depth);
  Mat bt(spec.depth, spec.cols);
  for (int ti = 0; ti < mt; ++ti) {
    for (int tj = 0; tj < nt; ++tj) {
      for (double& v : ct.a) v = 0.0;
      for (int tk = 0; tk < kt; ++tk) {
        for (int i = 0; i < spec.rows; ++i) {
          for (int k = 0; k < spec.depth; ++k) {
            at(i, k) = ap(ti * spec.rows + i, tk * spec.depth + k);
          }
        }
        for (int k = 0; k < spec.depth; ++k) {
          for (int j = 0; j < spec.cols; ++j) {
            bt(k, j) = bp(tk * spec.depth + k, tj * spec.cols + j);
          }
        }
        tile_fmma(ct, at, bt, spec, flags);
      }
      for (int i = 0; i < spec.rows; ++i) {
        int gi = ti * spec.rows + i;
        if (gi >= c.rows) break;
        for (int j = 0; j < spec.cols; ++j) {
          int gj = tj * spec.cols + j;
          if (gj >= c.cols) break;
          c(gi, gj) = ct(i, j);
        }
      }
    }
  }
  return c;
}

Mat vector_matmul(const Mat& a, const Mat& b, Fmt accum, FpFlags& flags,
                  VectorUnitSpec spec) {
  spec.accum = accum;
  validate_unit(spec);
  int lanes = spec.output_width;
  int nt = (b.cols + lanes - 1) / lanes;
  int kt = (a.cols + 1) / 2;
  Mat bp = padded(b, 2 * kt, nt * lanes, -0.0);
  Mat c(a.rows, b.cols);
  std::vector<double> lane_c(std::size_t(lanes), 0.0);
  std::vector<double> lane_a(std::size_t(2) * lanes, 0.0);
  std::vector<double> lane_b(std::size_t(2) * lanes, 0.0);
  for (int i = 0; i < a.rows; ++i) {
    for (int tj = 0; tj < nt; ++tj) {
      for (double& v : lane_c) v = 0.0;
      // Lane L owns column tj*lanes + L; each call consumes one depth pair.
      for (int k = 0; k < 2 * kt; k += 2) {
        double a_even = k < a.cols ? a(i, k) : 0.0;
        double a_odd = k + 1 < a.cols ? a(i, k + 1) : 0.0;
        for (int l = 0; l < lanes; ++l) {
          lane_a[2 * l] = a_even;
          lane_a[2 * l + 1] = a_odd;
          lane_b[2 * l] = bp(k, tj * lanes + l);
          lane_b[2 * l + 1] = bp(k + 1, tj * lanes + l);
        }
        vector_mdot(lane_c.data(), lane_a.data(), lane_b.data(), spec, flags);
      }
      for (int l = 0; l < lanes; ++l) {
        int gj = tj * lanes + l;
        if (gj >= c.cols) break;
        c(i, gj) = lane_c[l];
      }
    }
  }
  return c;
}

}  // namespace

Mat blocked_matmul(const Mat& a, const Mat& b, EngineKind engine, Fmt accum_fmt,
                   FpFlags& flags, MatmulUnitSpec mspec, VectorUnitSpec vspec) {
  if (a.cols != b.rows) throw ConfigError("matmul inner dimensions disagree");
  switch (engine) {
    case EngineKind::scalar:
      return scalar_matmul(a, b, accum_fmt, flags);
    case EngineKind::vector:
      return vector_matmul(a, b, accum_fmt, flags, vspec);
    default:
      return matrix_matmul(a, b, accum_fmt, flags, mspec);
  }
}

}  // namespace mpfem
