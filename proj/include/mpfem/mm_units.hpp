#pragma once
#include <cstdint>
#include <string>

#include "mpfem/linalg.hpp"
#include "mpfem/softfloat.hpp"

namespace mpfem {

// Tiled matrix-multiply-add unit: C (rows x cols) += A (rows x depth) *
// B (depth x cols), products and adds rounded in the accumulate format,
// subnormal accumulates flushed to signed zero when the policy is on.
struct MatmulUnitSpec {
  int rows = 16;
  int cols = 16;
  int depth = 32;
  Fmt input = Fmt::bf16;
  Fmt accum = Fmt::fp32;
  bool flush_output_subnormals = true;
};

// Entrywise dot-product unit: 2:1 reduction of interleaved pairs,
// c_i += a_2i b_2i + a_2i+1 b_2i+1, even term first.
struct VectorUnitSpec {
  int input_width = 32;
  int output_width = 16;
  Fmt input = Fmt::bf16;
  Fmt accum = Fmt::fp32;
};

enum class EngineKind : uint8_t { scalar, vector, matrix };

EngineKind engine_from_name(const std::string& name);
const char* engine_name(EngineKind engine);

// Throws ConfigError unless depth is even, shapes are positive, and the
// accumulate format carries strictly more significand bits than the input.
void validate_unit(const MatmulUnitSpec& spec);
void validate_unit(const VectorUnitSpec& spec);

// One tile update. Operands must already be representable in the input
// format (the caller's storage rounding); inner index k ascends 0..depth-1.
void tile_fmma(Mat& c, const Mat& a, const Mat& b, const MatmulUnitSpec& spec,
               FpFlags& flags);

// One vector update; c has output_width entries, a and b input_width each.
void vector_mdot(double* c, const double* a, const double* b,
                 const VectorUnitSpec& spec, FpFlags& flags);

// C = A * B over arbitrary shapes at the given accumulate format, every
// engine reproducing the same canonical k-ascending accumulation per entry,
// so results are bit-identical across engines except where the matrix
// engine's subnormal flush fires. Operands must be pre-rounded to the
// engine's input format by the caller.
Mat blocked_matmul(const Mat& a, const Mat& b, EngineKind engine, Fmt accum_fmt,
                   FpFlags& flags, MatmulUnitSpec mspec = {},
                   VectorUnitSpec vspec = {});

}  // namespace mpfem
