#pragma once
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string_view>

#include "mpfem/common.hpp"

namespace mpfem {

// Reduced-precision floating point emulated on a binary64 carrier. Every value
// of a supported format is exactly representable in binary64, and for t <= 25
// significand bits rounding the binary64 result of +,-,*,/,sqrt a second time
// to t bits is free of double-rounding error (2t + 2 <= 53), so the emulated
// ops are bit-exact round-to-nearest ties-to-even.
enum class Fmt : uint8_t { bf16 = 0, fp16 = 1, fp32 = 2, fp64 = 3 };

enum class SubnormalPolicy : uint8_t { supported, flush_to_zero };

// Sticky exception flags, carried explicitly per task (no global state).
struct FpFlags {
  bool overflow = false;
  bool underflow = false;
  bool invalid = false;
  bool divzero = false;

  void merge(const FpFlags& o) {
    overflow |= o.overflow;
    underflow |= o.underflow;
    invalid |= o.invalid;
    divzero |= o.divzero;
  }
  bool any() const { return overflow || underflow || invalid || divzero; }
  bool operator==(const FpFlags&) const = default;
};

struct FormatInfo {
  const char* name;
  int t;                 // significand bits including the implicit bit
  int exponent_bits;
  int e_min;             // exponent of the smallest normal, 2 - 2^(exponent_bits-1)
  double u;              // unit roundoff 2^-t
  double min_normal;     // 2^e_min
  double min_subnormal;  // 2^(e_min + 1 - t); grid spacing everywhere below 2^(e_min+1)
  double max_finite;     // (2 - 2^(1-t)) * 2^e_max
};

namespace detail {
inline constexpr FormatInfo kFormats[4] = {
    {"bf16", 8, 8, -126, 0x1.0p-8, 0x1.0p-126, 0x1.0p-133, 0x1.fep127},
    {"fp16", 11, 5, -14, 0x1.0p-11, 0x1.0p-14, 0x1.0p-24, 65504.0},
    {"fp32", 24, 8, -126, 0x1.0p-24, 0x1.0p-126, 0x1.0p-149, 0x1.fffffep127},
    {"fp64", 53, 11, -1022, 0x1.0p-53, 0x1.0p-1022, 0x1.0p-1074,
     0x1.fffffffffffffp1023},
};
inline constexpr uint64_t kCanonicalNanBits = 0x7ff8000000000000ull;
}  // namespace detail

inline const FormatInfo& format_info(Fmt f) { return detail::kFormats[int(f)]; }

// Exact lowercase names "bf16", "fp16", "fp32", "fp64"; anything else throws.
Fmt format_from_name(std::string_view name);

inline double canonical_nan() { return std::bit_cast<double>(detail::kCanonicalNanBits); }

namespace detail {

// Target-format rounding for t < 53 on the raw bit pattern: truncate the low
// 53 - t significand bits with ties-to-even; the increment carries into the
// exponent field, which is exactly the right binade promotion.
inline double round_narrow(double x, const FormatInfo& fi, FpFlags& flags,
                           SubnormalPolicy policy) {
  uint64_t bits = std::bit_cast<uint64_t>(x);
  uint64_t mag = bits & 0x7fffffffffffffffull;
  if (mag >= 0x7ff0000000000000ull) {
    if (mag > 0x7ff0000000000000ull) {  // NaN in, canonical NaN out
      flags.invalid = true;
      return canonical_nan();
    }
    return x;  // +-inf is representable in every format
  }
  if (mag == 0) return x;  // +-0, sign preserved
  double ax = std::bit_cast<double>(mag);
  if (ax < fi.min_normal) {
    if (policy == SubnormalPolicy::flush_to_zero) {
      flags.underflow = true;
      return std::copysign(0.0, x);
    }
    // Subnormal grid is uniform with spacing min_subnormal; the scale and the
    // final product are exact (power-of-two factor, result significand <= t-1
    // bits), and nearbyint applies the ambient ties-to-even mode.
    double q = std::nearbyint(ax / fi.min_subnormal) * fi.min_subnormal;
    double r = std::copysign(q, x);
    if (r != x) flags.underflow = true;
    return r;
  }
  int drop = 53 - fi.t;
  uint64_t mask = (uint64_t(1) << drop) - 1;
  uint64_t rem = bits & mask;
  uint64_t half = uint64_t(1) << (drop - 1);
  bits &= ~mask;
  if (rem > half || (rem == half && (bits & (uint64_t(1) << drop)))) {
    bits += uint64_t(1) << drop;
  }
  double r = std::bit_cast<double>(bits);
  if (std::fabs(r) > fi.max_finite) {
    flags.overflow = true;
    return std::copysign(std::numeric_limits<double>::infinity(), x);
  }
  return r;
}

inline double round_fp32_native(double x, FpFlags& flags, SubnormalPolicy policy) {
  float g = float(x);  // one correctly rounded conversion
  if (std::isnan(g)) {
    flags.invalid = true;
    return canonical_nan();
  }
  if (std::isinf(g)) {
    if (!std::isinf(x)) flags.overflow = true;
    return double(g);
  }
  if (x != 0.0 && std::fabs(x) < 0x1.0p-126) {
    if (policy == SubnormalPolicy::flush_to_zero) {
      flags.underflow = true;
      return std::copysign(0.0, x);
    }
    if (double(g) != x) flags.underflow = true;
  }
  return double(g);
}

inline double round_fp64_identity(double x, FpFlags& flags) {
  if (std::isnan(x)) {
    flags.invalid = true;
    return canonical_nan();
  }
  return x;
}

}  // namespace detail

// Rounds a binary64 value to the target format, ties-to-even. Sets underflow
// when a nonzero value below the normal range changes under rounding (or is
// flushed), overflow when the result leaves the finite range, invalid on NaN.
inline double round_to(double x, Fmt f, FpFlags& flags,
                       SubnormalPolicy policy = SubnormalPolicy::supported) {
  switch (f) {
    case Fmt::fp64:
      return detail::round_fp64_identity(x, flags);
    case Fmt::fp32:
      return detail::round_fp32_native(x, flags, policy);
    default:
      return detail::round_narrow(x, format_info(f), flags, policy);
  }
}

// True when x is a value of format f (including +-0, +-inf; not NaN).
inline bool is_representable(double x, Fmt f) {
  if (std::isnan(x)) return false;
  FpFlags scratch;
  return round_to(x, f, scratch) == x;
}

enum class OpKind : uint8_t { add, sub, mul, div };

// One emulated arithmetic op at format f: the exact binary64 result rounded to
// f. Operands must already be values of f (checked in tests, not here).
inline double fp_op(double a, double b, OpKind op, Fmt f, FpFlags& flags,
                    SubnormalPolicy policy = SubnormalPolicy::supported) {
  double r = 0.0;
  switch (op) {
    case OpKind::add: r = a + b; break;
    case OpKind::sub: r = a - b; break;
    case OpKind::mul: r = a * b; break;
    case OpKind::div:
      if (b == 0.0 && a != 0.0 && !std::isnan(a) && !std::isinf(a)) flags.divzero = true;
      r = a / b;
      break;
  }
  if (f == Fmt::fp64 && std::isinf(r) && !std::isinf(a) && !std::isinf(b)) {
    flags.overflow = true;
  }
  return round_to(r, f, flags, policy);
}

inline double fp_add(double a, double b, Fmt f, FpFlags& fl,
                     SubnormalPolicy p = SubnormalPolicy::supported) {
  return fp_op(a, b, OpKind::add, f, fl, p);
}
inline double fp_sub(double a, double b, Fmt f, FpFlags& fl,
                     SubnormalPolicy p = SubnormalPolicy::supported) {
  return fp_op(a, b, OpKind::sub, f, fl, p);
}
inline double fp_mul(double a, double b, Fmt f, FpFlags& fl,
                     SubnormalPolicy p = SubnormalPolicy::supported) {
  return fp_op(a, b, OpKind::mul, f, fl, p);
}
inline double fp_div(double a, double b, Fmt f, FpFlags& fl,
                     SubnormalPolicy p = SubnormalPolicy::supported) {
  return fp_op(a, b, OpKind::div, f, fl, p);
}

// sqrt of a format-f value; negative nonzero input is invalid (canonical NaN).
inline double fp_sqrt(double a, Fmt f, FpFlags& fl,
                      SubnormalPolicy p = SubnormalPolicy::supported) {
  return round_to(std::sqrt(a), f, fl, p);
}

// Re-rounds a value of format `from` to format `to`. Widening is exact.
inline double fp_cast(double x, Fmt from, Fmt to, FpFlags& fl,
                      SubnormalPolicy p = SubnormalPolicy::supported) {
  (void)from;
  return round_to(x, to, fl, p);
}

}  // namespace mpfem
