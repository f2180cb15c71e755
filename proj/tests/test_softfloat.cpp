#include "mpfem/softfloat.hpp"

#include <bit>
#include <cmath>
#include <limits>

#include "doctest.h"
#include "mpfem/common.hpp"
#include "oracles.hpp"

using namespace mpfem;

namespace {

bool same_bits(double a, double b) {
  return std::bit_cast<uint64_t>(a) == std::bit_cast<uint64_t>(b);
}

}  // namespace

TEST_CASE("softfloat | format table") {
  const FormatInfo& bf = format_info(Fmt::bf16);
  CHECK(bf.t == 8);
  CHECK(bf.exponent_bits == 8);
  CHECK(bf.e_min == -126);
  CHECK(bf.u == 0x1.0p-8);
  CHECK(bf.u == doctest::Approx(3.91e-3).epsilon(5e-3));
  CHECK(bf.min_normal == doctest::Approx(1.18e-38).epsilon(5e-3));
  CHECK(bf.max_finite == doctest::Approx(3.39e38).epsilon(5e-3));

  const FormatInfo& h = format_info(Fmt::fp16);
  CHECK(h.t == 11);
  CHECK(h.exponent_bits == 5);
  CHECK(h.e_min == -14);
  CHECK(h.u == 0x1.0p-11);
  CHECK(h.u == doctest::Approx(4.88e-4).epsilon(5e-3));
  CHECK(h.min_normal == doctest::Approx(6.10e-5).epsilon(5e-3));
  CHECK(h.max_finite == 65504.0);

  const FormatInfo& s = format_info(Fmt::fp32);
  CHECK(s.t == 24);
  CHECK(s.exponent_bits == 8);
  CHECK(s.u == 0x1.0p-24);
  CHECK(s.u == doctest::Approx(5.96e-8).epsilon(5e-3));
  CHECK(s.min_normal == doctest::Approx(1.18e-38).epsilon(5e-3));
  CHECK(s.max_finite == doctest::Approx(3.40e38).epsilon(5e-3));

  const FormatInfo& d = format_info(Fmt::fp64);
  CHECK(d.t == 53);
  CHECK(d.exponent_bits == 11);
  CHECK(d.u == 0x1.0p-53);
  CHECK(d.u == doctest::Approx(1.11e-16).epsilon(5e-3));
  CHECK(d.min_normal == doctest::Approx(2.22e-308).epsilon(5e-3));
  CHECK(d.max_finite == std::numeric_limits<double>::max());  // 1.80e308 to 3 digits
}

TEST_CASE("softfloat | names round-trip and reject junk") {
  for (Fmt f : {Fmt::bf16, Fmt::fp16, Fmt::fp32, Fmt::fp64}) {
    CHECK(format_from_name(format_info(f).name) == f);
  }
  CHECK_THROWS_AS(format_from_name("FP16"), ConfigError);
  CHECK_THROWS_AS(format_from_name("half"), ConfigError);
  CHECK_THROWS_AS(format_from_name(""), ConfigError);
}

TEST_CASE("softfloat | ties to even near one") {
  FpFlags fl;
  CHECK(round_to(1.0 + 0x1.0p-9, Fmt::bf16, fl) == 1.0);         // below half ulp
  CHECK(round_to(1.0 + 0x1.0p-8, Fmt::bf16, fl) == 1.0);         // tie, even wins
  CHECK(round_to(1.0 + 0x1.8p-8, Fmt::bf16, fl) == 1.0 + 0x1.0p-7);  // above tie
  CHECK(round_to(1.0 + 3.0 * 0x1.0p-8, Fmt::bf16, fl) == 1.0 + 0x1.0p-6);  // tie, odd bumps
  CHECK(round_to(1.0 + 0x1.0p-12, Fmt::fp16, fl) == 1.0);
  CHECK(round_to(1.0 + 0x1.0p-11, Fmt::fp16, fl) == 1.0);
  CHECK(round_to(1.0 + 0x1.8p-11, Fmt::fp16, fl) == 1.0 + 0x1.0p-10);
  CHECK(!fl.any());  // exact-range rounding raises nothing
}

TEST_CASE("softfloat | overflow to infinity") {
  FpFlags fl;
  double r = round_to(65520.0, Fmt::fp16, fl);  // just past the tie above max
  CHECK(std::isinf(r));
  CHECK(r > 0);
  CHECK(fl.overflow);

  fl = {};
  CHECK(round_to(65519.0, Fmt::fp16, fl) == 65504.0);
  CHECK(!fl.overflow);

  fl = {};
  double rneg = round_to(-1.0e40, Fmt::bf16, fl);
  CHECK(std::isinf(rneg));
  CHECK(rneg < 0);
  CHECK(fl.overflow);
}

TEST_CASE("softfloat | subnormal rounding and flush policy") {
  FpFlags fl;
  // fp16 subnormal quantum is 2^-24.
  CHECK(round_to(0x1.0p-25, Fmt::fp16, fl) == 0.0);     // tie with zero, even
  CHECK(fl.underflow);
  fl = {};
  CHECK(round_to(0x1.8p-24, Fmt::fp16, fl) == 0x1.0p-23);  // tie, even mantissa wins
  CHECK(round_to(0x1.0p-24, Fmt::fp16, fl) == 0x1.0p-24);  // exact subnormal
  fl = {};
  double kept = round_to(0x1.0p-24, Fmt::fp16, fl);
  CHECK(kept == 0x1.0p-24);
  CHECK(!fl.underflow);  // exact result, no event

  fl = {};
  double flushed = round_to(0x1.0p-24, Fmt::fp16, fl, SubnormalPolicy::flush_to_zero);
  CHECK(flushed == 0.0);
  CHECK(!std::signbit(flushed));
  CHECK(fl.underflow);
  fl = {};
  double flushed_neg = round_to(-0x1.0p-20, Fmt::fp16, fl, SubnormalPolicy::flush_to_zero);
  CHECK(flushed_neg == 0.0);
  CHECK(std::signbit(flushed_neg));
  CHECK(fl.underflow);

  // Just below the normal range rounds up into it without losing the flag rule.
  fl = {};
  double up = round_to(0x1.fffp-15, Fmt::fp16, fl);
  CHECK(up == 0x1.0p-14);
}

TEST_CASE("softfloat | zero, infinity and nan pass-through") {
  FpFlags fl;
  CHECK(same_bits(round_to(0.0, Fmt::bf16, fl), 0.0));
  CHECK(same_bits(round_to(-0.0, Fmt::bf16, fl), -0.0));
  double inf = std::numeric_limits<double>::infinity();
  CHECK(round_to(inf, Fmt::fp16, fl) == inf);
  CHECK(round_to(-inf, Fmt::fp16, fl) == -inf);
  CHECK(!fl.any());

  double n = round_to(std::numeric_limits<double>::quiet_NaN(), Fmt::bf16, fl);
  CHECK(same_bits(n, canonical_nan()));
  CHECK(fl.invalid);
}

TEST_CASE("softfloat | arithmetic flags") {
  FpFlags fl;
  double r = fp_div(1.0, 0.0, Fmt::fp32, fl);
  CHECK(std::isinf(r));
  CHECK(fl.divzero);
  CHECK(!fl.invalid);

  fl = {};
  double r2 = fp_div(0.0, 0.0, Fmt::fp32, fl);
  CHECK(same_bits(r2, canonical_nan()));
  CHECK(fl.invalid);
  CHECK(!fl.divzero);

  fl = {};
  double r3 = fp_sqrt(-2.0, Fmt::fp64, fl);
  CHECK(same_bits(r3, canonical_nan()));
  CHECK(fl.invalid);

  fl = {};
  double r4 = fp_mul(0x1.0p127, 0x1.0p127, Fmt::bf16, fl);
  CHECK(std::isinf(r4));
  CHECK(fl.overflow);

  fl = {};
  double r5 = fp_mul(0x1.0p-100, 0x1.0p-100, Fmt::fp32, fl);
  CHECK(r5 == 0.0);
  CHECK(fl.underflow);

  fl = {};
  double r6 = fp_add(0x1.0p512, 0x1.0p512, Fmt::fp64, fl);
  CHECK(r6 == 0x1.0p513);
  CHECK(!fl.any());
  double r7 = fp_mul(0x1.0p1000, 0x1.0p1000, Fmt::fp64, fl);
  CHECK(std::isinf(r7));
  CHECK(fl.overflow);
}

TEST_CASE("softfloat | flags merge and stay sticky") {
  FpFlags a, b;
  a.overflow = true;
  b.invalid = true;
  a.merge(b);
  CHECK(a.overflow);
  CHECK(a.invalid);
  CHECK(!a.underflow);

  FpFlags fl;
  fp_div(1.0, 0.0, Fmt::fp32, fl);
  fp_add(1.0, 1.0, Fmt::fp32, fl);  // clean op must not clear anything
  CHECK(fl.divzero);
}

TEST_CASE("softfloat | widening casts are exact") {
  FpFlags fl;
  Rng rng(2024);
  for (int i = 0; i < 1000; ++i) {
    double x = rng.uniform(-1e4, 1e4);
    double h = round_to(x, Fmt::fp16, fl);
    CHECK(fp_cast(h, Fmt::fp16, Fmt::fp32, fl) == h);
    CHECK(fp_cast(h, Fmt::fp16, Fmt::fp64, fl) == h);
    double b = round_to(x, Fmt::bf16, fl);
    CHECK(fp_cast(b, Fmt::bf16, Fmt::fp32, fl) == b);
  }
}

TEST_CASE("softfloat | every 16-bit pattern is a fixed point") {
  FpFlags fl;
  for (uint32_t bits = 0; bits < 0x10000; ++bits) {
    double h = oracle::decode_fp16(uint16_t(bits));
    if (!std::isnan(h)) {
      CHECK(round_to(h, Fmt::fp16, fl) == h);
      CHECK(oracle::encode_fp16(h) == uint16_t(bits));
      CHECK(is_representable(h, Fmt::fp16));
    }
    double b = oracle::decode_bf16(uint16_t(bits));
    if (!std::isnan(b)) {
      CHECK(round_to(b, Fmt::bf16, fl) == b);
      CHECK(oracle::encode_bf16(b) == uint16_t(bits));
    }
  }
}

TEST_CASE("softfloat | rounding matches the independent oracle on samples") {
  Rng rng(77);
  for (Fmt f : {Fmt::bf16, Fmt::fp16, Fmt::fp32}) {
    for (int i = 0; i < 20000; ++i) {
      // Log-uniform magnitudes spanning well past both range ends.
      double mag = std::pow(10.0, rng.uniform(-46.0, 42.0));
      double x = (rng.uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0) * mag;
      FpFlags fl;
      double got = round_to(x, f, fl);
      oracle::RoundResult want = oracle::round_fmt(x, f);
      CHECK(same_bits(got, want.value));
      CHECK(fl.overflow == want.overflow);
      CHECK(fl.underflow == want.underflow);
    }
  }
}

TEST_CASE("softfloat | double rounding cannot occur at half precision") {
  // 2t + 2 <= 53 for t <= 25: the binary64 carrier keeps enough slack that
  // rounding its product again at t bits equals the directly rounded product.
  // Spot-check products around the worst case pattern (1 + u) * (1 + u).
  FpFlags fl;
  for (Fmt f : {Fmt::bf16, Fmt::fp16}) {
    const FormatInfo& fi = format_info(f);
    double a = 1.0 + 2.0 * fi.u;
    double b = 1.0 + fi.u * 0.0 + 2.0 * fi.u;
    double native = a * b;
    oracle::RoundResult want = oracle::round_fmt(native, f);
    CHECK(fp_mul(a, b, f, fl) == want.value);
  }
}
