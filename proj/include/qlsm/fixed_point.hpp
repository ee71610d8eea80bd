// Copyright 2026 The qlsm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>

namespace qlsm {

struct FixedPointFormat {
  int integer_bits = 8;
  int fraction_bits = 24;

  double max_value() const;  // 2^{c1} - 2^{-c2}
  double ulp() const;        // 2^{-c2}
  int width() const { return integer_bits + fraction_bits + 1; }
  bool operator==(const FixedPointFormat&) const = default;
};

// Sign-magnitude fixed-point number. The magnitude is stored as an integer
// count of 2^{-c2} units.
class FixedPoint {
 public:
  FixedPoint() = default;

  // Round to nearest (ties away from zero). Throws Overflow above R_fp.
  static FixedPoint encode(double value, FixedPointFormat format = {});
  // a[i-1] = a_i (weight 2^{i-1}), b[j-1] = b_j (weight 2^{-j}).
  static FixedPoint from_bits(std::span<const int> a, std::span<const int> b, int sign, FixedPointFormat format);
  static FixedPoint from_raw(std::uint64_t raw, FixedPointFormat format);
  static FixedPoint from_units(std::int64_t signed_units, FixedPointFormat format);

  double decode() const;
  std::uint64_t raw() const;
  std::int64_t units() const { return negative_ ? -static_cast<std::int64_t>(magnitude_) : static_cast<std::int64_t>(magnitude_); }
  int sign_bit() const { return negative_ ? 1 : 0; }
  int a(int i) const;  // 1..c1
  int b(int j) const;  // 1..c2
  const FixedPointFormat& format() const { return format_; }

 private:
  FixedPointFormat format_{};
  std::uint64_t magnitude_ = 0;
  bool negative_ = false;
};

void check_format(const FixedPointFormat& format);

// Exact product, rounded once.
FixedPoint fixed_mul(const FixedPoint& x, const FixedPoint& y);
// Exact sum of exact products, rounded once.
FixedPoint fixed_dot(std::span<const FixedPoint> x, std::span<const FixedPoint> y, FixedPointFormat format);
// Stopping decision on rounded values: stop iff Q(z) >= Q(f).
inline bool fixed_stop(const FixedPoint& z, const FixedPoint& f) { return z.units() >= f.units(); }

}  // namespace qlsm
