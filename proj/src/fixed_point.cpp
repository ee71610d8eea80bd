// Copyright 2026 The qlsm Authors
// SPDX-License-Identifier: Apache-2.0

#include "qlsm/fixed_point.hpp"

#include <cmath>
#include <string>

#include "qlsm/error.hpp"

namespace qlsm {

namespace {

std::uint64_t max_units(const FixedPointFormat& f) {
  return (std::uint64_t{1} << (f.integer_bits + f.fraction_bits)) - 1;
}

// Rounds p * 2^{-shift} to nearest, ties away from zero.
std::int64_t round_shift(__int128 p, int shift) {
  const bool neg = p < 0;
  unsigned __int128 mag = neg ? static_cast<unsigned __int128>(-p) : static_cast<unsigned __int128>(p);
  if (shift > 0) mag = (mag + (static_cast<unsigned __int128>(1) << (shift - 1))) >> shift;
  if (mag > static_cast<unsigned __int128>(INT64_MAX)) throw Overflow("fixed-point product out of range");
  const auto v = static_cast<std::int64_t>(mag);
  return neg ? -v : v;
}

}  // namespace

double FixedPointFormat::max_value() const { return std::ldexp(1.0, integer_bits) - std::ldexp(1.0, -fraction_bits); }

double FixedPointFormat::ulp() const { return std::ldexp(1.0, -fraction_bits); }

void check_format(const FixedPointFormat& f) {
  if (f.integer_bits < 0 || f.fraction_bits < 0 || f.integer_bits + f.fraction_bits < 1 || f.integer_bits + f.fraction_bits > 62)
    throw InvalidArgument("fixed-point format needs 1 <= c1 + c2 <= 62");
}

FixedPoint FixedPoint::encode(double value, FixedPointFormat format) {
  check_format(format);
  if (!std::isfinite(value) || std::abs(value) > format.max_value())
    throw Overflow("value " + std::to_string(value) + " outside fixed-point range " + std::to_string(format.max_value()));
  FixedPoint fp;
  fp.format_ = format;
  fp.magnitude_ = static_cast<std::uint64_t>(std::llround(std::ldexp(std::abs(value), format.fraction_bits)));
  fp.negative_ = value < 0.0 && fp.magnitude_ != 0;
  return fp;
}

FixedPoint FixedPoint::from_bits(std::span<const int> a, std::span<const int> b, int sign, FixedPointFormat format) {
  check_format(format);
  if (static_cast<int>(a.size()) != format.integer_bits || static_cast<int>(b.size()) != format.fraction_bits)
    throw InvalidArgument("bit vector lengths must equal c1 and c2");
  std::uint64_t mag = 0;
  for (int i = 1; i <= format.integer_bits; ++i)
    if (a[static_cast<std::size_t>(i - 1)]) mag |= std::uint64_t{1} << (format.fraction_bits + i - 1);
  for (int j = 1; j <= format.fraction_bits; ++j)
    if (b[static_cast<std::size_t>(j - 1)]) mag |= std::uint64_t{1} << (format.fraction_bits - j);
  FixedPoint fp;
  fp.format_ = format;
  fp.magnitude_ = mag;
  fp.negative_ = sign != 0 && mag != 0;
  return fp;
}

FixedPoint FixedPoint::from_raw(std::uint64_t raw, FixedPointFormat format) {
  check_format(format);
  const int n = format.integer_bits + format.fraction_bits;
  FixedPoint fp;
  fp.format_ = format;
  fp.magnitude_ = raw & max_units(format);
  fp.negative_ = ((raw >> n) & 1U) != 0 && fp.magnitude_ != 0;
  return fp;
}

FixedPoint FixedPoint::from_units(std::int64_t signed_units, FixedPointFormat format) {
  check_format(format);
  const std::uint64_t mag = signed_units < 0 ? static_cast<std::uint64_t>(-signed_units) : static_cast<std::uint64_t>(signed_units);
  if (mag > max_units(format)) throw Overflow("fixed-point value out of range");
  FixedPoint fp;
  fp.format_ = format;
  fp.magnitude_ = mag;
  fp.negative_ = signed_units < 0;
  return fp;
}

double FixedPoint::decode() const {
  const double v = std::ldexp(static_cast<double>(magnitude_), -format_.fraction_bits);
  return negative_ ? -v : v;
}

std::uint64_t FixedPoint::raw() const {
  return magnitude_ | (static_cast<std::uint64_t>(negative_) << (format_.integer_bits + format_.fraction_bits));
}

int FixedPoint::a(int i) const {
  if (i < 1 || i > format_.integer_bits) throw InvalidArgument("integer bit index out of range");
  return static_cast<int>((magnitude_ >> (format_.fraction_bits + i - 1)) & 1U);
}

int FixedPoint::b(int j) const {
  if (j < 1 || j > format_.fraction_bits) throw InvalidArgument("fraction bit index out of range");
  return static_cast<int>((magnitude_ >> (format_.fraction_bits - j)) & 1U);
}

FixedPoint fixed_mul(const FixedPoint& x, const FixedPoint& y) {
  if (!(x.format() == y.format())) throw InvalidArgument("fixed-point formats differ");
  const __int128 p = static_cast<__int128>(x.units()) * y.units();
  return FixedPoint::from_units(round_shift(p, x.format().fraction_bits), x.format());
}

FixedPoint fixed_dot(std::span<const FixedPoint> x, std::span<const FixedPoint> y, FixedPointFormat format) {
  if (x.size() != y.size()) throw InvalidArgument("fixed_dot length mismatch");
  __int128 acc = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i].format() == format) || !(y[i].format() == format)) throw InvalidArgument("fixed-point formats differ");
    acc += static_cast<__int128>(x[i].units()) * y[i].units();
  }
  return FixedPoint::from_units(round_shift(acc, format.fraction_bits), format);
}

}  // namespace qlsm
