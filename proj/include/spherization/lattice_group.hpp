// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>

namespace spherization {

/// 2x2 integer matrix, row major.
struct IntMatrix2 {
  std::array<std::int64_t, 4> a{1, 0, 0, 1};

  std::int64_t operator()(int r, int c) const { return a[2 * r + c]; }
  std::int64_t det() const;
  std::int64_t trace() const { return a[0] + a[3]; }
  /// Inverse of a determinant-one matrix.
  IntMatrix2 unimodular_inverse() const;
  friend bool operator==(const IntMatrix2&, const IntMatrix2&) = default;
};

IntMatrix2 multiply(const IntMatrix2& x, const IntMatrix2& y);  // overflow-checked
/// A^l for any integer l (det A must be 1 when l < 0).
IntMatrix2 power(const IntMatrix2& A, std::int64_t l);

/// Element (v, l) of Z^2 x|_A Z. The same triple tags deck transformations of
/// the Sol quotient and, with l = 0, of the flat torus.
struct GroupElement {
  std::int64_t m = 0;
  std::int64_t n = 0;
  std::int64_t l = 0;

  friend auto operator<=>(const GroupElement&, const GroupElement&) = default;
};

using DeckElement = GroupElement;

/// (v, l) * (v', l') = (v + A^l v', l + l').
GroupElement multiply(const GroupElement& a, const GroupElement& b, const IntMatrix2& A);
GroupElement inverse(const GroupElement& g, const IntMatrix2& A);

struct GroupElementHash {
  std::size_t operator()(const GroupElement& g) const noexcept {
    std::uint64_t h = 1469598103934665603ULL;
    for (std::int64_t v : {g.m, g.n, g.l}) {
      h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace spherization
