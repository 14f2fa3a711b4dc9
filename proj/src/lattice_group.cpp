// SPDX-License-Identifier: Apache-2.0
#include "spherization/lattice_group.hpp"

#include <cstdlib>

#include "spherization/errors.hpp"

namespace spherization {

namespace {

std::int64_t checked_mul(std::int64_t x, std::int64_t y) {
  std::int64_t r;
  if (__builtin_mul_overflow(x, y, &r)) throw budget_error("integer overflow in lattice arithmetic");
  return r;
}

std::int64_t checked_add(std::int64_t x, std::int64_t y) {
  std::int64_t r;
  if (__builtin_add_overflow(x, y, &r)) throw budget_error("integer overflow in lattice arithmetic");
  return r;
}

}  // namespace

std::int64_t IntMatrix2::det() const {
  return checked_add(checked_mul(a[0], a[3]), -checked_mul(a[1], a[2]));
}

IntMatrix2 IntMatrix2::unimodular_inverse() const {
  if (det() != 1) throw invariant_error("unimodular_inverse: determinant is not 1");
  return IntMatrix2{{a[3], -a[1], -a[2], a[0]}};
}

IntMatrix2 multiply(const IntMatrix2& x, const IntMatrix2& y) {
  IntMatrix2 r;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      r.a[2 * i + j] = checked_add(checked_mul(x(i, 0), y(0, j)), checked_mul(x(i, 1), y(1, j)));
    }
  }
  return r;
}

IntMatrix2 power(const IntMatrix2& A, std::int64_t l) {
  IntMatrix2 base = l < 0 ? A.unimodular_inverse() : A;
  std::int64_t e = std::llabs(l);
  IntMatrix2 r;
  while (e > 0) {
    if (e & 1) r = multiply(r, base);
    e >>= 1;
    if (e > 0) base = multiply(base, base);
  }
  return r;
}

GroupElement multiply(const GroupElement& a, const GroupElement& b, const IntMatrix2& A) {
  const IntMatrix2 Al = power(A, a.l);
  return {checked_add(a.m, checked_add(checked_mul(Al(0, 0), b.m), checked_mul(Al(0, 1), b.n))),
          checked_add(a.n, checked_add(checked_mul(Al(1, 0), b.m), checked_mul(Al(1, 1), b.n))),
          checked_add(a.l, b.l)};
}

GroupElement inverse(const GroupElement& g, const IntMatrix2& A) {
  // (v, l)^{-1} = (-A^{-l} v, -l)
  const IntMatrix2 Ainv = power(A, -g.l);
  return {-checked_add(checked_mul(Ainv(0, 0), g.m), checked_mul(Ainv(0, 1), g.n)),
          -checked_add(checked_mul(Ainv(1, 0), g.m), checked_mul(Ainv(1, 1), g.n)), -g.l};
}

}  // namespace spherization
