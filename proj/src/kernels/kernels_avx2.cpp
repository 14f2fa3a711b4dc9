// SPDX-License-Identifier: Apache-2.0
// Compiled with -mavx2 only; reached solely through the runtime dispatch.
#include <immintrin.h>

#include "kernels_impl.hpp"

namespace spherization::kernels {
namespace {

struct V3 {
  __m256d x, y, z;
};

inline __m256d add(__m256d a, __m256d b) { return _mm256_add_pd(a, b); }
inline __m256d sub(__m256d a, __m256d b) { return _mm256_sub_pd(a, b); }
inline __m256d mul(__m256d a, __m256d b) { return _mm256_mul_pd(a, b); }
inline __m256d set1(double v) { return _mm256_set1_pd(v); }
inline __m256d neg(__m256d a) { return _mm256_xor_pd(a, set1(-0.0)); }

inline V3 rhs(const V3& m) {
  return {mul(m.x, m.z), neg(mul(m.y, m.z)), sub(mul(m.y, m.y), mul(m.x, add(m.x, set1(1.0))))};
}

inline V3 shift(const V3& m, __m256d h, const V3& k) {
  return {add(m.x, mul(h, k.x)), add(m.y, mul(h, k.y)), add(m.z, mul(h, k.z))};
}

inline __m256d combine(__m256d k1, __m256d k2, __m256d k3, __m256d k4) {
  const __m256d two = set1(2.0);
  return add(add(add(k1, mul(two, k2)), mul(two, k3)), k4);
}

// Clamp to [0, 1] the way the scalar ternary does for non-NaN input.
inline __m256d clamp01(__m256d t) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = set1(1.0);
  const __m256d hi = _mm256_blendv_pd(t, one, _mm256_cmp_pd(t, one, _CMP_GT_OQ));
  return _mm256_blendv_pd(hi, zero, _mm256_cmp_pd(t, zero, _CMP_LT_OQ));
}

inline __m256d step(__m256d t) {
  const __m256d c = clamp01(t);
  const __m256d c3 = mul(mul(c, c), c);
  return mul(c3, add(mul(c, sub(mul(c, set1(6.0)), set1(15.0))), set1(10.0)));
}

inline __m256d step_integral(__m256d t) {
  const __m256d c = clamp01(t);
  const __m256d c4 = mul(mul(mul(c, c), c), c);
  return mul(c4, add(mul(c, sub(c, set1(3.0))), set1(2.5)));
}

inline __m256d cutoff_value(__m256d r, const SandwichParams& p) {
  const __m256d t = _mm256_div_pd(sub(r, set1(p.eps2)), set1(p.width));
  const __m256d blend = mul(set1(p.width), add(step_integral(t), mul(set1(p.blend), step(t))));
  const __m256d inner = _mm256_blendv_pd(blend, _mm256_setzero_pd(), _mm256_cmp_pd(r, set1(p.eps2), _CMP_LE_OQ));
  return _mm256_blendv_pd(inner, r, _mm256_cmp_pd(r, set1(p.eps), _CMP_GE_OQ));
}

}  // namespace

std::size_t euler_avx2(double* x, double* y, double* z, double* acc, std::size_t n, double h, std::size_t steps,
                       std::size_t burn) {
  const std::size_t nv = n - n % 4;
  const __m256d vh = set1(h);
  const __m256d hh = set1(0.5 * h);
  const __m256d h6 = set1(h / 6.0);
  for (std::size_t i = 0; i < nv; i += 4) {
    V3 m{_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), _mm256_loadu_pd(z + i)};
    __m256d a = _mm256_setzero_pd();
    for (std::size_t s = 0; s < steps; ++s) {
      const V3 k1 = rhs(m);
      const V3 k2 = rhs(shift(m, hh, k1));
      const V3 k3 = rhs(shift(m, hh, k2));
      const V3 k4 = rhs(shift(m, vh, k3));
      const __m256d z0 = m.z;
      m.x = add(m.x, mul(h6, combine(k1.x, k2.x, k3.x, k4.x)));
      m.y = add(m.y, mul(h6, combine(k1.y, k2.y, k3.y, k4.y)));
      m.z = add(m.z, mul(h6, combine(k1.z, k2.z, k3.z, k4.z)));
      if (s >= burn) a = add(a, mul(hh, add(z0, m.z)));
    }
    _mm256_storeu_pd(x + i, m.x);
    _mm256_storeu_pd(y + i, m.y);
    _mm256_storeu_pd(z + i, m.z);
    _mm256_storeu_pd(acc + i, a);
  }
  return nv;
}

std::size_t sandwich_avx2(const SandwichParams& p, const double* x, const double* y, const double* z, double* gm,
                          double* k, double* gp, std::size_t n) {
  const std::size_t nv = n - n % 4;
  const __m256d one = set1(1.0);
  for (std::size_t i = 0; i < nv; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x + i), vy = _mm256_loadu_pd(y + i), vz = _mm256_loadu_pd(z + i);
    const __m256d xx = mul(vx, vx), yy = mul(vy, vy), zz = mul(vz, vz);
    const __m256d sq = add(add(xx, yy), zz);
    const __m256d g = _mm256_div_pd(mul(set1(0.5), sq), set1(p.c));
    const __m256d rho = _mm256_sqrt_pd(_mm256_div_pd(sq, set1(p.c)));
    const __m256d tau = step(mul(set1(0.5), sub(rho, set1(2.0))));
    const __m256d vgp = mul(set1(p.sigma), g);
    const __m256d F = p.ellipse ? add(add(mul(xx, set1(p.ia0)), mul(yy, set1(p.ia1))), mul(zz, set1(p.ia2))) : sq;
    const __m256d fF = cutoff_value(F, p);
    const __m256d fG = cutoff_value(g, p);
    const __m256d w = sub(one, tau);
    const __m256d tg = mul(tau, vgp);
    _mm256_storeu_pd(gm + i, add(mul(w, fG), tg));
    _mm256_storeu_pd(k + i, add(mul(w, fF), tg));
    _mm256_storeu_pd(gp + i, vgp);
  }
  return nv;
}

}  // namespace spherization::kernels
