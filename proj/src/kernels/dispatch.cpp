// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstdlib>
#include <string>

#include "kernels_impl.hpp"
#include "spherization/errors.hpp"
#include "spherization/starshape.hpp"

namespace spherization {

std::string_view simd_level_name(SimdLevel level) { return level == SimdLevel::Avx2 ? "avx2" : "scalar"; }

bool cpu_has_avx2() {
#if defined(__x86_64__) && defined(SPHERIZATION_HAVE_AVX2)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

SimdLevel active_simd_level() {
  if (const char* env = std::getenv("SPHERIZATION_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return SimdLevel::Scalar;
    if (v == "avx2") {
      if (!cpu_has_avx2()) throw config_error("SPHERIZATION_SIMD=avx2 but the CPU or build lacks AVX2");
      return SimdLevel::Avx2;
    }
    if (!v.empty() && v != "auto") throw config_error("SPHERIZATION_SIMD must be scalar, avx2 or auto");
  }
  return cpu_has_avx2() ? SimdLevel::Avx2 : SimdLevel::Scalar;
}

std::vector<double> euler_mz_average(EulerBatch& b, double h, std::size_t steps, std::size_t burn, SimdLevel level) {
  const std::size_t n = b.size();
  if (b.my.size() != n || b.mz.size() != n) throw config_error("Euler batch arrays differ in length");
  if (!(h > 0.0) || burn >= steps) throw config_error("Euler kernel needs h > 0 and burn-in shorter than the run");
  std::vector<double> acc(n, 0.0);
  std::size_t done = 0;
#ifdef SPHERIZATION_HAVE_AVX2
  if (level == SimdLevel::Avx2) done = kernels::euler_avx2(b.mx.data(), b.my.data(), b.mz.data(), acc.data(), n, h, steps, burn);
#else
  (void)level;
#endif
  for (std::size_t i = done; i < n; ++i) acc[i] = kernels::euler_lane(b.mx[i], b.my[i], b.mz[i], h, steps, burn);
  const double span = static_cast<double>(steps - burn) * h;
  for (double& a : acc) a = std::abs(a / span);
  return acc;
}

SandwichParams sandwich_params(const SandwichedHamiltonians& sw) {
  SandwichParams p;
  const RadialProfile& prof = sw.profile();
  if (prof.kind() == ProfileKind::Fourier) throw config_error("sandwich kernel covers round and ellipse profiles");
  p.ellipse = prof.kind() == ProfileKind::Ellipse;
  if (p.ellipse) {
    const Vec3& a = prof.axes();
    p.ia0 = 1.0 / (a.x() * a.x());
    p.ia1 = 1.0 / (a.y() * a.y());
    p.ia2 = 1.0 / (a.z() * a.z());
  }
  p.c = sw.c();
  p.sigma = sw.sigma();
  const double eps = sw.cutoff().eps();
  p.eps = eps;
  p.eps2 = eps * eps;
  p.width = eps - p.eps2;
  p.blend = sw.cutoff().blend_coefficient();
  return p;
}

void sandwich_batch(const SandwichParams& prm, std::span<const double> mx, std::span<const double> my,
                    std::span<const double> mz, std::span<double> gm, std::span<double> k, std::span<double> gp,
                    SimdLevel level) {
  const std::size_t n = mx.size();
  if (my.size() != n || mz.size() != n || gm.size() != n || k.size() != n || gp.size() != n)
    throw config_error("sandwich batch spans differ in length");
  std::size_t done = 0;
#ifdef SPHERIZATION_HAVE_AVX2
  if (level == SimdLevel::Avx2)
    done = kernels::sandwich_avx2(prm, mx.data(), my.data(), mz.data(), gm.data(), k.data(), gp.data(), n);
#else
  (void)level;
#endif
  for (std::size_t i = done; i < n; ++i) {
    const kernels::Triple t = kernels::sandwich_lane(prm, mx[i], my[i], mz[i]);
    gm[i] = t.gm;
    k[i] = t.k;
    gp[i] = t.gp;
  }
}

}  // namespace spherization
