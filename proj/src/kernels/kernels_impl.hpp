// SPDX-License-Identifier: Apache-2.0
#pragma once

// Per-lane reference arithmetic. The AVX2 file mirrors these expressions
// operation by operation; the scalar path also handles AVX2 tails.

#include <cmath>
#include <cstddef>

#include "spherization/kernels.hpp"
#include "spherization/smooth.hpp"

namespace spherization::kernels {

struct EulerLane {
  double x, y, z;
};

inline EulerLane euler_rhs(const EulerLane& m) {
  return {m.x * m.z, -(m.y * m.z), m.y * m.y - m.x * (m.x + 1.0)};
}

inline EulerLane euler_shift(const EulerLane& m, double h, const EulerLane& k) {
  return {m.x + h * k.x, m.y + h * k.y, m.z + h * k.z};
}

/// Advances one lane and returns the accumulated M_z integral after burn-in.
inline double euler_lane(double& x, double& y, double& z, double h, std::size_t steps, std::size_t burn) {
  const double hh = 0.5 * h;
  const double h6 = h / 6.0;
  EulerLane m{x, y, z};
  double acc = 0.0;
  for (std::size_t s = 0; s < steps; ++s) {
    const EulerLane k1 = euler_rhs(m);
    const EulerLane k2 = euler_rhs(euler_shift(m, hh, k1));
    const EulerLane k3 = euler_rhs(euler_shift(m, hh, k2));
    const EulerLane k4 = euler_rhs(euler_shift(m, h, k3));
    const double z0 = m.z;
    m.x = m.x + h6 * (((k1.x + 2.0 * k2.x) + 2.0 * k3.x) + k4.x);
    m.y = m.y + h6 * (((k1.y + 2.0 * k2.y) + 2.0 * k3.y) + k4.y);
    m.z = m.z + h6 * (((k1.z + 2.0 * k2.z) + 2.0 * k3.z) + k4.z);
    if (s >= burn) acc = acc + hh * (z0 + m.z);
  }
  x = m.x;
  y = m.y;
  z = m.z;
  return acc;
}

struct Triple {
  double gm, k, gp;
};

inline Triple sandwich_lane(const SandwichParams& p, double x, double y, double z) {
  const double sq = x * x + y * y + z * z;
  const double g = 0.5 * sq / p.c;
  const double rho = std::sqrt(sq / p.c);
  const double tau = smooth::step(0.5 * (rho - 2.0));
  const double gp = p.sigma * g;
  const double F = p.ellipse ? x * x * p.ia0 + y * y * p.ia1 + z * z * p.ia2 : sq;
  const double fF = smooth::cutoff_value(F, p.eps2, p.eps, p.width, p.blend);
  const double fG = smooth::cutoff_value(g, p.eps2, p.eps, p.width, p.blend);
  return {(1.0 - tau) * fG + tau * gp, (1.0 - tau) * fF + tau * gp, gp};
}

// AVX2 entry points, defined in kernels_avx2.cpp. They process the largest
// multiple of 4 lanes and return how many they handled.
std::size_t euler_avx2(double* x, double* y, double* z, double* acc, std::size_t n, double h, std::size_t steps,
                       std::size_t burn);
std::size_t sandwich_avx2(const SandwichParams& p, const double* x, const double* y, const double* z, double* gm,
                          double* k, double* gp, std::size_t n);

}  // namespace spherization::kernels
