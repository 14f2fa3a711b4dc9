// SPDX-License-Identifier: Apache-2.0
#pragma once

// Scalar primitives shared by the reference code paths and the batched
// kernels. Each function fixes its operation order so that the SIMD kernels
// can reproduce it bit for bit.

namespace spherization::smooth {

/// Quintic smoothstep S(t) = 6t^5 - 15t^4 + 10t^3, clamped to [0, 1].
inline double step(double t) {
  const double c = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
  return c * c * c * (c * (c * 6.0 - 15.0) + 10.0);
}

inline double step_d1(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double u = t * (1.0 - t);
  return 30.0 * u * u;
}

inline double step_d2(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
}

/// Antiderivative of step on [0, 1]: t^6 - 3t^5 + 2.5t^4.
inline double step_integral(double t) {
  const double c = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
  return c * c * c * c * (c * (c - 3.0) + 2.5);
}

}  // namespace spherization::smooth

namespace spherization::smooth {

/// Cutoff value f(r) given eps^2, eps, width = eps - eps^2 and blend weight c.
inline double cutoff_value(double r, double eps2, double eps, double width, double c) {
  const double t = (r - eps2) / width;
  const double blend = width * (step_integral(t) + c * step(t));
  return r >= eps ? r : (r <= eps2 ? 0.0 : blend);
}

inline double cutoff_derivative(double r, double eps2, double eps, double width, double c) {
  const double t = (r - eps2) / width;
  const double blend = step(t) + c * step_d1(t);
  return r >= eps ? 1.0 : (r <= eps2 ? 0.0 : blend);
}

}  // namespace spherization::smooth
