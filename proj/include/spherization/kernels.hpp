// SPDX-License-Identifier: Apache-2.0
#pragma once

// Batched kernels with a scalar reference path and an AVX2 path. Both paths
// perform the same operations in the same order (no FMA contraction), so their
// outputs agree bit for bit; the tests hold them to that.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace spherization {

class SandwichedHamiltonians;

enum class SimdLevel { Scalar, Avx2 };

std::string_view simd_level_name(SimdLevel level);
bool cpu_has_avx2();
/// Best supported level, unless SPHERIZATION_SIMD=scalar|avx2 overrides it.
SimdLevel active_simd_level();

/// Structure-of-arrays Euler states (M_x, M_y, M_z).
struct EulerBatch {
  std::vector<double> mx, my, mz;
  std::size_t size() const { return mx.size(); }
};

/// Classical RK4 on the reduced Sol field with step h for `steps` steps. Each
/// lane returns |mean of M_z| over the steps after `burn_steps` (trapezoid).
/// The batch is advanced in place.
std::vector<double> euler_mz_average(EulerBatch& batch, double h, std::size_t steps, std::size_t burn_steps,
                                     SimdLevel level);

/// Flat parameters of a round or ellipse sandwich.
struct SandwichParams {
  bool ellipse = false;
  double ia0 = 1.0, ia1 = 1.0, ia2 = 1.0;  // inverse squared axes
  double c = 1.0, sigma = 1.0;
  double eps2 = 0.0, eps = 0.0, width = 0.0, blend = 0.0;
};

/// Throws for profiles the kernel does not cover (Fourier).
SandwichParams sandwich_params(const SandwichedHamiltonians& sw);

/// (G_-, K, G_+) at frame covectors m, matching SandwichedHamiltonians::eval.
void sandwich_batch(const SandwichParams& prm, std::span<const double> mx, std::span<const double> my,
                    std::span<const double> mz, std::span<double> g_minus, std::span<double> k,
                    std::span<double> g_plus, SimdLevel level);

}  // namespace spherization
