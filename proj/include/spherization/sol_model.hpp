// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "spherization/dynamics.hpp"

namespace spherization {

/// Left-invariant momenta (M_x, M_y, M_z).
using EulerState = Vec3;

struct SolLevel {
  double k;
  ModelManifold manifold;

  SolLevel(double k, ModelManifold manifold);
  /// The level sphere encloses the fiber origin.
  bool starshaped() const { return k > 0.5; }
};

EulerState momentum_map(const CotangentPoint& x);
CotangentPoint inverse_momentum_map(const BasePoint& q, const EulerState& M);

/// 1/2 [e^{2z}(p_x + e^{-z})^2 + e^{-2z} p_y^2 + p_z^2].
double sol_hamiltonian(const CotangentPoint& x);

/// (M_x M_z, -M_y M_z, M_y^2 - M_x (M_x + 1)).
EulerState euler_field(const EulerState& M);

/// Distance from the fiber origin to the level sphere centred at (-1, 0, 0).
double level_origin_gap(double k);

/// Supercritical fixed point p_+ = (0, 0, sqrt(2k - 1)); requires k >= 1/2.
EulerState fixed_point_plus(double k);

double entropy_closed_form(double k);

struct LyapunovEstimate {
  double value;
  double window_start;
  /// |running average of M_z| at ten evenly spaced checkpoints of the window.
  std::vector<double> partial;
};

/// |time average of M_z| over the post-burn-in part of the samples (trapezoid).
LyapunovEstimate lyapunov_from_samples(const std::vector<double>& times, const std::vector<double>& Mz,
                                       double burn_in_fraction = 0.1);
LyapunovEstimate lyapunov_plus(const Trajectory& traj, double burn_in_fraction = 0.1);

HamiltonianField sol_field(const ModelManifold& M);

/// Uniform point on the momentum sphere of level k at a uniform base point of
/// the fundamental domain. `u` holds five uniforms in [0, 1).
CotangentPoint sample_level_point(const ModelManifold& M, double k, const std::array<double, 5>& u);

/// Deterministic draw of `count` level points from a seed.
std::vector<CotangentPoint> sample_level(const ModelManifold& M, double k, std::size_t count, std::uint64_t seed);

/// chi_+ for each point, by integrating the full field over [0, T].
std::vector<LyapunovEstimate> lyapunov_ensemble(const ModelManifold& M, const std::vector<CotangentPoint>& starts,
                                                double T, const IntegratorConfig& cfg, double burn_in_fraction,
                                                int workers);

}  // namespace spherization
