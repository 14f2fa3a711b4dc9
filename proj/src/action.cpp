// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <limits>

#include "spherization/dynamics.hpp"
#include "spherization/errors.hpp"

namespace spherization {
namespace {

// p.q_dot - H in frame variables: p.q_dot = m.grad h, independent of q.
double lagrangian(const HamiltonianField& H, const Vec3& m) {
  return m.dot(H.gradient_frame(m)) - H.value_frame(m);
}

double simpson(const std::vector<double>& v, double dt, std::size_t stride) {
  const std::size_t n = (v.size() - 1) / stride;  // intervals
  double odd = 0.0, even = 0.0;
  for (std::size_t i = 1; i < n; ++i) (i % 2 ? odd : even) += v[i * stride];
  return dt * stride / 3.0 * (v.front() + v[n * stride] + 4.0 * odd + 2.0 * even);
}

}  // namespace

ActionEstimate action_quadrature(const Trajectory& traj, const HamiltonianField& H) {
  const std::size_t n = traj.times.size();
  if (n < 3 || (n - 1) % 2 != 0)
    throw config_error("action quadrature needs an even number (>= 2) of sample intervals");
  const double dt = (traj.times.back() - traj.times.front()) / static_cast<double>(n - 1);
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(traj.times[i] - traj.times[i - 1] - dt) > 1e-9 * dt)
      throw config_error("action quadrature needs a uniform output grid");
  }
  std::vector<double> L(n);
  for (std::size_t i = 0; i < n; ++i) L[i] = lagrangian(H, traj.frame[i]);
  ActionEstimate a{simpson(L, dt, 1), std::numeric_limits<double>::quiet_NaN()};
  if ((n - 1) % 4 == 0) a.halved = simpson(L, dt, 2);
  return a;
}

double action_of_trajectory(const Trajectory& traj, const HamiltonianField& H) {
  return action_quadrature(traj, H).value;
}

ScalingCheck verify_scaling_law(const HamiltonianField& H, const Trajectory& chord, double c,
                                const IntegratorConfig& cfg) {
  if (!(c > 0.0)) throw config_error("scaling factor must be positive");
  if (!H.hamiltonian().homogeneous_deg2()) throw config_error("scaling law needs a degree-2 homogeneous Hamiltonian");
  if (chord.times.size() < 3) throw config_error("chord has too few samples");
  const HamiltonianField cH = H.scaled(c);
  const double T = chord.times.back() - chord.times.front();
  IntegratorConfig ccfg = cfg;
  ccfg.output_dt = T / static_cast<double>(chord.times.size() - 1);
  CotangentPoint x0 = chord.states.front();
  x0.p /= c;
  const Trajectory tc = integrate(cH, x0, T, ccfg);
  double residual = 0.0;
  for (std::size_t i = 0; i < chord.states.size(); ++i) {
    const double dq = (tc.states[i].q - chord.states[i].q).norm();
    const double dm = (tc.frame[i] - chord.frame[i] / c).norm();
    residual = std::max(residual, dq + dm);
  }
  if (residual > 1e-6) throw invariant_error("rescaled chord does not solve the cH equations");
  const double a = action_of_trajectory(chord, H);
  const double ac = action_of_trajectory(tc, cH);
  if (a == 0.0) return {std::abs(ac), residual};
  return {std::abs(ac - a / c) / std::abs(a), residual};
}

ChordClassification classify_chord_action(const Trajectory& chord, const SandwichedHamiltonians& sw,
                                          const ModelManifold& M, int n, double band) {
  if (n < 1) throw config_error("chord multiplicity n must be positive");
  ChordClassification out{ChordClass::BoundaryAmbiguous, 0.0, std::numeric_limits<double>::infinity(),
                          -std::numeric_limits<double>::infinity()};
  for (const Vec3& m : chord.frame) {
    const double F = sw.F(m);
    out.F_min = std::min(out.F_min, F);
    out.F_max = std::max(out.F_max, F);
  }
  const auto sp = std::make_shared<SandwichedHamiltonians>(sw);
  const HamiltonianField nK(M, std::make_shared<SandwichHamiltonian>(sp, SandwichRole::K), n);
  out.action = action_of_trajectory(chord, nK);
  if (out.F_max < 1.0 - band) {
    out.cls = ChordClass::Inside;
    if (!(out.action < n)) throw invariant_error("chord inside D(Sigma) has action >= n");
  } else if (out.F_min > 1.0 + band) {
    out.cls = ChordClass::Outside;
    if (!(out.action > n)) throw invariant_error("chord outside D(Sigma) has action <= n");
  }
  return out;
}

double time_change_residual(const SandwichedHamiltonians& sw, const ModelManifold& M,
                            const CotangentPoint& x_on_sigma, double s) {
  if (!(s > 0.0 && s <= 1.0)) throw config_error("time change scale s must lie in (0, 1]");
  const double F = F_value(sw.profile(), M, x_on_sigma);
  if (std::abs(F - 1.0) > 1e-9) throw config_error("time change base point is not on Sigma");
  const auto sp = std::make_shared<SandwichedHamiltonians>(sw);
  const HamiltonianField fF(M, std::make_shared<SandwichHamiltonian>(sp, SandwichRole::FofF));
  CotangentPoint xs = x_on_sigma;
  xs.p *= s;
  const PhaseVelocity lhs = hamiltonian_vector_field(fF, xs);
  const PhaseVelocity base = hamiltonian_vector_field(fF, x_on_sigma);
  const double sig = sw.cutoff().eval(s * s).derivative * s;
  // dpsi_s keeps the base component and scales the fiber component by s.
  const Vec3 rq = lhs.q_dot - sig * base.q_dot;
  const Vec3 rp = lhs.p_dot - sig * s * base.p_dot;
  return std::sqrt(rq.squaredNorm() + rp.squaredNorm());
}

}  // namespace spherization
