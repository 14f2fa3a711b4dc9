// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "spherization/geometry.hpp"
#include "spherization/starshape.hpp"

namespace spherization {

/// A Hamiltonian written as a function h(m) of the frame covector m = E(q) p.
/// Every Hamiltonian in the lab has this form: the torus frame is the
/// coordinate coframe, and on Sol the frame components are the left-invariant
/// momenta, so h does not depend on q separately.
class FrameHamiltonian {
 public:
  virtual ~FrameHamiltonian() = default;
  virtual double value(const Vec3& m) const = 0;
  virtual Vec3 gradient(const Vec3& m) const = 0;
  virtual std::string name() const = 0;
  /// True when h(s m) = s^2 h(m) for s > 0.
  virtual bool homogeneous_deg2() const { return false; }
};

using FrameHamiltonianPtr = std::shared_ptr<const FrameHamiltonian>;

class ZeroHamiltonian final : public FrameHamiltonian {
 public:
  double value(const Vec3&) const override { return 0.0; }
  Vec3 gradient(const Vec3&) const override { return Vec3::Zero(); }
  std::string name() const override { return "zero"; }
  bool homogeneous_deg2() const override { return true; }
};

/// |m|^2 / (2c).
class KineticHamiltonian final : public FrameHamiltonian {
 public:
  explicit KineticHamiltonian(double c = 1.0) : c_(c) {}
  double value(const Vec3& m) const override { return 0.5 * m.squaredNorm() / c_; }
  Vec3 gradient(const Vec3& m) const override { return m / c_; }
  std::string name() const override { return "kinetic"; }
  bool homogeneous_deg2() const override { return true; }

 private:
  double c_;
};

/// factor * F for a radial profile. With factor 1/2 the level {H = 1/2} is Sigma
/// and the flow on it is the Reeb flow of the Liouville form.
class ProfileHamiltonian final : public FrameHamiltonian {
 public:
  ProfileHamiltonian(RadialProfile profile, double factor = 1.0)
      : profile_(std::move(profile)), factor_(factor) {}
  double value(const Vec3& m) const override { return factor_ * profile_.F(m); }
  Vec3 gradient(const Vec3& m) const override { return factor_ * profile_.F_gradient(m); }
  std::string name() const override { return "profile"; }
  bool homogeneous_deg2() const override { return true; }

 private:
  RadialProfile profile_;
  double factor_;
};

/// The magnetic Hamiltonian of the Sol example, 1/2 |m + e_1|^2.
class SolMagneticHamiltonian final : public FrameHamiltonian {
 public:
  double value(const Vec3& m) const override;
  Vec3 gradient(const Vec3& m) const override;
  std::string name() const override { return "sol-magnetic"; }
};

enum class SandwichRole { G, GMinus, K, GPlus, Gs, FofF };

/// One member of the sandwich family; `s` is the homotopy parameter for Gs.
class SandwichHamiltonian final : public FrameHamiltonian {
 public:
  SandwichHamiltonian(std::shared_ptr<const SandwichedHamiltonians> sw, SandwichRole role,
                      double s = 0.0)
      : sw_(std::move(sw)), role_(role), s_(s) {}
  double value(const Vec3& m) const override;
  Vec3 gradient(const Vec3& m) const override;
  std::string name() const override;
  bool homogeneous_deg2() const override { return role_ == SandwichRole::G; }
  const SandwichedHamiltonians& sandwich() const { return *sw_; }
  SandwichRole role() const { return role_; }

 private:
  std::shared_ptr<const SandwichedHamiltonians> sw_;
  SandwichRole role_;
  double s_;
};

/// Phase-space state in frame variables (q, m), the integration coordinates.
using FrameState = std::array<double, 6>;

struct PhaseVelocity {
  Vec3 q_dot;
  Vec3 p_dot;
};

/// scale * h on T*M. Scaling by n realizes nH without changing h.
class HamiltonianField {
 public:
  HamiltonianField(ModelManifold manifold, FrameHamiltonianPtr h, double scale = 1.0);

  const ModelManifold& manifold() const { return manifold_; }
  const FrameHamiltonian& hamiltonian() const { return *h_; }
  FrameHamiltonianPtr hamiltonian_ptr() const { return h_; }
  double scale() const { return scale_; }
  HamiltonianField scaled(double factor) const { return {manifold_, h_, scale_ * factor}; }

  double value(const CotangentPoint& x) const { return scale_ * h_->value(manifold_.to_frame(x)); }
  double value_frame(const Vec3& m) const { return scale_ * h_->value(m); }
  Vec3 gradient_frame(const Vec3& m) const { return scale_ * h_->gradient(m); }
  /// (dH/dq, dH/dp) in canonical coordinates.
  std::pair<Vec3, Vec3> gradient(const CotangentPoint& x) const;

  /// Right-hand side in frame variables.
  FrameState frame_rhs(const FrameState& y) const;

  FrameState to_state(const CotangentPoint& x) const;
  CotangentPoint from_state(const FrameState& y) const;

 private:
  ModelManifold manifold_;
  FrameHamiltonianPtr h_;
  double scale_;
};

/// q_dot = dH/dp, p_dot = -dH/dq, the convention under which 1/2|p|^2 generates
/// the geodesic flow forward in time.
PhaseVelocity hamiltonian_vector_field(const HamiltonianField& H, const CotangentPoint& x);

/// Max relative error between the analytic canonical gradient and central
/// differences with step `h`, over the given points.
double gradient_check(const HamiltonianField& H, std::span<const CotangentPoint> points, double h = 1e-6);

enum class Scheme { DormandPrince45, ImplicitMidpoint };

struct IntegratorConfig {
  Scheme scheme = Scheme::DormandPrince45;
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  double max_step = 0.1;
  /// Relative energy drift bound; exceeded drift is an integration failure.
  double drift_abort = 1e-6;
  /// Output spacing. 0 records every accepted step.
  double output_dt = 0.0;
  /// Step of the implicit midpoint scheme.
  double fixed_step = 0.01;
  double min_step = 1e-12;
  std::size_t max_steps = 200'000'000;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<CotangentPoint> states;
  /// Frame covectors alongside the states (on Sol these are the momenta M).
  std::vector<Vec3> frame;
  double energy_drift = 0.0;
  std::size_t steps = 0;
  std::size_t rejections = 0;
};

Trajectory integrate(const HamiltonianField& H, const CotangentPoint& x0, double T,
                     const IntegratorConfig& cfg = {});

/// Flow map over [t0, t1] without output. `steps_out`, when given, receives the
/// accepted step sizes so the same discrete map can be replayed.
FrameState flow(const HamiltonianField& H, const FrameState& y0, double duration,
                const IntegratorConfig& cfg = {}, std::vector<double>* steps_out = nullptr);

/// Replays a recorded step sequence with the same scheme. The result is a
/// smooth function of y0, which is what finite-difference Jacobians need.
FrameState flow_frozen(const HamiltonianField& H, const FrameState& y0, std::span<const double> steps,
                       Scheme scheme = Scheme::DormandPrince45);

struct ActionEstimate {
  double value;
  /// The same quadrature on every other sample; NaN when the grid is too short.
  double halved;
};

/// Integral of p.q_dot - H along the samples by composite Simpson. Requires a
/// uniform grid with an even number of intervals.
ActionEstimate action_quadrature(const Trajectory& traj, const HamiltonianField& H);
double action_of_trajectory(const Trajectory& traj, const HamiltonianField& H);

/// 2 h'(H) H - h(H).
inline double action_homogeneous(double h_prime, double h_val, double H_val) {
  return 2.0 * h_prime * H_val - h_val;
}

struct ScalingCheck {
  double relative_error;
  /// max deviation of the re-integrated cH orbit from the rescaled chord.
  double chord_residual;
};

/// Lemma check S(cH) = S(H)/c on one chord of a degree-2 homogeneous H.
ScalingCheck verify_scaling_law(const HamiltonianField& H, const Trajectory& chord, double c,
                                const IntegratorConfig& cfg = {});

enum class ChordClass { Inside, Outside, BoundaryAmbiguous };

struct ChordClassification {
  ChordClass cls;
  double action;
  double F_min;
  double F_max;
};

/// Classifies a chord of nK by the range of F along it and asserts the matching
/// action inequality (throws invariant_error on violation).
ChordClassification classify_chord_action(const Trajectory& chord, const SandwichedHamiltonians& sw,
                                          const ModelManifold& M, int n, double band = 1e-6);

/// Norm of X_{f o F}(q, s p) - sigma(s) dpsi_s X_{f o F}(q, p) for F(q,p) = 1,
/// sigma(s) = f'(s^2) s.
double time_change_residual(const SandwichedHamiltonians& sw, const ModelManifold& M,
                            const CotangentPoint& x_on_sigma, double s);

struct FiberChord {
  Vec3 p0;
  DeckElement deck;
  Trajectory traj;
  double residual = 0.0;
};

struct FiberChordOptions {
  double duration = 1.0;
  /// Search disc |m| <= p_max in the frame fiber over q0.
  double p_max = 5.0;
  int radial = 200;
  int angular = 256;
  double barycentric_slack = 0.25;
  double newton_tol = 1e-10;
  int newton_max_iter = 40;
  double dedup_radius = 1e-7;
  /// Samples of the returned trajectories; a multiple of 4 for the halved-grid check.
  int output_intervals = 256;
  int workers = 1;
  IntegratorConfig integrator{};
};

/// Time-`duration` orbits of H from the fiber over q0 to lifts of q1, found by
/// shooting over a polar grid of planar fibers (torus only) and Newton
/// refinement in p. Sorted by |p0|, then by deck element.
std::vector<FiberChord> fiber_chords(const HamiltonianField& H, const BasePoint& q0, const BasePoint& q1,
                                     const FiberChordOptions& opt);

}  // namespace spherization
