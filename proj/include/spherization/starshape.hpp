// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "spherization/geometry.hpp"
#include "spherization/smooth.hpp"

namespace spherization {

enum class ProfileKind { Round, Ellipse, Fourier };

/// Radial profile r(u) of a fiberwise starshaped hypersurface, given in the
/// orthonormal coframe. The profiles shipped here do not depend on the base
/// point; the base point enters F only through the frame.
class RadialProfile {
 public:
  static RadialProfile round(int dim);
  static RadialProfile ellipse(const Vec3& axes, int dim);
  /// r(theta) = c0 + sum_k (a_k cos k theta + b_k sin k theta), planar fibers only.
  static RadialProfile fourier(double c0, std::vector<double> cos_coeffs, std::vector<double> sin_coeffs);

  ProfileKind kind() const { return kind_; }
  int dim() const { return dim_; }
  const Vec3& axes() const { return axes_; }

  /// r at a unit frame direction.
  double radius(const Vec3& u) const;

  /// F in frame components: (|m| / r(m/|m|))^2, degree-2 homogeneous.
  double F(const Vec3& m) const;
  Vec3 F_gradient(const Vec3& m) const;

  /// Unit frame directions used for calibration and validity checks.
  std::vector<Vec3> sample_directions(int count) const;
  /// Minimum of r over sampled directions; throws if non-positive.
  double sampled_min_radius(int count = 4096) const;

 private:
  double fourier_r(double theta) const;
  double fourier_dr(double theta) const;

  ProfileKind kind_ = ProfileKind::Round;
  int dim_ = 2;
  Vec3 axes_ = Vec3::Ones();
  Vec3 inv_axes_sq_ = Vec3::Ones();
  double c0_ = 1.0;
  std::vector<double> cos_;
  std::vector<double> sin_;
};

double F_value(const RadialProfile& profile, const ModelManifold& M, const CotangentPoint& x);

/// Smoothing f with f = 0 on [0, eps^2], f = r on [eps, inf), 0 <= f' <= 2.
///
/// On the blend interval f' = S(t) + c B(t) with t = (r - eps^2)/(eps - eps^2),
/// S the quintic smoothstep and B = 30 t^2 (1-t)^2; c = 1/(1-eps) - 1/2 makes
/// f reach eps at r = eps. f is C^2.
class CutoffF {
 public:
  explicit CutoffF(double eps);

  double eps() const { return eps_; }

  struct Eval {
    double value;
    double derivative;
  };
  Eval eval(double r) const;
  double second_derivative(double r) const;

  /// max f' over an n-point grid of [0, 2 eps].
  double max_derivative_on_grid(int n = 10000) const;

  double blend_coefficient() const { return c_; }

 private:
  double eps_;
  double eps2_;
  double width_;
  double c_;
};

inline double tau_step(double r) { return smooth::step(0.5 * (r - 2.0)); }

struct Calibration {
  double c = 1.0;      // metric rescale: G = |m|^2 / (2c)
  double sigma = 1.0;  // sigma G >= F
  double r_min = 1.0;
  double r_max = 1.0;
};

/// Rescale c so G <= F and sigma with sigma G >= F, from direction sampling.
Calibration calibrate(const RadialProfile& profile, const ModelManifold& M, double safety = 1.1,
                      int directions = 4096);

struct SandwichTriple {
  double g_minus;
  double k;
  double g_plus;
};

/// G_- <= K <= G_+ built from a calibrated profile; all functions of the frame
/// covector m.
class SandwichedHamiltonians {
 public:
  /// Shrinks eps (halving) until eps^2 < 1/(2 sigma) and f' <= 2 on the grid.
  SandwichedHamiltonians(RadialProfile profile, const Calibration& cal, double eps);

  const RadialProfile& profile() const { return profile_; }
  const CutoffF& cutoff() const { return cutoff_; }
  double c() const { return cal_.c; }
  double sigma() const { return cal_.sigma; }
  const Calibration& calibration() const { return cal_; }
  int eps_halvings() const { return halvings_; }

  double G(const Vec3& m) const { return 0.5 * m.squaredNorm() / cal_.c; }
  /// |p| for the rescaled metric.
  double norm(const Vec3& m) const { return std::sqrt(m.squaredNorm() / cal_.c); }
  double F(const Vec3& m) const { return profile_.F(m); }

  SandwichTriple eval(const Vec3& m) const;
  double G_s(double s, const Vec3& m) const;

  // Gradients with respect to m.
  Vec3 grad_G(const Vec3& m) const { return m / cal_.c; }
  Vec3 grad_f_of_F(const Vec3& m) const;
  Vec3 grad_K(const Vec3& m) const;
  Vec3 grad_G_minus(const Vec3& m) const;
  Vec3 grad_G_plus(const Vec3& m) const { return cal_.sigma * grad_G(m); }
  Vec3 grad_G_s(double s, const Vec3& m) const;

 private:
  Vec3 grad_blend(const Vec3& m, double inner, const Vec3& grad_inner) const;

  RadialProfile profile_;
  Calibration cal_;
  CutoffF cutoff_;
  int halvings_ = 0;
};

SandwichTriple sandwich_eval(const SandwichedHamiltonians& s, const ModelManifold& M, const CotangentPoint& x);

struct HomotopyValue {
  double g_s;
  double a_s;
};

/// G_s = (1 - beta(t)) G_- + beta(t) G_+ and window a(t) = a / (1 + beta(t)(sigma - 1)).
HomotopyValue homotopy_eval(const SandwichedHamiltonians& s, const ModelManifold& M, double t,
                            const CotangentPoint& x, double a);

inline double beta_step(double s) { return smooth::step(s); }

}  // namespace spherization
