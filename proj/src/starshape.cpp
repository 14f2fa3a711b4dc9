// SPDX-License-Identifier: Apache-2.0
#include "spherization/starshape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "spherization/errors.hpp"
#include "spherization/smooth.hpp"

namespace spherization {

RadialProfile RadialProfile::round(int dim) {
  RadialProfile p;
  p.kind_ = ProfileKind::Round;
  p.dim_ = dim;
  return p;
}

RadialProfile RadialProfile::ellipse(const Vec3& axes, int dim) {
  RadialProfile p;
  p.kind_ = ProfileKind::Ellipse;
  p.dim_ = dim;
  p.axes_ = axes;
  if (dim == 2) p.axes_.z() = 1.0;
  for (int i = 0; i < dim; ++i) {
    if (!(p.axes_(i) > 0.0)) throw config_error("ellipse axes must be positive");
  }
  p.inv_axes_sq_ = p.axes_.cwiseProduct(p.axes_).cwiseInverse();
  return p;
}

RadialProfile RadialProfile::fourier(double c0, std::vector<double> cos_coeffs, std::vector<double> sin_coeffs) {
  RadialProfile p;
  p.kind_ = ProfileKind::Fourier;
  p.dim_ = 2;
  p.c0_ = c0;
  p.cos_ = std::move(cos_coeffs);
  p.sin_ = std::move(sin_coeffs);
  p.sampled_min_radius();
  return p;
}

double RadialProfile::fourier_r(double theta) const {
  double r = c0_;
  for (std::size_t k = 0; k < cos_.size(); ++k) r += cos_[k] * std::cos(static_cast<double>(k + 1) * theta);
  for (std::size_t k = 0; k < sin_.size(); ++k) r += sin_[k] * std::sin(static_cast<double>(k + 1) * theta);
  return r;
}

double RadialProfile::fourier_dr(double theta) const {
  double d = 0.0;
  for (std::size_t k = 0; k < cos_.size(); ++k) {
    const double kk = static_cast<double>(k + 1);
    d -= kk * cos_[k] * std::sin(kk * theta);
  }
  for (std::size_t k = 0; k < sin_.size(); ++k) {
    const double kk = static_cast<double>(k + 1);
    d += kk * sin_[k] * std::cos(kk * theta);
  }
  return d;
}

double RadialProfile::radius(const Vec3& u) const {
  switch (kind_) {
    case ProfileKind::Round:
      return 1.0;
    case ProfileKind::Ellipse:
      return 1.0 / std::sqrt(u.x() * u.x() * inv_axes_sq_.x() + u.y() * u.y() * inv_axes_sq_.y() +
                             u.z() * u.z() * inv_axes_sq_.z());
    case ProfileKind::Fourier:
      return fourier_r(std::atan2(u.y(), u.x()));
  }
  return 1.0;
}

double RadialProfile::F(const Vec3& m) const {
  switch (kind_) {
    case ProfileKind::Round:
      return m.x() * m.x() + m.y() * m.y() + m.z() * m.z();
    case ProfileKind::Ellipse:
      return m.x() * m.x() * inv_axes_sq_.x() + m.y() * m.y() * inv_axes_sq_.y() +
             m.z() * m.z() * inv_axes_sq_.z();
    case ProfileKind::Fourier: {
      const double rho2 = m.x() * m.x() + m.y() * m.y();
      if (rho2 == 0.0) return 0.0;
      const double r = fourier_r(std::atan2(m.y(), m.x()));
      return rho2 / (r * r);
    }
  }
  return 0.0;
}

Vec3 RadialProfile::F_gradient(const Vec3& m) const {
  switch (kind_) {
    case ProfileKind::Round:
      return 2.0 * m;
    case ProfileKind::Ellipse:
      return 2.0 * m.cwiseProduct(inv_axes_sq_);
    case ProfileKind::Fourier: {
      const double rho2 = m.x() * m.x() + m.y() * m.y();
      if (rho2 == 0.0) return Vec3::Zero();
      const double th = std::atan2(m.y(), m.x());
      const double r = fourier_r(th);
      const double dr = fourier_dr(th);
      const double a = 2.0 / (r * r);
      const double b = 2.0 * dr / (r * r * r);
      return Vec3(a * m.x() + b * m.y(), a * m.y() - b * m.x(), 0.0);
    }
  }
  return Vec3::Zero();
}

std::vector<Vec3> RadialProfile::sample_directions(int count) const {
  std::vector<Vec3> dirs;
  dirs.reserve(static_cast<std::size_t>(count) + 6);
  if (dim_ == 2) {
    for (int i = 0; i < count; ++i) {
      const double th = 2.0 * std::numbers::pi * i / count;
      dirs.emplace_back(std::cos(th), std::sin(th), 0.0);
    }
    return dirs;
  }
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / count;
    const double rr = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double th = golden * i;
    dirs.emplace_back(rr * std::cos(th), rr * std::sin(th), z);
  }
  for (int k = 0; k < 3; ++k) {
    Vec3 e = Vec3::Zero();
    e(k) = 1.0;
    dirs.push_back(e);
    dirs.push_back(-e);
  }
  return dirs;
}

double RadialProfile::sampled_min_radius(int count) const {
  double rmin = std::numeric_limits<double>::infinity();
  for (const Vec3& u : sample_directions(count)) rmin = std::min(rmin, radius(u));
  if (!(rmin > 0.0)) throw config_error("radial profile is not positive on all sampled directions");
  return rmin;
}

double F_value(const RadialProfile& profile, const ModelManifold& M, const CotangentPoint& x) {
  return profile.F(M.to_frame(x));
}

CutoffF::CutoffF(double eps) : eps_(eps) {
  if (!(eps > 0.0 && eps < 0.25)) throw config_error("cutoff eps must lie in (0, 1/4)");
  eps2_ = eps * eps;
  width_ = eps - eps2_;
  c_ = 1.0 / (1.0 - eps) - 0.5;
}

CutoffF::Eval CutoffF::eval(double r) const {
  return {smooth::cutoff_value(r, eps2_, eps_, width_, c_), smooth::cutoff_derivative(r, eps2_, eps_, width_, c_)};
}

double CutoffF::second_derivative(double r) const {
  if (r <= eps2_ || r >= eps_) return 0.0;
  const double t = (r - eps2_) / width_;
  return (smooth::step_d1(t) + c_ * smooth::step_d2(t)) / width_;
}

double CutoffF::max_derivative_on_grid(int n) const {
  double best = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = 2.0 * eps_ * i / (n - 1);
    best = std::max(best, eval(r).derivative);
  }
  return best;
}

namespace {

// Golden-section polish of an extremum of r(theta) near theta0.
double polish_fourier_extremum(const RadialProfile& p, double theta0, double half_width, bool maximize) {
  auto val = [&](double th) {
    const double r = p.radius(Vec3(std::cos(th), std::sin(th), 0.0));
    return maximize ? -r : r;
  };
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = theta0 - half_width;
  double b = theta0 + half_width;
  double x1 = b - g * (b - a);
  double x2 = a + g * (b - a);
  double f1 = val(x1);
  double f2 = val(x2);
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = val(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = val(x2);
    }
  }
  const double r = val(0.5 * (a + b));
  return maximize ? -r : r;
}

}  // namespace

Calibration calibrate(const RadialProfile& profile, const ModelManifold& M, double safety, int directions) {
  if (!(safety >= 1.0)) throw config_error("calibration safety factor must be >= 1");
  if (profile.dim() != M.dim()) throw config_error("profile dimension does not match the manifold");
  // r is a function of the frame direction alone, so sampling frame directions
  // covers every base point at once.
  const auto dirs = profile.sample_directions(directions);
  double rmin = std::numeric_limits<double>::infinity();
  double rmax = 0.0;
  std::size_t imin = 0, imax = 0;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const double r = profile.radius(dirs[i]);
    if (!(r > 0.0) || !std::isfinite(r)) throw config_error("calibration: radial profile is not positive");
    if (r < rmin) {
      rmin = r;
      imin = i;
    }
    if (r > rmax) {
      rmax = r;
      imax = i;
    }
  }
  if (profile.kind() == ProfileKind::Fourier) {
    const double hw = 2.0 * std::numbers::pi / directions;
    rmin = std::min(rmin, polish_fourier_extremum(profile, std::atan2(dirs[imin].y(), dirs[imin].x()), hw, false));
    rmax = std::max(rmax, polish_fourier_extremum(profile, std::atan2(dirs[imax].y(), dirs[imax].x()), hw, true));
    if (!(rmin > 0.0)) throw config_error("calibration: radial profile is not positive");
  }
  Calibration cal;
  cal.r_min = rmin;
  cal.r_max = rmax;
  cal.c = std::max(1.0, 0.5 * rmax * rmax);
  cal.sigma = std::max(1.0, safety * 2.0 * cal.c / (rmin * rmin));
  return cal;
}

SandwichedHamiltonians::SandwichedHamiltonians(RadialProfile profile, const Calibration& cal, double eps)
    : profile_(std::move(profile)), cal_(cal), cutoff_(eps) {
  while (!(eps * eps < 1.0 / (2.0 * cal_.sigma)) || cutoff_.max_derivative_on_grid() > 2.0) {
    eps *= 0.5;
    ++halvings_;
    if (halvings_ > 60) throw config_error("could not find an admissible cutoff eps");
    cutoff_ = CutoffF(eps);
  }
}

SandwichTriple SandwichedHamiltonians::eval(const Vec3& m) const {
  const double sq = m.x() * m.x() + m.y() * m.y() + m.z() * m.z();
  const double g = 0.5 * sq / cal_.c;
  const double rho = std::sqrt(sq / cal_.c);
  const double tau = tau_step(rho);
  const double gp = cal_.sigma * g;
  const double fF = cutoff_.eval(profile_.F(m)).value;
  const double fG = cutoff_.eval(g).value;
  return {(1.0 - tau) * fG + tau * gp, (1.0 - tau) * fF + tau * gp, gp};
}

double SandwichedHamiltonians::G_s(double s, const Vec3& m) const {
  const SandwichTriple t = eval(m);
  const double b = beta_step(s);
  return (1.0 - b) * t.g_minus + b * t.g_plus;
}

Vec3 SandwichedHamiltonians::grad_f_of_F(const Vec3& m) const {
  return cutoff_.eval(profile_.F(m)).derivative * profile_.F_gradient(m);
}

Vec3 SandwichedHamiltonians::grad_blend(const Vec3& m, double inner, const Vec3& grad_inner) const {
  const double rho = norm(m);
  const double tau = tau_step(rho);
  Vec3 g = (1.0 - tau) * grad_inner + tau * grad_G_plus(m);
  if (rho > 0.0) {
    const double dtau = 0.5 * smooth::step_d1(0.5 * (rho - 2.0));
    if (dtau != 0.0) g += dtau * (cal_.sigma * G(m) - inner) * (m / (cal_.c * rho));
  }
  return g;
}

Vec3 SandwichedHamiltonians::grad_K(const Vec3& m) const {
  return grad_blend(m, cutoff_.eval(profile_.F(m)).value, grad_f_of_F(m));
}

Vec3 SandwichedHamiltonians::grad_G_minus(const Vec3& m) const {
  const double g = G(m);
  return grad_blend(m, cutoff_.eval(g).value, cutoff_.eval(g).derivative * grad_G(m));
}

Vec3 SandwichedHamiltonians::grad_G_s(double s, const Vec3& m) const {
  const double b = beta_step(s);
  return (1.0 - b) * grad_G_minus(m) + b * grad_G_plus(m);
}

SandwichTriple sandwich_eval(const SandwichedHamiltonians& s, const ModelManifold& M, const CotangentPoint& x) {
  return s.eval(M.to_frame(x));
}

HomotopyValue homotopy_eval(const SandwichedHamiltonians& s, const ModelManifold& M, double t,
                            const CotangentPoint& x, double a) {
  if (!(a > 0.0)) throw config_error("homotopy window a must be positive");
  const double b = beta_step(t);
  const SandwichTriple v = sandwich_eval(s, M, x);
  return {(1.0 - b) * v.g_minus + b * v.g_plus, a / (1.0 + b * (s.sigma() - 1.0))};
}

}  // namespace spherization
