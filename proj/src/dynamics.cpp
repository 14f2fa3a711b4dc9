// SPDX-License-Identifier: Apache-2.0
#include "spherization/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "spherization/errors.hpp"

namespace spherization {

double SolMagneticHamiltonian::value(const Vec3& m) const {
  const double a = m.x() + 1.0;
  return 0.5 * (a * a + m.y() * m.y() + m.z() * m.z());
}

Vec3 SolMagneticHamiltonian::gradient(const Vec3& m) const { return {m.x() + 1.0, m.y(), m.z()}; }

double SandwichHamiltonian::value(const Vec3& m) const {
  switch (role_) {
    case SandwichRole::G: return sw_->G(m);
    case SandwichRole::GMinus: return sw_->eval(m).g_minus;
    case SandwichRole::K: return sw_->eval(m).k;
    case SandwichRole::GPlus: return sw_->eval(m).g_plus;
    case SandwichRole::Gs: return sw_->G_s(s_, m);
    case SandwichRole::FofF: return sw_->cutoff().eval(sw_->F(m)).value;
  }
  return 0.0;
}

Vec3 SandwichHamiltonian::gradient(const Vec3& m) const {
  switch (role_) {
    case SandwichRole::G: return sw_->grad_G(m);
    case SandwichRole::GMinus: return sw_->grad_G_minus(m);
    case SandwichRole::K: return sw_->grad_K(m);
    case SandwichRole::GPlus: return sw_->grad_G_plus(m);
    case SandwichRole::Gs: return sw_->grad_G_s(s_, m);
    case SandwichRole::FofF: return sw_->grad_f_of_F(m);
  }
  return Vec3::Zero();
}

std::string SandwichHamiltonian::name() const {
  switch (role_) {
    case SandwichRole::G: return "G";
    case SandwichRole::GMinus: return "G-";
    case SandwichRole::K: return "K";
    case SandwichRole::GPlus: return "G+";
    case SandwichRole::Gs: return "Gs";
    case SandwichRole::FofF: return "f(F)";
  }
  return "?";
}

HamiltonianField::HamiltonianField(ModelManifold manifold, FrameHamiltonianPtr h, double scale)
    : manifold_(std::move(manifold)), h_(std::move(h)), scale_(scale) {
  if (!h_) throw config_error("Hamiltonian handle is empty");
  if (!std::isfinite(scale_)) throw config_error("Hamiltonian scale must be finite");
}

std::pair<Vec3, Vec3> HamiltonianField::gradient(const CotangentPoint& x) const {
  const Vec3 e = manifold_.frame_scale(x.q);
  const Vec3 m = e.cwiseProduct(x.p);
  const Vec3 g = gradient_frame(m);
  Vec3 dq = Vec3::Zero();
  // Only E(z) depends on the base point: dE/dz = diag(e^z, -e^-z, 0).
  if (manifold_.is_sol()) dq.z() = g.x() * m.x() - g.y() * m.y();
  return {dq, e.cwiseProduct(g)};
}

FrameState HamiltonianField::frame_rhs(const FrameState& y) const {
  const Vec3 m(y[3], y[4], y[5]);
  const Vec3 g = gradient_frame(m);
  FrameState d{};
  if (manifold_.is_sol()) {
    const double ez = std::exp(y[2]);
    d[0] = ez * g.x();
    d[1] = g.y() / ez;
    d[2] = g.z();
    d[3] = d[2] * m.x();
    d[4] = -d[2] * m.y();
    d[5] = -(g.x() * m.x() - g.y() * m.y());
  } else {
    d[0] = g.x();
    d[1] = g.y();
  }
  return d;
}

FrameState HamiltonianField::to_state(const CotangentPoint& x) const {
  const Vec3 m = manifold_.to_frame(x);
  return {x.q.x(), x.q.y(), x.q.z(), m.x(), m.y(), m.z()};
}

CotangentPoint HamiltonianField::from_state(const FrameState& y) const {
  CotangentPoint x;
  x.q = Vec3(y[0], y[1], y[2]);
  x.p = manifold_.from_frame(x.q, Vec3(y[3], y[4], y[5]));
  return x;
}

PhaseVelocity hamiltonian_vector_field(const HamiltonianField& H, const CotangentPoint& x) {
  const auto [dq, dp] = H.gradient(x);
  return {dp, -dq};
}

double gradient_check(const HamiltonianField& H, std::span<const CotangentPoint> points, double h) {
  const int d = H.manifold().dim();
  double worst = 0.0;
  for (const CotangentPoint& x : points) {
    const auto [aq, ap] = H.gradient(x);
    Vec3 nq = Vec3::Zero(), np = Vec3::Zero();
    for (int i = 0; i < d; ++i) {
      CotangentPoint a = x, b = x;
      a.q[i] += h;
      b.q[i] -= h;
      nq[i] = (H.value(a) - H.value(b)) / (2.0 * h);
      a = x;
      b = x;
      a.p[i] += h;
      b.p[i] -= h;
      np[i] = (H.value(a) - H.value(b)) / (2.0 * h);
    }
    const double scale = std::max({aq.norm() + ap.norm(), nq.norm() + np.norm(), 1e-3});
    worst = std::max(worst, ((aq - nq).norm() + (ap - np).norm()) / scale);
  }
  return worst;
}

}  // namespace spherization
