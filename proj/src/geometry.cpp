// SPDX-License-Identifier: Apache-2.0
#include "spherization/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spherization/errors.hpp"

namespace spherization {

ModelManifold ModelManifold::torus(const Eigen::Matrix2d& basis) {
  if (std::abs(basis.determinant()) < 1e-12) throw config_error("torus lattice basis is singular");
  ModelManifold M;
  M.kind_ = ManifoldKind::Torus2;
  M.basis_ = basis;
  M.basis_inv_ = basis.inverse();
  return M;
}

ModelManifold ModelManifold::sol(const IntMatrix2& A) {
  if (A.det() != 1) throw config_error("Sol monodromy must have determinant 1");
  if (A.trace() <= 2) throw config_error("Sol monodromy must have trace > 2");
  ModelManifold M;
  M.kind_ = ManifoldKind::SolQuotient;
  M.A_ = A;
  const double tr = static_cast<double>(A.trace());
  M.lambda_ = 0.5 * (tr + std::sqrt(tr * tr - 4.0));
  M.period_ = std::log(M.lambda_);
  // Rows of P are left eigenvectors of A for lambda and 1/lambda, normalized.
  Eigen::Matrix2d Ad;
  Ad << static_cast<double>(A(0, 0)), static_cast<double>(A(0, 1)), static_cast<double>(A(1, 0)),
      static_cast<double>(A(1, 1));
  auto left_eigenvector = [&](double mu) {
    // w^T (A - mu) = 0  <=>  (A - mu)^T w = 0
    Eigen::Matrix2d B = (Ad - mu * Eigen::Matrix2d::Identity()).transpose();
    Eigen::Vector2d w(-B(0, 1), B(0, 0));
    if (w.norm() < 1e-12) w = Eigen::Vector2d(-B(1, 1), B(1, 0));
    w.normalize();
    if (w(0) < 0) w = -w;
    return w;
  };
  const Eigen::Vector2d w1 = left_eigenvector(M.lambda_);
  Eigen::Vector2d w2 = left_eigenvector(1.0 / M.lambda_);
  M.P_.row(0) = w1.transpose();
  M.P_.row(1) = w2.transpose();
  if (M.P_.determinant() < 0) M.P_.row(1) = -M.P_.row(1);
  M.P_inv_ = M.P_.inverse();
  Eigen::Matrix2d D = M.P_ * Ad * M.P_inv_;
  Eigen::Matrix2d target = Eigen::Vector2d(M.lambda_, 1.0 / M.lambda_).asDiagonal();
  if ((D - target).cwiseAbs().maxCoeff() > 1e-12) {
    throw invariant_error("Sol diagonalizer failed P A P^-1 = diag(lambda, 1/lambda)");
  }
  return M;
}

BasePoint ModelManifold::apply(const DeckElement& g, const BasePoint& q) const {
  if (kind_ == ManifoldKind::Torus2) {
    Eigen::Vector2d t = basis_ * Eigen::Vector2d(static_cast<double>(g.m), static_cast<double>(g.n));
    return {q.x() + t.x(), q.y() + t.y(), q.z()};
  }
  const Eigen::Vector2d h = P_ * Eigen::Vector2d(static_cast<double>(g.m), static_cast<double>(g.n));
  const double gz = static_cast<double>(g.l) * period_;
  const double s = std::pow(lambda_, static_cast<double>(g.l));
  return {h.x() + s * q.x(), h.y() + q.y() / s, gz + q.z()};
}

CotangentPoint ModelManifold::apply(const DeckElement& g, const CotangentPoint& x) const {
  CotangentPoint out;
  out.q = apply(g, x.q);
  if (kind_ == ManifoldKind::Torus2) {
    out.p = x.p;
  } else {
    // Left translation has differential diag(e^{gz}, e^{-gz}, 1); covectors
    // transform by its inverse transpose.
    const double s = std::pow(lambda_, static_cast<double>(g.l));
    out.p = Vec3(x.p.x() / s, x.p.y() * s, x.p.z());
  }
  return out;
}

DeckElement ModelManifold::compose(const DeckElement& a, const DeckElement& b) const {
  if (kind_ == ManifoldKind::Torus2) return {a.m + b.m, a.n + b.n, 0};
  return multiply(a, b, A_);
}

DeckElement ModelManifold::inverse(const DeckElement& g) const {
  if (kind_ == ManifoldKind::Torus2) return {-g.m, -g.n, 0};
  return spherization::inverse(g, A_);
}

Reduction ModelManifold::reduce(const BasePoint& q) const {
  if (kind_ == ManifoldKind::Torus2) {
    const Eigen::Vector2d c = basis_inv_ * Eigen::Vector2d(q.x(), q.y());
    const double u0 = std::floor(c.x());
    const double u1 = std::floor(c.y());
    DeckElement g{static_cast<std::int64_t>(u0), static_cast<std::int64_t>(u1), 0};
    BasePoint r = apply(inverse(g), q);
    return {r, g};
  }
  const double lf = std::floor(q.z() / period_);
  const auto l = static_cast<std::int64_t>(lf);
  const double s = std::pow(lambda_, lf);
  // Horizontal part pulled back by the vertical translation, in P-coordinates.
  const Eigen::Vector2d w = P_inv_ * Eigen::Vector2d(q.x() / s, q.y() * s);
  const Eigen::Vector2d u(std::floor(w.x()), std::floor(w.y()));
  const IntMatrix2 Al = power(A_, l);
  const auto u0 = static_cast<std::int64_t>(u.x());
  const auto u1 = static_cast<std::int64_t>(u.y());
  DeckElement g{Al(0, 0) * u0 + Al(0, 1) * u1, Al(1, 0) * u0 + Al(1, 1) * u1, l};
  const Eigen::Vector2d c = P_ * (w - u);
  BasePoint r(c.x(), c.y(), q.z() - lf * period_);
  if (r.z() < 0.0) r.z() = 0.0;  // q.z = l*period up to rounding
  return {r, g};
}

Eigen::Matrix3d ModelManifold::cometric(const BasePoint& q) const {
  if (kind_ == ManifoldKind::Torus2) return Eigen::Matrix3d::Identity();
  return Vec3(std::exp(2.0 * q.z()), std::exp(-2.0 * q.z()), 1.0).asDiagonal();
}

Vec3 ModelManifold::frame_scale(const BasePoint& q) const {
  if (kind_ == ManifoldKind::Torus2) return Vec3(1.0, 1.0, 1.0);
  const double e = std::exp(q.z());
  return Vec3(e, 1.0 / e, 1.0);
}

Vec3 ModelManifold::local_difference(const BasePoint& a, const BasePoint& b) const {
  Vec3 d = b - a;
  if (kind_ == ManifoldKind::Torus2) {
    d.z() = 0.0;
    return d;
  }
  const double e = std::exp(0.5 * (a.z() + b.z()));
  return Vec3(d.x() / e, d.y() * e, d.z());
}

std::vector<Lift> ModelManifold::lifts_in_box(const BasePoint& target, const Vec3& lo, const Vec3& hi,
                                              std::size_t cap) const {
  std::vector<Lift> out;
  auto scan_plane = [&](const Eigen::Matrix2d& to_lattice, const Eigen::Vector2d& origin,
                        std::int64_t l, auto&& make) {
    // Integer v with origin + B v in the horizontal box, B = inverse(to_lattice).
    double vmin[2] = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    double vmax[2] = {-vmin[0], -vmin[1]};
    for (int cx = 0; cx < 2; ++cx) {
      for (int cy = 0; cy < 2; ++cy) {
        const Eigen::Vector2d corner(cx ? hi.x() : lo.x(), cy ? hi.y() : lo.y());
        const Eigen::Vector2d v = to_lattice * (corner - origin);
        for (int k = 0; k < 2; ++k) {
          vmin[k] = std::min(vmin[k], v(k));
          vmax[k] = std::max(vmax[k], v(k));
        }
      }
    }
    const double span = (std::floor(vmax[0]) - std::ceil(vmin[0]) + 1) *
                        (std::floor(vmax[1]) - std::ceil(vmin[1]) + 1);
    if (span > static_cast<double>(cap)) throw budget_error("lifts_in_box: box holds too many lattice points");
    for (auto i = static_cast<std::int64_t>(std::ceil(vmin[0])); i <= static_cast<std::int64_t>(std::floor(vmax[0])); ++i) {
      for (auto j = static_cast<std::int64_t>(std::ceil(vmin[1])); j <= static_cast<std::int64_t>(std::floor(vmax[1])); ++j) {
        make(i, j, l);
      }
    }
  };
  auto inside = [&](const BasePoint& p) {
    for (int k = 0; k < dim(); ++k) {
      if (p(k) < lo(k) || p(k) > hi(k)) return false;
    }
    return true;
  };
  if (kind_ == ManifoldKind::Torus2) {
    scan_plane(basis_inv_, Eigen::Vector2d(target.x(), target.y()), 0,
               [&](std::int64_t i, std::int64_t j, std::int64_t) {
                 DeckElement g{i, j, 0};
                 BasePoint p = apply(g, target);
                 if (inside(p)) out.push_back({g, p});
                 if (out.size() > cap) throw budget_error("lifts_in_box: too many lifts");
               });
    return out;
  }
  const auto lmin = static_cast<std::int64_t>(std::ceil((lo.z() - target.z()) / period_));
  const auto lmax = static_cast<std::int64_t>(std::floor((hi.z() - target.z()) / period_));
  for (std::int64_t l = lmin; l <= lmax; ++l) {
    const double s = std::pow(lambda_, static_cast<double>(l));
    const Eigen::Vector2d origin(s * target.x(), target.y() / s);
    // Horizontal part of the lift is P u + D_l h with u = (m, n).
    scan_plane(P_inv_, origin, l, [&](std::int64_t i, std::int64_t j, std::int64_t ll) {
      DeckElement g{i, j, ll};
      BasePoint p = apply(g, target);
      if (inside(p)) out.push_back({g, p});
      if (out.size() > cap) throw budget_error("lifts_in_box: too many lifts");
    });
  }
  return out;
}

double ModelManifold::fiber_distance(const BasePoint& q, const BasePoint& q_target, int radius,
                                     std::size_t max_elements) const {
  if (radius < 0) throw config_error("fiber_distance: negative search radius");
  const double side = 2.0 * radius + 1.0;
  const double count = kind_ == ManifoldKind::Torus2 ? side * side : side * side * side;
  if (count > static_cast<double>(max_elements)) throw budget_error("fiber_distance: deck search exceeds budget");
  const int lr = kind_ == ManifoldKind::Torus2 ? 0 : radius;
  double best = std::numeric_limits<double>::infinity();
  for (int m = -radius; m <= radius; ++m) {
    for (int n = -radius; n <= radius; ++n) {
      for (int l = -lr; l <= lr; ++l) {
        best = std::min(best, (apply(DeckElement{m, n, l}, q_target) - q).norm());
      }
    }
  }
  return best;
}

double ModelManifold::volume() const {
  if (kind_ == ManifoldKind::Torus2) return std::abs(basis_.determinant());
  return std::abs(P_.determinant()) * period_;
}

BasePoint ModelManifold::domain_point(const Vec3& c) const {
  if (kind_ == ManifoldKind::Torus2) {
    const Eigen::Vector2d h = basis_ * Eigen::Vector2d(c.x(), c.y());
    return {h.x(), h.y(), 0.0};
  }
  const Eigen::Vector2d h = P_ * Eigen::Vector2d(c.x(), c.y());
  return {h.x(), h.y(), c.z() * period_};
}

}  // namespace spherization
