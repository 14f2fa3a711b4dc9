// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "spherization/lattice_group.hpp"

namespace spherization {

using Vec3 = Eigen::Vector3d;

/// Base point in universal-cover coordinates. On the torus only x and y are
/// used and z stays 0.
using BasePoint = Vec3;

/// Phase-space state: base point plus covector in the coordinate coframe.
struct CotangentPoint {
  Vec3 q = Vec3::Zero();
  Vec3 p = Vec3::Zero();
};

enum class ManifoldKind { Torus2, SolQuotient };

struct Reduction {
  BasePoint point;
  DeckElement deck;
};

struct Lift {
  DeckElement deck;
  BasePoint point;
};

/// Flat 2-torus R^2 / (basis Z^2), or the Sol quotient Gamma \ Sol with
/// Gamma = { (P(m,n), l log(lambda)) }.
class ModelManifold {
 public:
  static ModelManifold torus(const Eigen::Matrix2d& basis = Eigen::Matrix2d::Identity());
  /// Default monodromy [[2,1],[1,1]].
  static ModelManifold sol(const IntMatrix2& A = IntMatrix2{{2, 1, 1, 1}});

  ManifoldKind kind() const { return kind_; }
  bool is_sol() const { return kind_ == ManifoldKind::SolQuotient; }
  int dim() const { return kind_ == ManifoldKind::Torus2 ? 2 : 3; }

  const Eigen::Matrix2d& basis() const { return basis_; }
  const IntMatrix2& monodromy() const { return A_; }
  const Eigen::Matrix2d& diagonalizer() const { return P_; }
  double lambda() const { return lambda_; }
  double period() const { return period_; }

  BasePoint apply(const DeckElement& g, const BasePoint& q) const;
  /// Cotangent lift of the deck action.
  CotangentPoint apply(const DeckElement& g, const CotangentPoint& x) const;
  DeckElement compose(const DeckElement& a, const DeckElement& b) const;
  DeckElement inverse(const DeckElement& g) const;

  Reduction reduce(const BasePoint& q) const;

  Eigen::Matrix3d cometric(const BasePoint& q) const;

  /// Diagonal of E(q) taking coordinate covector components to components in
  /// the orthonormal coframe: m = E(q) p. On Sol, m is (M_x, M_y, M_z).
  Vec3 frame_scale(const BasePoint& q) const;
  Vec3 to_frame(const CotangentPoint& x) const { return frame_scale(x.q).cwiseProduct(x.p); }
  Vec3 from_frame(const BasePoint& q, const Vec3& m) const {
    return m.cwiseQuotient(frame_scale(q));
  }

  /// Base displacement b - a expressed in the orthonormal frame at the
  /// midpoint. Used for edge lengths of evolved meshes.
  Vec3 local_difference(const BasePoint& a, const BasePoint& b) const;

  /// All deck translates of `target` inside the coordinate box [lo, hi].
  std::vector<Lift> lifts_in_box(const BasePoint& target, const Vec3& lo, const Vec3& hi,
                                 std::size_t cap = 1u << 22) const;

  /// Minimum coordinate distance from q to deck translates of q_target with
  /// |m|,|n|,|l| <= radius.
  double fiber_distance(const BasePoint& q, const BasePoint& q_target, int radius = 2,
                        std::size_t max_elements = 1u << 20) const;

  /// Riemannian measure of the quotient (the coordinate volume form is
  /// dx dy (dz) for both models).
  double volume() const;
  /// Point of the fundamental domain at unit-cube coordinates c.
  BasePoint domain_point(const Vec3& c) const;

 private:
  ModelManifold() = default;

  ManifoldKind kind_ = ManifoldKind::Torus2;
  Eigen::Matrix2d basis_ = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d basis_inv_ = Eigen::Matrix2d::Identity();
  IntMatrix2 A_{};
  Eigen::Matrix2d P_ = Eigen::Matrix2d::Identity();
  Eigen::Matrix2d P_inv_ = Eigen::Matrix2d::Identity();
  double lambda_ = 1.0;
  double period_ = 0.0;
};

}  // namespace spherization
