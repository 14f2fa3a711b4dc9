// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <random>

#include "spherization/errors.hpp"
#include "spherization/geometry.hpp"
#include "spherization/lattice_group.hpp"

using namespace spherization;

namespace {

Vec3 sol_mul(const Vec3& a, const Vec3& b) {
  return {a.x() + std::exp(a.z()) * b.x(), a.y() + std::exp(-a.z()) * b.y(), a.z() + b.z()};
}

}  // namespace

TEST_CASE("semidirect law on the lattice") {
  const IntMatrix2 A{{2, 1, 1, 1}};
  const GroupElement e{};
  const GroupElement g{3, -1, 2};
  CHECK(multiply(e, g, A) == g);
  CHECK(multiply(GroupElement{1, 2, 0}, GroupElement{3, 4, 0}, A) == GroupElement{4, 6, 0});
  CHECK(multiply(GroupElement{0, 0, 1}, GroupElement{1, 0, 0}, A) == GroupElement{2, 1, 1});
  CHECK(multiply(g, inverse(g, A), A) == e);

  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> d(-3, 3);
  for (int i = 0; i < 1000; ++i) {
    const GroupElement a{d(rng), d(rng), d(rng)}, b{d(rng), d(rng), d(rng)}, c{d(rng), d(rng), d(rng)};
    CHECK(multiply(multiply(a, b, A), c, A) == multiply(a, multiply(b, c, A), A));
    CHECK(multiply(inverse(a, A), a, A) == e);
  }
}

TEST_CASE("matrix powers overflow into a budget error") {
  const IntMatrix2 A{{2, 1, 1, 1}};
  CHECK(power(A, 2) == IntMatrix2{{5, 3, 3, 2}});
  CHECK(multiply(power(A, -3), power(A, 3)) == IntMatrix2{});
  CHECK_THROWS_AS(power(A, 200), LabError);
}

TEST_CASE("Sol deck action is left multiplication") {
  const ModelManifold M = ModelManifold::sol();
  CHECK(M.lambda() == doctest::Approx((3.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-15));
  const Eigen::Matrix2d& P = M.diagonalizer();
  CHECK(P.determinant() > 0.0);
  const BasePoint q(0.3, -0.2, 0.4);
  const DeckElement g{1, -2, 1};
  const Eigen::Vector2d v = P * Eigen::Vector2d(1.0, -2.0);
  const Vec3 expect = sol_mul(Vec3(v.x(), v.y(), std::log(M.lambda())), q);
  CHECK((M.apply(g, q) - expect).norm() < 1e-12);

  // Deck elements compose like the lattice group.
  const DeckElement h{0, 3, -1};
  CHECK((M.apply(M.compose(g, h), q) - M.apply(g, M.apply(h, q))).norm() < 1e-12);
  CHECK((M.apply(M.inverse(g), M.apply(g, q)) - q).norm() < 1e-12);

  // The quotient reduction round trips through a deck element.
  const BasePoint far = M.apply(DeckElement{2, 5, -2}, q);
  const Reduction r = M.reduce(far);
  CHECK((M.apply(r.deck, r.point) - far).norm() < 1e-9);
}

TEST_CASE("cometric and frame") {
  const ModelManifold M = ModelManifold::sol();
  const BasePoint q(0.0, 0.0, 0.7);
  const Eigen::Matrix3d g = M.cometric(q);
  CHECK(g(0, 0) == doctest::Approx(std::exp(1.4)));
  CHECK(g(1, 1) == doctest::Approx(std::exp(-1.4)));
  CHECK(g(2, 2) == 1.0);
  const CotangentPoint x{q, Vec3(0.2, -1.0, 0.5)};
  const Vec3 m = M.to_frame(x);
  CHECK(m.squaredNorm() == doctest::Approx(x.p.dot(g * x.p)).epsilon(1e-14));
  CHECK((M.from_frame(q, m) - x.p).norm() < 1e-14);

  // The cotangent lift preserves the frame covector (left invariance).
  const CotangentPoint y = M.apply(DeckElement{1, 1, 1}, x);
  CHECK((M.to_frame(y) - m).norm() < 1e-12);

  const ModelManifold T = ModelManifold::torus();
  CHECK(T.cometric(q).isIdentity());
}

TEST_CASE("lifts in a box match a lattice count") {
  const ModelManifold T = ModelManifold::torus();
  const auto lifts = T.lifts_in_box(BasePoint(0.5, 0.5, 0.0), Vec3(-3, -3, -1), Vec3(3, 3, 1));
  CHECK(lifts.size() == 36);
  const ModelManifold M = ModelManifold::sol();
  for (const Lift& L : M.lifts_in_box(BasePoint(0.1, 0.2, 0.3), Vec3(-2, -2, -1.5), Vec3(2, 2, 1.5))) {
    CHECK(L.point.cwiseAbs().maxCoeff() <= 2.0);
    CHECK((M.apply(L.deck, BasePoint(0.1, 0.2, 0.3)) - L.point).norm() < 1e-12);
  }
}
