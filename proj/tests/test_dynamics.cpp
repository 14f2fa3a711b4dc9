// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "spherization/dynamics.hpp"
#include "spherization/errors.hpp"
#include "spherization/sol_model.hpp"

using namespace spherization;

namespace {

std::shared_ptr<SandwichedHamiltonians> torus_sandwich(const RadialProfile& prof) {
  return std::make_shared<SandwichedHamiltonians>(prof, calibrate(prof, ModelManifold::torus()), 0.2);
}

}  // namespace

TEST_CASE("canonical gradients match finite differences") {
  const ModelManifold M = ModelManifold::sol();
  const HamiltonianField H = sol_field(M);
  std::vector<CotangentPoint> pts;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) pts.push_back({Vec3(u(rng), u(rng), u(rng)), Vec3(u(rng), u(rng), u(rng))});
  CHECK(gradient_check(H, pts) < 1e-6);
}

TEST_CASE("geodesic flow on the torus is a straight line") {
  const ModelManifold T = ModelManifold::torus();
  const HamiltonianField H(T, std::make_shared<KineticHamiltonian>());
  const CotangentPoint x0{Vec3(0.1, 0.2, 0.0), Vec3(0.6, -0.8, 0.0)};
  const Trajectory tr = integrate(H, x0, 3.0);
  const CotangentPoint& end = tr.states.back();
  CHECK((end.q - (x0.q + 3.0 * x0.p)).norm() < 1e-12);
  CHECK(tr.times.back() == 3.0);
}

TEST_CASE("energy and Casimir conservation on Sol") {
  const ModelManifold M = ModelManifold::sol();
  const HamiltonianField H = sol_field(M);
  const auto starts = sample_level(M, 1.0, 3, 77);
  IntegratorConfig cfg;
  cfg.output_dt = 0.5;
  for (const auto& x : starts) {
    const Trajectory tr = integrate(H, x, 100.0, cfg);
    CHECK(tr.energy_drift <= 1e-8);
    const double c0 = tr.frame.front().x() * tr.frame.front().y();
    for (const Vec3& m : tr.frame) CHECK(std::abs(m.x() * m.y() - c0) <= 1e-8);
  }
}

TEST_CASE("frozen replay reproduces the adaptive flow bitwise") {
  const ModelManifold M = ModelManifold::sol();
  const HamiltonianField H = sol_field(M);
  const FrameState y0 = H.to_state(sample_level(M, 1.0, 1, 5).front());
  std::vector<double> steps;
  const FrameState a = flow(H, y0, 2.5, {}, &steps);
  const FrameState b = flow_frozen(H, y0, steps);
  CHECK(std::memcmp(a.data(), b.data(), sizeof a) == 0);
}

TEST_CASE("implicit midpoint keeps the energy of the Sol flow") {
  const ModelManifold M = ModelManifold::sol();
  const HamiltonianField H = sol_field(M);
  IntegratorConfig cfg;
  cfg.scheme = Scheme::ImplicitMidpoint;
  cfg.fixed_step = 0.01;
  cfg.drift_abort = 1e-4;
  const Trajectory tr = integrate(H, sample_level(M, 1.0, 1, 8).front(), 10.0, cfg);
  CHECK(tr.energy_drift < 1e-4);
}

TEST_CASE("drift above the bound is a divergence") {
  const ModelManifold M = ModelManifold::sol();
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-3;
  cfg.abs_tol = 1e-3;
  cfg.max_step = 1.0;
  cfg.drift_abort = 1e-14;
  try {
    integrate(sol_field(M), sample_level(M, 1.0, 1, 2).front(), 50.0, cfg);
    FAIL("expected a divergence");
  } catch (const LabError& e) {
    CHECK(e.category() == ErrorCategory::IntegrationDiverged);
  }
}

TEST_CASE("scaling law and the homogeneous action formula") {
  const ModelManifold T = ModelManifold::torus();
  const auto sw = torus_sandwich(RadialProfile::ellipse(Vec3(1.0, 2.0, 1.0), 2));
  const HamiltonianField HF(T, std::make_shared<ProfileHamiltonian>(sw->profile()));
  FiberChordOptions o;
  o.p_max = 4.0;
  o.radial = 80;
  o.angular = 128;
  o.integrator.max_step = 0.25;
  const auto ch = fiber_chords(HF, BasePoint(0.1, 0.2, 0.0), BasePoint(0.6, 0.45, 0.0), o);
  REQUIRE(ch.size() >= 10);
  for (std::size_t i = 0; i < 10; ++i) {
    for (double c : {2.0, 3.0}) CHECK(verify_scaling_law(HF, ch[i].traj, c).relative_error <= 1e-6);
    const Vec3 m = T.to_frame(ch[i].traj.states.front());
    const double F = sw->F(m);
    CHECK(action_of_trajectory(ch[i].traj, HF) == doctest::Approx(action_homogeneous(1.0, F, F)).epsilon(1e-9));
  }
}

TEST_CASE("chords of G on the torus are lattice vectors") {
  const ModelManifold T = ModelManifold::torus();
  const HamiltonianField HG(T, std::make_shared<KineticHamiltonian>(), 2.0);
  FiberChordOptions o;
  o.p_max = 2.0;
  o.radial = 60;
  o.angular = 96;
  o.integrator.max_step = 0.5;
  const BasePoint q0(0.1, 0.2, 0.0), q1(0.6, 0.45, 0.0);
  const auto ch = fiber_chords(HG, q0, q1, o);
  // Time-1 chords of 2G have p = (q1 - q0 + v) / 2 with |p| <= 2.
  std::size_t expect = 0;
  for (int i = -6; i <= 6; ++i)
    for (int j = -6; j <= 6; ++j)
      if ((Eigen::Vector2d(0.5 + i, 0.25 + j) / 2.0).norm() <= 2.0) ++expect;
  CHECK(ch.size() == expect);
  for (const auto& c : ch) CHECK(action_of_trajectory(c.traj, HG) == doctest::Approx(2.0 * c.p0.squaredNorm() / 2.0));
}

TEST_CASE("action classification of nK chords") {
  const ModelManifold T = ModelManifold::torus();
  const auto sw = torus_sandwich(RadialProfile::round(2));
  FiberChordOptions o;
  o.p_max = 4.5;
  o.radial = 120;
  o.angular = 128;
  o.integrator.max_step = 0.25;
  for (int n : {1, 2}) {
    const HamiltonianField HK(T, std::make_shared<SandwichHamiltonian>(sw, SandwichRole::K), n);
    for (const auto& c : fiber_chords(HK, BasePoint(0.1, 0.2, 0.0), BasePoint(0.6, 0.45, 0.0), o))
      CHECK_NOTHROW(classify_chord_action(c.traj, *sw, T, n));
  }
}

TEST_CASE("time change identity") {
  const ModelManifold M = ModelManifold::sol();
  const RadialProfile prof = RadialProfile::ellipse(Vec3(1.0, 1.5, 0.7), 3);
  const SandwichedHamiltonians sw(prof, calibrate(prof, M), 0.2);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const BasePoint q = M.domain_point(Vec3(u(rng), u(rng), u(rng)));
    const Vec3 d = Vec3(u(rng) - 0.5, u(rng) - 0.5, u(rng) - 0.5).normalized();
    const Vec3 m = prof.radius(d) * d;
    const double s = i == 0 ? 1.0 : (i == 1 ? sw.cutoff().eps() : 1.0 - u(rng));
    CHECK(time_change_residual(sw, M, {q, M.from_frame(q, m)}, s) <= 1e-9);
  }
}
