// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "spherization/dynamics.hpp"
#include "spherization/kernels.hpp"
#include "spherization/sol_model.hpp"

using namespace spherization;

TEST_CASE("Euler reduction matches the full field") {
  const ModelManifold M = ModelManifold::sol();
  const HamiltonianField H = sol_field(M);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int i = 0; i < 100; ++i) {
    const CotangentPoint x{Vec3(u(rng), u(rng), u(rng)), Vec3(u(rng), u(rng), u(rng))};
    const FrameState r = H.frame_rhs(H.to_state(x));
    const EulerState e = euler_field(momentum_map(x));
    CHECK(std::abs(r[3] - e.x()) < 1e-10);
    CHECK(std::abs(r[4] - e.y()) < 1e-10);
    CHECK(std::abs(r[5] - e.z()) < 1e-10);
    CHECK(sol_hamiltonian(x) == doctest::Approx(H.value(x)).epsilon(1e-13));
  }
}

TEST_CASE("fixed point and closed form") {
  CHECK(entropy_closed_form(1.0) == 1.0);
  CHECK(entropy_closed_form(0.3) == 0.0);
  CHECK(entropy_closed_form(1.5) == doctest::Approx(std::sqrt(2.0)));
  for (double k : {0.75, 1.0, 1.5}) CHECK(euler_field(fixed_point_plus(k)).norm() < 1e-15);
}

TEST_CASE("starshapedness flips at k = 1/2") {
  for (double k : {0.1, 0.3, 0.49, 0.51, 0.75, 1.0, 2.0}) {
    const SolLevel L(k, ModelManifold::sol());
    // Sphere of radius sqrt(2k) about (-1, 0, 0): encloses 0 iff sqrt(2k) > 1.
    CHECK(L.starshaped() == (std::sqrt(2.0 * k) > 1.0));
    CHECK(level_origin_gap(k) > 0.0);
  }
  CHECK(level_origin_gap(0.5) == 0.0);
}

TEST_CASE("Lyapunov estimate at p_+") {
  const ModelManifold M = ModelManifold::sol();
  IntegratorConfig cfg;
  cfg.output_dt = 0.05;
  for (double k : {0.75, 1.0, 1.5}) {
    const Trajectory tr = integrate(sol_field(M), inverse_momentum_map(BasePoint::Zero(), fixed_point_plus(k)), 100.0, cfg);
    CHECK(lyapunov_plus(tr).value == doctest::Approx(std::sqrt(2.0 * k - 1.0)).epsilon(1e-3));
  }
}

TEST_CASE("trapezoid average of a known signal") {
  std::vector<double> t, v;
  for (int i = 0; i <= 1000; ++i) {
    t.push_back(i * 0.01);
    v.push_back(2.0 + std::sin(t.back() * 2.0 * M_PI));
  }
  CHECK(lyapunov_from_samples(t, v, 0.0).value == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("Euler kernel variants agree bitwise and with the full flow") {
  const ModelManifold M = ModelManifold::sol();
  const auto starts = sample_level(M, 0.3, 7, 12);
  EulerBatch a;
  for (const auto& x : starts) {
    const EulerState m = momentum_map(x);
    a.mx.push_back(m.x());
    a.my.push_back(m.y());
    a.mz.push_back(m.z());
  }
  EulerBatch b = a;
  const auto ra = euler_mz_average(a, 1e-3, 20000, 2000, SimdLevel::Scalar);
  if (cpu_has_avx2()) {
    const auto rb = euler_mz_average(b, 1e-3, 20000, 2000, SimdLevel::Avx2);
    CHECK(std::memcmp(ra.data(), rb.data(), ra.size() * sizeof(double)) == 0);
    CHECK(std::memcmp(a.mz.data(), b.mz.data(), a.mz.size() * sizeof(double)) == 0);
  }
  IntegratorConfig cfg;
  cfg.output_dt = 0.01;
  const auto est = lyapunov_ensemble(M, starts, 20.0, cfg, 0.1, 2);
  for (std::size_t i = 0; i < starts.size(); ++i) CHECK(ra[i] == doctest::Approx(est[i].value).epsilon(1e-4).scale(1.0));
}
