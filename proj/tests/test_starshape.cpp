// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>

#include "spherization/errors.hpp"
#include "spherization/kernels.hpp"
#include "spherization/starshape.hpp"

using namespace spherization;

TEST_CASE("cutoff regression values") {
  // Frozen from the closed form at eps = 0.2, t = 0.375.
  const CutoffF f(0.2);
  CHECK(f.eval(0.1).value == doctest::Approx(0.0378204345703125).epsilon(1e-15));
  CHECK(f.eval(0.1).derivative == doctest::Approx(1.51116943359375).epsilon(1e-15));
  CHECK(f.eval(0.04).value == 0.0);
  CHECK(f.eval(0.2).value == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(f.eval(0.5).value == 0.5);
  CHECK(f.eval(0.5).derivative == 1.0);
  CHECK(f.max_derivative_on_grid() <= 2.0);
  // Continuity of f and f' at both ends of the blend.
  for (double r : {0.04, 0.2}) {
    CHECK(f.eval(r - 1e-9).value == doctest::Approx(f.eval(r + 1e-9).value).epsilon(1e-7));
    CHECK(f.eval(r - 1e-9).derivative == doctest::Approx(f.eval(r + 1e-9).derivative).epsilon(1e-6));
  }
}

TEST_CASE("calibration brackets F by G and sigma G") {
  const ModelManifold T = ModelManifold::torus();
  const RadialProfile prof = RadialProfile::ellipse(Vec3(1.0, 2.0, 1.0), 2);
  const Calibration cal = calibrate(prof, T);
  CHECK(cal.c == doctest::Approx(2.0));
  CHECK(cal.sigma == doctest::Approx(4.4));
  const SandwichedHamiltonians sw(prof, cal, 0.2);
  CHECK(sw.cutoff().eps() * sw.cutoff().eps() < 1.0 / (2.0 * sw.sigma()));
  for (const Vec3& u : prof.sample_directions(512)) {
    CHECK(sw.G(u) <= sw.F(u) * (1.0 + 1e-12));
    CHECK(sw.F(u) <= sw.sigma() * sw.G(u));
  }
}

TEST_CASE("eps is halved until eps^2 < 1 / (2 sigma)") {
  const ModelManifold T = ModelManifold::torus();
  const RadialProfile prof = RadialProfile::ellipse(Vec3(1.0, 8.0, 1.0), 2);
  const SandwichedHamiltonians sw(prof, calibrate(prof, T), 0.24);
  CHECK(sw.eps_halvings() > 0);
  CHECK(2.0 * sw.sigma() * sw.cutoff().eps() * sw.cutoff().eps() < 1.0);
}

TEST_CASE("sandwich order and homotopy endpoints") {
  const ModelManifold T = ModelManifold::torus();
  for (const RadialProfile& prof : {RadialProfile::round(2), RadialProfile::ellipse(Vec3(1.0, 2.0, 1.0), 2),
                                    RadialProfile::fourier(1.0, {0.1, 0.05}, {0.0, 0.03})}) {
    const SandwichedHamiltonians sw(prof, calibrate(prof, T), 0.2);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-8.0, 8.0);
    for (int i = 0; i < 20000; ++i) {
      const Vec3 m(u(rng), u(rng), 0.0);
      const SandwichTriple t = sw.eval(m);
      REQUIRE(t.g_minus <= t.k);
      REQUIRE(t.k <= t.g_plus);
      CHECK(sw.G_s(0.0, m) == doctest::Approx(t.g_minus));
      CHECK(sw.G_s(1.0, m) == doctest::Approx(t.g_plus));
    }
  }
}

TEST_CASE("gradients agree with central differences") {
  const ModelManifold T = ModelManifold::torus();
  const RadialProfile prof = RadialProfile::ellipse(Vec3(1.0, 2.0, 1.0), 2);
  const SandwichedHamiltonians sw(prof, calibrate(prof, T), 0.2);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-6.0, 6.0);
  const double h = 1e-6;
  for (int i = 0; i < 200; ++i) {
    const Vec3 m(u(rng), u(rng), 0.0);
    Vec3 fd;
    for (int j = 0; j < 3; ++j) {
      Vec3 a = m, b = m;
      a[j] += h;
      b[j] -= h;
      fd[j] = (sw.eval(a).k - sw.eval(b).k) / (2 * h);
    }
    CHECK((sw.grad_K(m) - fd).norm() <= 1e-6 * (1.0 + fd.norm()));
  }
}

TEST_CASE("Fourier profiles must stay positive") {
  CHECK_THROWS_AS(RadialProfile::fourier(0.5, {0.8}, {}).sampled_min_radius(), LabError);
}

TEST_CASE("sandwich kernel variants agree bitwise") {
  const ModelManifold M = ModelManifold::sol();
  const RadialProfile prof = RadialProfile::ellipse(Vec3(1.0, 2.0, 0.5), 3);
  const SandwichedHamiltonians sw(prof, calibrate(prof, M), 0.2);
  const SandwichParams prm = sandwich_params(sw);
  const std::size_t n = 1003;  // not a multiple of the vector width
  std::vector<double> mx(n), my(n), mz(n);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (std::size_t i = 0; i < n; ++i) {
    mx[i] = u(rng);
    my[i] = u(rng);
    mz[i] = u(rng) * 0.1;
  }
  std::vector<double> a(n), b(n), c(n), a2(n), b2(n), c2(n);
  sandwich_batch(prm, mx, my, mz, a, b, c, SimdLevel::Scalar);
  for (std::size_t i = 0; i < n; ++i) {
    const SandwichTriple t = sw.eval(Vec3(mx[i], my[i], mz[i]));
    CHECK(a[i] == doctest::Approx(t.g_minus).epsilon(1e-13));
    CHECK(b[i] == doctest::Approx(t.k).epsilon(1e-13));
    CHECK(c[i] == doctest::Approx(t.g_plus).epsilon(1e-13));
  }
  if (!cpu_has_avx2()) return;
  sandwich_batch(prm, mx, my, mz, a2, b2, c2, SimdLevel::Avx2);
  CHECK(std::memcmp(a.data(), a2.data(), n * sizeof(double)) == 0);
  CHECK(std::memcmp(b.data(), b2.data(), n * sizeof(double)) == 0);
  CHECK(std::memcmp(c.data(), c2.data(), n * sizeof(double)) == 0);
}
