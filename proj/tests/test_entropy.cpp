// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <random>

#include "spherization/entropy.hpp"
#include "spherization/errors.hpp"
#include "spherization/sol_model.hpp"

using namespace spherization;

namespace {

std::uint64_t lattice_points(const Eigen::Vector2d& d, double t) {
  std::uint64_t n = 0;
  for (int i = -40; i <= 40; ++i)
    for (int j = -40; j <= 40; ++j)
      if ((d + Eigen::Vector2d(i, j)).norm() <= t) ++n;
  return n;
}

FiberSurface torus_reeb() {
  const ModelManifold T = ModelManifold::torus();
  return {HamiltonianField(T, std::make_shared<ProfileHamiltonian>(RadialProfile::round(2), 0.5)), 0.5};
}

}  // namespace

TEST_CASE("rate fits") {
  std::vector<double> e, p, x, noisy;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n = 0; n < 20; ++n) {
    e.push_back(std::exp(0.7 * n));
    x.push_back(n + 1.0);
    p.push_back(x.back() * x.back());
    noisy.push_back(std::exp(0.5 * n) * (1.0 + 0.1 * u(rng)));
  }
  const GrowthFit fe = fit_exponential_rate(e, 8);
  CHECK(fe.rate == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(fe.verdict == Verdict::Exponential);
  const GrowthFit fp = fit_exponential_rate(x, p, 8);
  CHECK(fp.verdict == Verdict::Polynomial);
  CHECK(fp.loglog_slope == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(std::abs(fit_exponential_rate(noisy, 12).rate - 0.5) <= 0.05);
  CHECK_THROWS_AS(fit_exponential_rate(std::vector<double>{1.0, -1.0, 2.0}, 3), LabError);
  CHECK_THROWS_AS(fit_exponential_rate(std::vector<double>{1.0, 2.0}, 3), LabError);
}

TEST_CASE("icosphere meshes") {
  const SphereMesh s = icosphere(162);
  CHECK(s.vertices.size() == 162);
  CHECK(s.triangles.size() == 320);
  for (const Vec3& v : s.vertices) CHECK(v.norm() == doctest::Approx(1.0));
}

TEST_CASE("torus census equals the lattice count") {
  const FiberSurface S = torus_reeb();
  CensusOptions o;
  o.T = 10.0;
  const BasePoint q0(0.0, 0.0, 0.0);
  const BasePoint q1 = jitter_target(S.field().manifold(), BasePoint(0.5, 0.5, 0.0), 1e-3, 3);
  const ChordCensus c = chord_census(S, q0, q1, o);
  REQUIRE(c.nu_series.size() == 10);
  for (int t = 1; t <= 10; ++t) CHECK(c.nu_series[t - 1] == lattice_points((q1 - q0).head<2>(), t));
  for (std::size_t i = 1; i < c.nu_series.size(); ++i) CHECK(c.nu_series[i] >= c.nu_series[i - 1]);
  for (const auto& r : c.records) CHECK(r.refinement_residual <= 1e-8);

  o.T = 2.5;
  const ChordCensus c25 = chord_census(S, q0, BasePoint(0.5, 0.5, 0.0), o);
  CHECK(c25.nu(2.5) == lattice_points(Eigen::Vector2d(0.5, 0.5), 2.5));

  // Finite propagation speed: nothing arrives before the fiber distance.
  o.T = 0.5;
  CHECK(chord_census(S, q0, BasePoint(0.5, 0.5, 0.0), o).records.empty());
}

TEST_CASE("doubling the resolution keeps every chord") {
  const FiberSurface S = torus_reeb();
  CensusOptions o;
  o.T = 6.0;
  const BasePoint q0(0.0, 0.0, 0.0), q1(0.37, 0.61, 0.0);
  const ChordCensus a = chord_census(S, q0, q1, o);
  o.resolution = 128;
  const ChordCensus b = chord_census(S, q0, q1, o);
  CHECK(a.records.size() == b.records.size());
}

TEST_CASE("census rejects small resolutions and bad horizons") {
  const FiberSurface S = torus_reeb();
  CensusOptions o;
  o.resolution = 32;
  CHECK_THROWS_AS(chord_census(S, BasePoint::Zero(), BasePoint(0.5, 0.5, 0.0), o), LabError);
  o.resolution = 64;
  o.T = -1.0;
  CHECK_THROWS_AS(chord_census(S, BasePoint::Zero(), BasePoint(0.5, 0.5, 0.0), o), LabError);
}

TEST_CASE("volume growth on the torus and for the static flow") {
  const FiberSurface S = torus_reeb();
  const ModelManifold& T = S.field().manifold();
  const MeshedSubmanifold mesh = fiber_mesh(S, BasePoint::Zero(), 64);
  VolumeGrowthOptions o;
  o.n_max = 6;
  const VolumeGrowthResult still = volume_growth(HamiltonianField(T, std::make_shared<ZeroHamiltonian>()), mesh, o);
  for (double v : still.volumes) CHECK(v == doctest::Approx(still.volumes.front()).epsilon(1e-12));
  CHECK(still.fit.rate == doctest::Approx(0.0).scale(1.0));

  // Flat geodesic flow: the fiber circle over q0 maps to a closed curve of
  // length sqrt(1 + n^2) * 2 pi in the Sasaki product metric.
  const VolumeGrowthResult lin = volume_growth(S.field(), mesh, o);
  for (int n = 0; n <= 6; ++n) CHECK(lin.volumes[n] == doctest::Approx(2.0 * M_PI * std::sqrt(1.0 + n * n)).epsilon(0.02));
  o.refine_threshold = 0.25;
  const VolumeGrowthResult fine = volume_growth(S.field(), mesh, o);
  for (int n = 0; n <= 6; ++n) CHECK(std::abs(fine.volumes[n] / lin.volumes[n] - 1.0) <= 0.02);
}

TEST_CASE("volume budget exhaustion is flagged") {
  const ModelManifold M = ModelManifold::sol();
  const FiberSurface S(sol_field(M), 1.0);
  VolumeGrowthOptions o;
  o.n_max = 12;
  o.vertex_budget = 2000;
  const VolumeGrowthResult r = volume_growth(S.field(), fiber_mesh(S, BasePoint::Zero(), 162), o);
  CHECK(r.budget_exhausted);
  CHECK(r.n_reached < 12);
  CHECK(r.fit.verdict == Verdict::Inconclusive);
}

TEST_CASE("mpp on a single pair is the census fit") {
  const FiberSurface S = torus_reeb();
  CensusOptions o;
  o.T = 8.0;
  const MppResult r = mpp_estimate(S, 1, o, 5, 99);
  REQUIRE(r.censuses.size() == 1);
  for (std::size_t i = 0; i < r.mean_nu.size(); ++i) CHECK(r.mean_nu[i] == double(r.censuses[0].nu_series[i]));
}
