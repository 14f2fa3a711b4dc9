// SPDX-License-Identifier: Apache-2.0
#include "spherization/sol_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "spherization/errors.hpp"
#include "spherization/parallel.hpp"

namespace spherization {

SolLevel::SolLevel(double k_, ModelManifold m) : k(k_), manifold(std::move(m)) {
  if (!(k > 0.0)) throw config_error("Sol energy level k must be positive");
  if (!manifold.is_sol()) throw config_error("Sol level needs the Sol quotient");
}

EulerState momentum_map(const CotangentPoint& x) {
  const double ez = std::exp(x.q.z());
  return {ez * x.p.x(), x.p.y() / ez, x.p.z()};
}

CotangentPoint inverse_momentum_map(const BasePoint& q, const EulerState& M) {
  const double ez = std::exp(q.z());
  return {q, Vec3(M.x() / ez, ez * M.y(), M.z())};
}

double sol_hamiltonian(const CotangentPoint& x) {
  const double ez = std::exp(x.q.z());
  const double a = ez * (x.p.x() + 1.0 / ez);
  const double b = x.p.y() / ez;
  return 0.5 * (a * a + b * b + x.p.z() * x.p.z());
}

EulerState euler_field(const EulerState& M) {
  return {M.x() * M.z(), -M.y() * M.z(), M.y() * M.y() - M.x() * (M.x() + 1.0)};
}

double level_origin_gap(double k) { return std::abs(std::sqrt(2.0 * k) - 1.0); }

EulerState fixed_point_plus(double k) {
  if (k < 0.5) throw config_error("p_+ exists only for k >= 1/2");
  return {0.0, 0.0, std::sqrt(2.0 * k - 1.0)};
}

double entropy_closed_form(double k) {
  if (!(k > 0.0)) throw config_error("k must be positive");
  return k > 0.5 ? std::sqrt(2.0 * k - 1.0) : 0.0;
}

LyapunovEstimate lyapunov_from_samples(const std::vector<double>& t, const std::vector<double>& Mz, double burn) {
  if (t.size() != Mz.size()) throw config_error("time and M_z samples differ in length");
  if (!(burn >= 0.0 && burn < 1.0)) throw config_error("burn-in fraction must lie in [0, 1)");
  if (t.size() < 2 || !(t.back() > t.front())) throw config_error("trajectory too short for a Lyapunov estimate");
  const double t0 = t.front() + burn * (t.back() - t.front());
  std::size_t i0 = std::lower_bound(t.begin(), t.end(), t0) - t.begin();
  if (i0 + 2 > t.size()) throw config_error("trajectory too short after burn-in");
  LyapunovEstimate est{0.0, t[i0], {}};
  const double span = t.back() - t[i0];
  double integral = 0.0;
  int next_checkpoint = 1;
  for (std::size_t i = i0 + 1; i < t.size(); ++i) {
    integral += 0.5 * (Mz[i] + Mz[i - 1]) * (t[i] - t[i - 1]);
    const double elapsed = t[i] - t[i0];
    while (next_checkpoint <= 10 && elapsed >= span * next_checkpoint / 10.0 * (1.0 - 1e-12)) {
      est.partial.push_back(std::abs(integral / elapsed));
      ++next_checkpoint;
    }
  }
  est.value = std::abs(integral / span);
  return est;
}

LyapunovEstimate lyapunov_plus(const Trajectory& traj, double burn) {
  std::vector<double> mz(traj.frame.size());
  for (std::size_t i = 0; i < mz.size(); ++i) mz[i] = traj.frame[i].z();
  return lyapunov_from_samples(traj.times, mz, burn);
}

HamiltonianField sol_field(const ModelManifold& M) {
  if (!M.is_sol()) throw config_error("Sol Hamiltonian needs the Sol quotient");
  return {M, std::make_shared<SolMagneticHamiltonian>()};
}

CotangentPoint sample_level_point(const ModelManifold& M, double k, const std::array<double, 5>& u) {
  const double zc = 2.0 * u[0] - 1.0;
  const double phi = 2.0 * std::numbers::pi * u[1];
  const double s = std::sqrt(std::max(0.0, 1.0 - zc * zc));
  const double r = std::sqrt(2.0 * k);
  const EulerState m(-1.0 + r * s * std::cos(phi), r * s * std::sin(phi), r * zc);
  return inverse_momentum_map(M.domain_point(Vec3(u[2], u[3], u[4])), m);
}

std::vector<CotangentPoint> sample_level(const ModelManifold& M, double k, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<CotangentPoint> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::array<double, 5> u{};
    for (double& v : u) v = std::generate_canonical<double, 53>(rng);
    out.push_back(sample_level_point(M, k, u));
  }
  return out;
}

std::vector<LyapunovEstimate> lyapunov_ensemble(const ModelManifold& M, const std::vector<CotangentPoint>& starts,
                                                double T, const IntegratorConfig& cfg, double burn, int workers) {
  const HamiltonianField H = sol_field(M);
  std::vector<LyapunovEstimate> out(starts.size());
  parallel_for(starts.size(), workers, [&](std::size_t i) {
    out[i] = lyapunov_plus(integrate(H, starts[i], T, cfg), burn);
  });
  return out;
}

}  // namespace spherization
