// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "spherization/dynamics.hpp"
#include "spherization/errors.hpp"
#include "spherization/parallel.hpp"

namespace spherization {
namespace {

Vec3 base_of(const FrameState& y) { return {y[0], y[1], y[2]}; }

struct Guess {
  DeckElement deck;
  Eigen::Vector2d m;
};

struct Solved {
  bool ok = false;
  Eigen::Vector2d m = Eigen::Vector2d::Zero();
  double residual = 0.0;
};

Solved newton(const HamiltonianField& H, const BasePoint& q0, const BasePoint& q1, const Guess& g,
              const FiberChordOptions& opt) {
  const ModelManifold& M = H.manifold();
  const DeckElement ginv = M.inverse(g.deck);
  auto state = [&](const Eigen::Vector2d& m) {
    return FrameState{q0.x(), q0.y(), q0.z(), m.x(), m.y(), 0.0};
  };
  auto residual = [&](const FrameState& end) { return Eigen::Vector2d((M.apply(ginv, base_of(end)) - q1).head<2>()); };
  Solved out;
  try {
    Eigen::Vector2d m = g.m;
    std::vector<double> steps;
    Eigen::Vector2d r = residual(flow(H, state(m), opt.duration, opt.integrator, &steps));
    for (int it = 0; it <= opt.newton_max_iter; ++it) {
      if (r.norm() <= opt.newton_tol) {
        out = {true, m, r.norm()};
        return out;
      }
      if (it == opt.newton_max_iter) break;
      Eigen::Matrix2d J;
      constexpr double h = 1e-7;
      for (int i = 0; i < 2; ++i) {
        Eigen::Vector2d mp = m;
        mp[i] += h;
        J.col(i) = (residual(flow_frozen(H, state(mp), steps, opt.integrator.scheme)) - r) / h;
      }
      const Eigen::Vector2d dm = J.fullPivLu().solve(-r);
      if (!dm.allFinite()) break;
      bool accepted = false;
      for (double lam = 1.0; lam > 1e-4; lam *= 0.5) {
        const Eigen::Vector2d mn = m + lam * dm;
        std::vector<double> st;
        const Eigen::Vector2d rn = residual(flow(H, state(mn), opt.duration, opt.integrator, &st));
        if (rn.norm() < r.norm()) {
          m = mn;
          r = rn;
          steps = std::move(st);
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
    }
  } catch (const LabError& e) {
    if (e.category() != ErrorCategory::IntegrationDiverged) throw;
  }
  return out;
}

}  // namespace

std::vector<FiberChord> fiber_chords(const HamiltonianField& H, const BasePoint& q0, const BasePoint& q1,
                                     const FiberChordOptions& opt) {
  const ModelManifold& M = H.manifold();
  if (M.is_sol()) throw config_error("fiber chord search covers planar fibers only");
  if (!(opt.p_max > 0.0) || opt.radial < 2 || opt.angular < 8 || !(opt.duration > 0.0))
    throw config_error("invalid fiber chord search options");
  if (opt.output_intervals < 4 || opt.output_intervals % 4 != 0)
    throw config_error("chord output intervals must be a positive multiple of 4");

  // Polar grid: centre plus radial rings.
  std::vector<Eigen::Vector2d> ms{Eigen::Vector2d::Zero()};
  for (int i = 1; i <= opt.radial; ++i) {
    const double r = opt.p_max * i / opt.radial;
    for (int j = 0; j < opt.angular; ++j) {
      const double th = 2.0 * std::numbers::pi * j / opt.angular;
      ms.emplace_back(r * std::cos(th), r * std::sin(th));
    }
  }
  std::vector<Vec3> ends(ms.size());
  parallel_for(ms.size(), opt.workers, [&](std::size_t i) {
    ends[i] = base_of(flow(H, FrameState{q0.x(), q0.y(), q0.z(), ms[i].x(), ms[i].y(), 0.0}, opt.duration, opt.integrator));
  });
  auto id = [&](int ring, int j) { return ring == 0 ? 0 : 1 + (ring - 1) * opt.angular + (j % opt.angular); };
  std::vector<std::array<int, 3>> tris;
  for (int j = 0; j < opt.angular; ++j) tris.push_back({0, id(1, j), id(1, j + 1)});
  for (int i = 1; i < opt.radial; ++i) {
    for (int j = 0; j < opt.angular; ++j) {
      tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }

  std::vector<Guess> guesses;
  std::map<DeckElement, std::vector<Eigen::Vector2d>> pending;
  for (const auto& t : tris) {
    Vec3 lo = ends[t[0]], hi = ends[t[0]];
    for (int v : t) {
      lo = lo.cwiseMin(ends[v]);
      hi = hi.cwiseMax(ends[v]);
    }
    const Vec3 pad = opt.barycentric_slack * (hi - lo).cwiseMax(1e-9);
    Vec3 blo = lo - pad, bhi = hi + pad;
    blo.z() = -1.0;
    bhi.z() = 1.0;
    Eigen::Matrix2d E;
    E.col(0) = (ends[t[1]] - ends[t[0]]).head<2>();
    E.col(1) = (ends[t[2]] - ends[t[0]]).head<2>();
    const Eigen::FullPivLU<Eigen::Matrix2d> lu(E);
    if (lu.rank() < 2) continue;
    double pdiam = 0.0;
    for (int a = 0; a < 3; ++a) pdiam = std::max(pdiam, (ms[t[a]] - ms[t[(a + 1) % 3]]).norm());
    for (const Lift& L : M.lifts_in_box(q1, blo, bhi)) {
      const Eigen::Vector2d w = lu.solve(Eigen::Vector2d((L.point - ends[t[0]]).head<2>()));
      const double w0 = 1.0 - w.sum();
      if (std::min({w0, w[0], w[1]}) < -opt.barycentric_slack) continue;
      const Eigen::Vector2d m = w0 * ms[t[0]] + w[0] * ms[t[1]] + w[1] * ms[t[2]];
      auto& seen = pending[L.deck];
      const bool dup = std::any_of(seen.begin(), seen.end(), [&](const auto& o) { return (o - m).norm() <= 2.0 * pdiam; });
      if (dup) continue;
      seen.push_back(m);
      guesses.push_back({L.deck, m});
    }
  }

  std::vector<Solved> solved(guesses.size());
  parallel_for(guesses.size(), opt.workers, [&](std::size_t i) { solved[i] = newton(H, q0, q1, guesses[i], opt); });
  std::vector<FiberChord> out;
  for (std::size_t i = 0; i < guesses.size(); ++i) {
    if (!solved[i].ok) continue;
    const Vec3 p0(solved[i].m.x(), solved[i].m.y(), 0.0);
    const bool dup = std::any_of(out.begin(), out.end(), [&](const FiberChord& c) {
      return c.deck == guesses[i].deck && (c.p0 - p0).norm() <= opt.dedup_radius;
    });
    if (!dup) out.push_back({p0, guesses[i].deck, {}, solved[i].residual});
  }
  std::sort(out.begin(), out.end(), [](const FiberChord& a, const FiberChord& b) {
    const double na = a.p0.norm(), nb = b.p0.norm();
    return na != nb ? na < nb : a.deck < b.deck;
  });
  IntegratorConfig cfg = opt.integrator;
  cfg.output_dt = opt.duration / opt.output_intervals;
  parallel_for(out.size(), opt.workers, [&](std::size_t i) {
    out[i].traj = integrate(H, CotangentPoint{q0, M.from_frame(q0, out[i].p0)}, opt.duration, cfg);
  });
  return out;
}

}  // namespace spherization
