// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "mesh_split.hpp"
#include "spherization/entropy.hpp"
#include "spherization/errors.hpp"
#include "spherization/parallel.hpp"

namespace spherization {
namespace {

Vec3 base_of(const FrameState& y) { return {y[0], y[1], y[2]}; }

struct Candidate {
  DeckElement deck;
  Vec3 u;
  double t;
};

struct Refined {
  bool ok = false;
  Vec3 u = Vec3::Zero();
  double t = 0.0;
  double residual = 0.0;
};

/// Parameter chart around an initial direction: one angle offset on the
/// circle, two tangent offsets on the sphere.
class DirectionChart {
 public:
  DirectionChart(const Vec3& u0, int d) : d_(d), u0_(u0.normalized()) {
    if (d == 2) {
      theta0_ = std::atan2(u0.y(), u0.x());
    } else {
      const Vec3 ref = std::abs(u0_.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
      e1_ = u0_.cross(ref).normalized();
      e2_ = u0_.cross(e1_);
    }
  }
  Vec3 operator()(const Eigen::Vector2d& a) const {
    if (d_ == 2) return {std::cos(theta0_ + a[0]), std::sin(theta0_ + a[0]), 0.0};
    return (u0_ + a[0] * e1_ + a[1] * e2_).normalized();
  }

 private:
  int d_;
  Vec3 u0_;
  double theta0_ = 0.0;
  Vec3 e1_, e2_;
};

class Shooter {
 public:
  Shooter(const FiberSurface& S, const BasePoint& q0, const BasePoint& q1, const CensusOptions& opt)
      : S_(S), H_(S.field()), M_(H_.manifold()), q0_(q0), q1_(q1), opt_(opt), d_(M_.dim()) {}

  Refined refine(const Candidate& c) const {
    const DirectionChart chart(c.u, d_);
    const DeckElement ginv = M_.inverse(c.deck);
    const int np = d_ - 1;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(d_);
    x[np] = std::clamp(c.t, 1e-6, opt_.T);

    auto split = [&](const Eigen::VectorXd& v) {
      Eigen::Vector2d a = Eigen::Vector2d::Zero();
      for (int i = 0; i < np; ++i) a[i] = v[i];
      return a;
    };
    struct Eval {
      Eigen::VectorXd r;
      FrameState y0, end;
      std::vector<double> steps;
    };
    auto residual_of = [&](const FrameState& end) {
      const Vec3 local = M_.apply(ginv, base_of(end)) - q1_;
      return Eigen::VectorXd(local.head(d_));
    };
    auto eval = [&](const Eigen::VectorXd& v) {
      Eval e;
      e.y0 = H_.to_state(S_.point(q0_, chart(split(v))));
      e.end = flow(H_, e.y0, v[np], opt_.integrator, &e.steps);
      e.r = residual_of(e.end);
      return e;
    };

    Refined out;
    try {
      Eval cur = eval(x);
      for (int it = 0; it <= opt_.newton_max_iter; ++it) {
        const double rn = cur.r.norm();
        if (rn <= opt_.newton_tol) {
          out.ok = x[np] <= opt_.T && x[np] > 0.0;
          out.u = chart(split(x));
          out.t = x[np];
          out.residual = rn;
          return out;
        }
        if (it == opt_.newton_max_iter) break;
        Eigen::MatrixXd J(d_, d_);
        constexpr double h = 1e-7;
        for (int i = 0; i < np; ++i) {
          Eigen::VectorXd xp = x;
          xp[i] += h;
          const FrameState y0 = H_.to_state(S_.point(q0_, chart(split(xp))));
          J.col(i) = (residual_of(flow_frozen(H_, y0, cur.steps, opt_.integrator.scheme)) - cur.r) / h;
        }
        // Deck maps are affine in the base point, so the time column is exact.
        const FrameState rate = H_.frame_rhs(cur.end);
        const Vec3 qe = base_of(cur.end);
        const Vec3 dq = M_.apply(ginv, Vec3(qe + Vec3(rate[0], rate[1], rate[2]))) - M_.apply(ginv, qe);
        J.col(np) = dq.head(d_);
        const Eigen::VectorXd dx = J.partialPivLu().solve(-cur.r);
        if (!dx.allFinite()) break;
        bool accepted = false;
        for (double lam = 1.0; lam > 1e-4; lam *= 0.5) {
          Eigen::VectorXd xn = x + lam * dx;
          if (!(xn[np] > 0.0) || xn[np] > 1.5 * opt_.T + 1.0) continue;
          if (np > 0 && split(xn).norm() > 1.0) continue;
          Eval trial = eval(xn);
          if (trial.r.norm() < rn) {
            x = xn;
            cur = std::move(trial);
            accepted = true;
            break;
          }
        }
        if (!accepted) break;
      }
    } catch (const LabError& e) {
      if (e.category() != ErrorCategory::IntegrationDiverged) throw;
    }
    out.ok = false;
    out.t = -1.0;  // marks a divergence rather than a horizon miss
    return out;
  }

 private:
  const FiberSurface& S_;
  const HamiltonianField& H_;
  const ModelManifold& M_;
  BasePoint q0_, q1_;
  const CensusOptions& opt_;
  int d_;
};

struct MeshVertex {
  Vec3 u;
  FrameState prev, cur;
};

}  // namespace

std::uint64_t ChordCensus::nu(double t) const {
  return static_cast<std::uint64_t>(std::upper_bound(records.begin(), records.end(), t,
                                                     [](double v, const ChordRecord& r) { return v < r.arrival_time; }) -
                                    records.begin());
}

BasePoint jitter_target(const ModelManifold& M, const BasePoint& q1, double magnitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  BasePoint q = q1;
  for (int i = 0; i < M.dim(); ++i) q[i] += magnitude * (2.0 * std::generate_canonical<double, 53>(rng) - 1.0);
  return q;
}

ChordCensus chord_census(const FiberSurface& S, const BasePoint& q0, const BasePoint& q1, const CensusOptions& opt) {
  if (!(opt.T > 0.0) || !std::isfinite(opt.T)) throw config_error("census horizon T must be positive");
  if (opt.resolution < 64) throw config_error("census resolution must be at least 64");
  if (!(opt.slab_dt > 0.0) || !(opt.refine_threshold > 0.0)) throw config_error("census slab and threshold must be positive");
  const HamiltonianField& H = S.field();
  const ModelManifold& M = H.manifold();
  const int d = M.dim();

  ChordCensus out;
  out.q0 = q0;
  out.q1 = q1;
  out.T = opt.T;

  MeshedSubmanifold mesh = fiber_mesh(S, q0, opt.resolution);
  std::vector<MeshVertex> verts;
  for (std::size_t i = 0; i < mesh.params.size(); ++i) {
    const FrameState y = H.to_state(mesh.vertices[i]);
    verts.push_back({mesh.params[i], y, y});
  }
  SplitMesh cells(d - 1, mesh.simplices);
  const Shooter shooter(S, q0, q1, opt);
  std::map<DeckElement, std::vector<std::size_t>> by_deck;  // indices into out.records

  const auto nslabs = static_cast<std::size_t>(std::ceil(opt.T / opt.slab_dt - 1e-9));
  for (std::size_t k = 0; k < nslabs && !out.truncated; ++k) {
    const double t0 = static_cast<double>(k) * opt.slab_dt;
    const double t1 = std::min(opt.T, static_cast<double>(k + 1) * opt.slab_dt);
    parallel_for(verts.size(), opt.workers,
                 [&](std::size_t i) { verts[i].cur = flow(H, verts[i].prev, t1 - t0, opt.integrator); });

    // Refine until every base-image edge is short at t1.
    cells.mark_all_dirty();
    for (;;) {
      const auto order = cells.long_edges([&](int a, int b) {
        return M.local_difference(base_of(verts[a].cur), base_of(verts[b].cur)).norm() > opt.refine_threshold;
      });
      if (order.empty()) break;
      if (verts.size() + order.size() > opt.vertex_budget) {
        out.truncated = true;
        out.truncation_reason = "vertex budget";
        break;
      }
      const std::size_t base = verts.size();
      for (const auto& [a, b] : order) verts.push_back({mesh.midpoint(verts[a].u, verts[b].u), {}, {}});
      parallel_for(order.size(), opt.workers, [&](std::size_t e) {
        MeshVertex& v = verts[base + e];
        const FrameState y0 = H.to_state(S.point(q0, v.u));
        v.prev = flow(H, y0, t0, opt.integrator);
        v.cur = flow(H, v.prev, t1 - t0, opt.integrator);
      });
      cells.split(order, static_cast<int>(base));
    }
    out.max_vertices = std::max(out.max_vertices, verts.size());
    if (out.truncated) break;

    // Detection: split each prism (cell x [t0, t1]) into simplices and test the
    // target lifts against their base images.
    struct Node {
      Vec3 q;
      Vec3 u;
      double t;
    };
    std::vector<Candidate> cands;
    auto node = [&](int v, bool top) {
      return Node{base_of(top ? verts[v].cur : verts[v].prev), verts[v].u, top ? t1 : t0};
    };
    auto test = [&](const std::vector<Node>& s) {
      Vec3 lo = s[0].q, hi = s[0].q;
      for (const Node& n : s) {
        lo = lo.cwiseMin(n.q);
        hi = hi.cwiseMax(n.q);
      }
      const Vec3 pad = opt.barycentric_slack * (hi - lo).cwiseMax(1e-9);
      Vec3 blo = lo - pad, bhi = hi + pad;
      if (d == 2) {
        blo.z() = -1.0;
        bhi.z() = 1.0;
      }
      Eigen::MatrixXd E(d, d);
      for (int i = 0; i < d; ++i) E.col(i) = (s[i + 1].q - s[0].q).head(d);
      const Eigen::FullPivLU<Eigen::MatrixXd> lu(E);
      if (lu.rank() < d) return;
      double pdiam = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i)
        for (std::size_t j = i + 1; j < s.size(); ++j) pdiam = std::max(pdiam, (s[i].u - s[j].u).norm());
      for (const Lift& L : M.lifts_in_box(q1, blo, bhi)) {
        const Eigen::VectorXd w = lu.solve(Eigen::VectorXd((L.point - s[0].q).head(d)));
        double w0 = 1.0 - w.sum(), wmin = w0;
        for (int i = 0; i < d; ++i) wmin = std::min(wmin, w[i]);
        if (wmin < -opt.barycentric_slack) continue;
        Vec3 u = w0 * s[0].u;
        double t = w0 * s[0].t;
        for (int i = 0; i < d; ++i) {
          u += w[i] * s[i + 1].u;
          t += w[i] * s[i + 1].t;
        }
        if (u.norm() < 1e-9) continue;
        u.normalize();
        // Skip candidates that duplicate a known chord or a pending candidate.
        const double ru = 2.0 * pdiam + 1e-9, rt = 2.0 * (t1 - t0);
        auto near = [&](const Vec3& u2, double t2) { return (u - u2).norm() <= ru && std::abs(t - t2) <= rt; };
        bool dup = false;
        if (auto it = by_deck.find(L.deck); it != by_deck.end()) {
          for (std::size_t r : it->second) dup = dup || near(out.records[r].start_direction, out.records[r].arrival_time);
        }
        for (const Candidate& c : cands) dup = dup || (c.deck == L.deck && near(c.u, c.t));
        if (!dup) cands.push_back({L.deck, u, t});
      }
    };
    for (const auto& c : cells.cells()) {
      if (d == 2) {
        test({node(c[0], false), node(c[1], false), node(c[1], true)});
        test({node(c[0], false), node(c[1], true), node(c[0], true)});
      } else {
        std::array<int, 3> v{c[0], c[1], c[2]};
        std::sort(v.begin(), v.end());
        const Node a0 = node(v[0], false), b0 = node(v[1], false), c0 = node(v[2], false);
        const Node a1 = node(v[0], true), b1 = node(v[1], true), c1 = node(v[2], true);
        test({a0, b0, c0, c1});
        test({a0, b0, b1, c1});
        test({a0, a1, b1, c1});
      }
    }
    out.candidates += cands.size();

    std::vector<Refined> refined(cands.size());
    parallel_for(cands.size(), opt.workers, [&](std::size_t i) { refined[i] = shooter.refine(cands[i]); });
    for (std::size_t i = 0; i < cands.size(); ++i) {
      const Refined& r = refined[i];
      if (!r.ok) {
        if (r.t < 0.0) ++out.newton_failures;
        continue;
      }
      auto& list = by_deck[cands[i].deck];
      bool dup = false;
      for (std::size_t j : list) {
        const ChordRecord& o = out.records[j];
        dup = dup || (o.start_direction - r.u).norm() + std::abs(o.arrival_time - r.t) <= opt.dedup_radius;
      }
      if (dup) continue;
      list.push_back(out.records.size());
      out.records.push_back({r.u, r.t, cands[i].deck, r.residual});
    }
    if (out.records.size() > opt.chord_budget) {
      out.truncated = true;
      out.truncation_reason = "chord budget";
    }
    // Chords found in this slab with arrival beyond t1 belong to later slabs and
    // are already registered; the horizon advances only on completed slabs.
    out.horizon_reached = out.truncated ? t0 : t1;
    for (MeshVertex& v : verts) v.prev = v.cur;
  }

  std::stable_sort(out.records.begin(), out.records.end(),
                   [](const ChordRecord& a, const ChordRecord& b) { return a.arrival_time < b.arrival_time; });
  const auto tmax = static_cast<int>(std::floor(out.horizon_reached + 1e-9));
  for (int t = 1; t <= tmax; ++t) out.nu_series.push_back(out.nu(t));
  return out;
}

MppResult mpp_estimate(const FiberSurface& S, int grid, const CensusOptions& opt, std::size_t fit_window,
                       std::uint64_t seed) {
  if (grid < 1) throw config_error("mpp grid must be at least 1");
  const ModelManifold& M = S.field().manifold();
  std::mt19937_64 rng(seed);
  auto draw = [&] {
    Vec3 c;
    for (int i = 0; i < 3; ++i) c[i] = std::generate_canonical<double, 53>(rng);
    return M.domain_point(c);
  };
  std::vector<BasePoint> qs, qps;
  for (int i = 0; i < grid; ++i) qs.push_back(draw());
  for (int i = 0; i < grid; ++i) qps.push_back(draw());
  MppResult res;
  std::size_t len = static_cast<std::size_t>(std::floor(opt.T + 1e-9));
  for (const BasePoint& q : qs) {
    for (const BasePoint& qp : qps) {
      res.censuses.push_back(chord_census(S, q, qp, opt));
      len = std::min(len, res.censuses.back().nu_series.size());
    }
  }
  const double weight = 1.0 / static_cast<double>(res.censuses.size());
  for (std::size_t t = 0; t < len; ++t) {
    double mean = 0.0;
    for (const ChordCensus& c : res.censuses) mean += weight * static_cast<double>(c.nu_series[t]);
    res.t.push_back(static_cast<double>(t + 1));
    res.mean_nu.push_back(mean);
  }
  // Fit over the trailing window of positive averages.
  std::vector<double> tx, ty;
  for (std::size_t i = 0; i < len; ++i) {
    if (res.mean_nu[i] > 0.0) {
      tx.push_back(res.t[i]);
      ty.push_back(res.mean_nu[i]);
    }
  }
  if (ty.size() >= 3) res.fit = fit_exponential_rate(tx, ty, std::min(fit_window, ty.size()));
  return res;
}

}  // namespace spherization
