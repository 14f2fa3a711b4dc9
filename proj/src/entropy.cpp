// SPDX-License-Identifier: Apache-2.0
#include "spherization/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "mesh_split.hpp"
#include "spherization/errors.hpp"
#include "spherization/parallel.hpp"

namespace spherization {

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Exponential: return "exponential";
    case Verdict::Polynomial: return "polynomial";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

namespace {

struct LineFit {
  double slope, intercept, rms, slope_se;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw config_error("rate fit needs distinct abscissae");
  LineFit f{sxy / sxx, 0.0, 0.0, 0.0};
  f.intercept = my - f.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.rms = std::sqrt(ss / n);
  f.slope_se = x.size() > 2 ? std::sqrt(ss / (n - 2.0) / sxx) : 0.0;
  return f;
}

}  // namespace

GrowthFit fit_exponential_rate(const std::vector<double>& x, const std::vector<double>& y, std::size_t window) {
  if (x.size() != y.size()) throw config_error("rate fit series lengths differ");
  if (window < 3 || y.size() < window) throw config_error("rate fit needs length >= window >= 3");
  const std::size_t i0 = y.size() - window;
  std::vector<double> xs, ly, lx;
  for (std::size_t i = i0; i < y.size(); ++i) {
    if (!(y[i] > 0.0) || !std::isfinite(y[i])) throw config_error("rate fit needs positive entries");
    xs.push_back(x[i]);
    ly.push_back(std::log(y[i]));
  }
  GrowthFit g;
  g.window_min = xs.front();
  g.window_max = xs.back();
  const LineFit semi = least_squares(xs, ly);
  g.rate = semi.slope;
  g.rate_stderr = semi.slope_se;
  g.residual = semi.rms;
  const bool loglog_ok = std::all_of(xs.begin(), xs.end(), [](double v) { return v > 0.0; });
  if (loglog_ok) {
    for (double v : xs) lx.push_back(std::log(v));
    const LineFit ll = least_squares(lx, ly);
    g.loglog_slope = ll.slope;
    g.loglog_residual = ll.rms;
  } else {
    g.loglog_residual = std::numeric_limits<double>::infinity();
  }
  // A flat series is polynomial of degree zero.
  const bool flat = g.residual == 0.0 && g.rate == 0.0;
  if (flat || (loglog_ok && 2.0 * g.loglog_residual <= g.residual)) {
    g.verdict = Verdict::Polynomial;
  } else if (g.rate > 3.0 * g.rate_stderr && g.rate > 0.05) {
    g.verdict = Verdict::Exponential;
  }
  return g;
}

GrowthFit fit_exponential_rate(const std::vector<double>& series, std::size_t window) {
  std::vector<double> x(series.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = static_cast<double>(i);
  return fit_exponential_rate(x, series, window);
}

FiberSurface::FiberSurface(HamiltonianField H, double level) : H_(std::move(H)), level_(level) {
  if (!std::isfinite(level_)) throw config_error("fiber level must be finite");
  if (!(H_.value_frame(Vec3::Zero()) < level_))
    throw config_error("fiber level set does not enclose the fiber origin (not starshaped)");
}

double FiberSurface::radius(const Vec3& u) const {
  const FrameHamiltonian& h = H_.hamiltonian();
  const double s = H_.scale();
  if (dynamic_cast<const SolMagneticHamiltonian*>(&h)) {
    // s/2 |rho u + e1|^2 = level.
    return -u.x() + std::sqrt(u.x() * u.x() - 1.0 + 2.0 * level_ / s);
  }
  if (h.homogeneous_deg2()) return std::sqrt(level_ / H_.value_frame(u));
  double lo = 0.0, hi = 1.0;
  for (int i = 0; H_.value_frame(hi * u) < level_; ++i) {
    if (i > 200) throw config_error("fiber level set is unbounded along a ray");
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (H_.value_frame(mid * u) < level_ ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

CotangentPoint FiberSurface::point(const BasePoint& q, const Vec3& u) const {
  const ModelManifold& M = H_.manifold();
  Vec3 v = u;
  if (M.dim() == 2) v.z() = 0.0;
  v.normalize();
  return {q, M.from_frame(q, frame_point(v))};
}

SphereMesh icosphere(std::size_t min_vertices) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  SphereMesh s;
  for (const auto& v : std::vector<Vec3>{{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                                         {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}})
    s.vertices.push_back(v.normalized());
  s.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                 {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                 {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  while (s.vertices.size() < min_vertices) {
    std::map<std::pair<int, int>, int> mids;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = mids.find(key);
      if (it != mids.end()) return it->second;
      s.vertices.push_back((s.vertices[a] + s.vertices[b]).normalized());
      const int id = static_cast<int>(s.vertices.size()) - 1;
      mids.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> next;
    for (const auto& tr : s.triangles) {
      const int a = mid(tr[0], tr[1]), b = mid(tr[1], tr[2]), c = mid(tr[2], tr[0]);
      next.push_back({tr[0], a, c});
      next.push_back({tr[1], b, a});
      next.push_back({tr[2], c, b});
      next.push_back({a, b, c});
    }
    s.triangles = std::move(next);
  }
  return s;
}

MeshedSubmanifold fiber_mesh(const FiberSurface& S, const BasePoint& q0, std::size_t resolution) {
  if (resolution < 3) throw config_error("fiber mesh resolution must be at least 3");
  MeshedSubmanifold mesh;
  mesh.chart = [S, q0](const Vec3& u) { return S.point(q0, u); };
  mesh.midpoint = [](const Vec3& a, const Vec3& b) {
    const Vec3 m = a + b;
    if (m.norm() < 1e-12) throw invariant_error("antipodal mesh edge");
    return Vec3(m.normalized());
  };
  if (S.dim() == 2) {
    mesh.j = 1;
    for (std::size_t i = 0; i < resolution; ++i) {
      const double th = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(resolution);
      mesh.params.emplace_back(std::cos(th), std::sin(th), 0.0);
      const int a = static_cast<int>(i), b = static_cast<int>((i + 1) % resolution);
      mesh.simplices.push_back({a, b, -1});
    }
  } else {
    mesh.j = 2;
    SphereMesh sm = icosphere(resolution);
    mesh.params = std::move(sm.vertices);
    mesh.simplices = std::move(sm.triangles);
  }
  for (const Vec3& u : mesh.params) mesh.vertices.push_back(mesh.chart(u));
  return mesh;
}

namespace {

using Vec6 = Eigen::Matrix<double, 6, 1>;

Vec6 sasaki_difference(const ModelManifold& M, const FrameState& a, const FrameState& b) {
  const Vec3 dq = M.local_difference(Vec3(a[0], a[1], a[2]), Vec3(b[0], b[1], b[2]));
  Vec6 d;
  d << dq, b[3] - a[3], b[4] - a[4], b[5] - a[5];
  return d;
}

double simplex_volume(const ModelManifold& M, int j, const std::array<int, 3>& s, const std::vector<FrameState>& st) {
  const Vec6 e1 = sasaki_difference(M, st[s[0]], st[s[1]]);
  if (j == 1) return e1.norm();
  const Vec6 e2 = sasaki_difference(M, st[s[0]], st[s[2]]);
  const double g = e1.squaredNorm() * e2.squaredNorm() - e1.dot(e2) * e1.dot(e2);
  return 0.5 * std::sqrt(std::max(0.0, g));
}

}  // namespace

double sasaki_distance(const ModelManifold& M, const FrameState& a, const FrameState& b) {
  return sasaki_difference(M, a, b).norm();
}

double mesh_volume(const ModelManifold& M, const MeshedSubmanifold& mesh, const std::vector<FrameState>& states) {
  double v = 0.0;
  for (const auto& s : mesh.simplices) v += simplex_volume(M, mesh.j, s, states);
  return v;
}

VolumeGrowthResult volume_growth(const HamiltonianField& H, const MeshedSubmanifold& initial,
                                 const VolumeGrowthOptions& opt) {
  if (opt.n_max < 1) throw config_error("volume growth needs n_max >= 1");
  if (!(opt.refine_threshold > 0.0)) throw config_error("refine threshold must be positive");
  if (opt.vertex_budget <= initial.vertices.size()) throw config_error("vertex budget must exceed the initial mesh");
  const ModelManifold& M = H.manifold();
  MeshedSubmanifold mesh = initial;
  SplitMesh cells(mesh.j, mesh.simplices);
  std::vector<FrameState> st(mesh.vertices.size());
  for (std::size_t i = 0; i < st.size(); ++i) st[i] = H.to_state(mesh.vertices[i]);

  VolumeGrowthResult res;
  auto too_long = [&](int a, int b) { return sasaki_distance(M, st[a], st[b]) > opt.refine_threshold; };
  res.volumes.push_back(mesh_volume(M, mesh, st));
  res.vertex_counts.push_back(mesh.vertices.size());
  for (int n = 1; n <= opt.n_max; ++n) {
    parallel_for(st.size(), opt.workers, [&](std::size_t i) { st[i] = flow(H, st[i], 1.0, opt.integrator); });
    cells.mark_all_dirty();
    for (;;) {
      const auto order = cells.long_edges(too_long);
      if (order.empty()) break;
      if (mesh.vertices.size() + order.size() > opt.vertex_budget) {
        res.budget_exhausted = true;
        break;
      }
      const std::size_t base = mesh.vertices.size();
      for (const auto& [a, b] : order) {
        const Vec3 u = mesh.midpoint(mesh.params[a], mesh.params[b]);
        mesh.params.push_back(u);
        mesh.vertices.push_back(mesh.chart(u));
      }
      st.resize(mesh.vertices.size());
      parallel_for(order.size(), opt.workers, [&](std::size_t e) {
        st[base + e] = flow(H, H.to_state(mesh.vertices[base + e]), static_cast<double>(n), opt.integrator);
      });
      cells.split(order, static_cast<int>(base));
    }
    if (res.budget_exhausted) break;
    mesh.simplices = cells.cells();
    res.volumes.push_back(mesh_volume(M, mesh, st));
    res.vertex_counts.push_back(mesh.vertices.size());
    res.n_reached = n;
  }
  mesh.simplices = cells.cells();
  res.vertices = mesh.vertices.size();
  for (const auto& s : mesh.simplices) {
    for (int k = 0; k < (mesh.j == 1 ? 1 : 3); ++k) {
      const int a = s[k], b = s[mesh.j == 1 ? 1 : (k + 1) % 3];
      res.max_edge = std::max(res.max_edge, sasaki_distance(M, st[a], st[b]));
    }
  }
  const std::size_t window = std::min(opt.fit_window, res.volumes.size());
  if (window >= 3) res.fit = fit_exponential_rate(res.volumes, window);
  if (res.budget_exhausted) res.fit.verdict = Verdict::Inconclusive;
  return res;
}

}  // namespace spherization
