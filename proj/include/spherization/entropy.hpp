// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "spherization/dynamics.hpp"

namespace spherization {

enum class Verdict { Exponential, Polynomial, Inconclusive };
std::string verdict_name(Verdict v);

struct GrowthFit {
  double rate = 0.0;
  double rate_stderr = 0.0;
  /// Abscissae of the first and last fitted points.
  double window_min = 0.0;
  double window_max = 0.0;
  /// RMS residuals of the semilog and log-log fits.
  double residual = 0.0;
  double loglog_residual = 0.0;
  double loglog_slope = 0.0;
  Verdict verdict = Verdict::Inconclusive;
};

/// Least-squares slope of log(y) against x over the trailing `window` points.
/// Polynomial when the log-log fit beats the semilog fit by a factor 2;
/// otherwise exponential when the slope exceeds 3 standard errors and 0.05.
GrowthFit fit_exponential_rate(const std::vector<double>& x, const std::vector<double>& y, std::size_t window);
/// Abscissa = index.
GrowthFit fit_exponential_rate(const std::vector<double>& series, std::size_t window);

/// The fiber slice {h(m) = level} of a level set, parameterized by unit frame
/// directions. Requires h(0) < level, so every ray from the origin meets it once.
class FiberSurface {
 public:
  FiberSurface(HamiltonianField H, double level);

  const HamiltonianField& field() const { return H_; }
  double level() const { return level_; }
  int dim() const { return H_.manifold().dim(); }

  /// Radius along unit frame direction u.
  double radius(const Vec3& u) const;
  Vec3 frame_point(const Vec3& u) const { return radius(u) * u; }
  CotangentPoint point(const BasePoint& q, const Vec3& u) const;

 private:
  HamiltonianField H_;
  double level_;
};

/// Unit vectors and triangles of the smallest icosphere with at least
/// `min_vertices` vertices.
struct SphereMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
};
SphereMesh icosphere(std::size_t min_vertices);

/// j-dimensional simplicial submanifold of T*M (j = 1 polylines, j = 2
/// triangulated surfaces). Vertices keep their initial parameter so refinement
/// can create new points from initial data.
struct MeshedSubmanifold {
  int j = 1;
  std::vector<Vec3> params;
  std::vector<CotangentPoint> vertices;
  /// Only the first j + 1 entries are used.
  std::vector<std::array<int, 3>> simplices;
  /// Point of the initial submanifold at a parameter.
  std::function<CotangentPoint(const Vec3&)> chart;
  /// Parameter midway between two parameters.
  std::function<Vec3(const Vec3&, const Vec3&)> midpoint;
};

/// Fiber circle (d = 2) or fiber sphere (d = 3) of a fiber surface.
MeshedSubmanifold fiber_mesh(const FiberSurface& S, const BasePoint& q0, std::size_t resolution);

/// Edge length in the product of the base metric (midpoint frame) and the
/// frame fiber metric.
double sasaki_distance(const ModelManifold& M, const FrameState& a, const FrameState& b);
/// Sum of simplex j-volumes for vertex states `states`.
double mesh_volume(const ModelManifold& M, const MeshedSubmanifold& mesh, const std::vector<FrameState>& states);

struct VolumeGrowthResult {
  std::vector<double> volumes;  // index n = 0..n_reached
  std::vector<std::size_t> vertex_counts;
  GrowthFit fit;
  bool budget_exhausted = false;
  int n_reached = 0;
  std::size_t vertices = 0;
  double max_edge = 0.0;
};

struct VolumeGrowthOptions {
  int n_max = 12;
  double refine_threshold = 0.5;
  std::size_t vertex_budget = 200'000;
  std::size_t fit_window = 6;
  int workers = 1;
  IntegratorConfig integrator{};
};

/// Evolves the mesh by the time-1 map n_max times, splitting edges longer than
/// the threshold (new vertices are re-evolved from time 0). The fit is a
/// lower-bound estimate of entropy, labelled inconclusive if the budget runs out.
VolumeGrowthResult volume_growth(const HamiltonianField& H, const MeshedSubmanifold& initial,
                                 const VolumeGrowthOptions& opt);

struct ChordRecord {
  Vec3 start_direction;
  double arrival_time = 0.0;
  DeckElement deck;
  double refinement_residual = 0.0;
};

struct CensusOptions {
  double T = 10.0;
  std::size_t resolution = 64;
  /// Thickness of the time slabs of the swept mesh.
  double slab_dt = 0.25;
  /// Max base-image edge length before a mesh edge is split.
  double refine_threshold = 0.5;
  std::size_t vertex_budget = 200'000;
  std::size_t chord_budget = 1'000'000;
  /// Barycentric slack when testing whether a target lift lies in a simplex.
  double barycentric_slack = 0.25;
  double newton_tol = 1e-8;
  int newton_max_iter = 40;
  double dedup_radius = 1e-4;
  int workers = 1;
  IntegratorConfig integrator{};
};

struct ChordCensus {
  BasePoint q0;
  BasePoint q1;
  double T = 0.0;
  std::vector<ChordRecord> records;  // sorted by arrival time
  /// nu_t at t = 1, 2, ..., floor(horizon_reached).
  std::vector<std::uint64_t> nu_series;
  double horizon_reached = 0.0;
  bool truncated = false;
  std::string truncation_reason;
  std::size_t candidates = 0;
  std::size_t newton_failures = 0;
  std::size_t max_vertices = 0;

  std::uint64_t nu(double t) const;
};

/// Flow lines of H from the fiber slice S over q0 to lifts of q1 with arrival
/// time in (0, T].
ChordCensus chord_census(const FiberSurface& S, const BasePoint& q0, const BasePoint& q1, const CensusOptions& opt);

/// q1 plus a seeded uniform offset of size `magnitude` in each base coordinate.
BasePoint jitter_target(const ModelManifold& M, const BasePoint& q1, double magnitude, std::uint64_t seed);

struct MppResult {
  std::vector<double> t;
  std::vector<double> mean_nu;
  GrowthFit fit;
  std::vector<ChordCensus> censuses;
};

/// Average of nu_t over a grid x grid sample of (q, q') pairs of the
/// fundamental domain, with (1/t) log of the average fitted in t.
MppResult mpp_estimate(const FiberSurface& S, int grid, const CensusOptions& opt, std::size_t fit_window,
                       std::uint64_t seed);

}  // namespace spherization
