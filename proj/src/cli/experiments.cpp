// SPDX-License-Identifier: Apache-2.0
#include "experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "spherization/dynamics.hpp"
#include "spherization/entropy.hpp"
#include "spherization/errors.hpp"
#include "spherization/growth.hpp"
#include "spherization/kernels.hpp"
#include "spherization/parallel.hpp"
#include "spherization/sol_model.hpp"
#include "spherization/starshape.hpp"

namespace spherization::cli {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

Csv& Csv::add(double v) {
  row_.push_back(format_number(v));
  return *this;
}
Csv& Csv::add(std::int64_t v) {
  row_.push_back(std::to_string(v));
  return *this;
}
Csv& Csv::add(std::uint64_t v) {
  row_.push_back(std::to_string(v));
  return *this;
}
Csv& Csv::add(const std::string& v) {
  row_.push_back(v);
  return *this;
}
void Csv::end_row() {
  if (row_.size() != header_.size()) throw invariant_error("CSV row width differs from its header");
  for (std::size_t i = 0; i < row_.size(); ++i) body_ += (i ? "," : "") + row_[i];
  body_ += '\n';
  row_.clear();
}
std::string Csv::str() const {
  std::string out;
  for (std::size_t i = 0; i < header_.size(); ++i) out += (i ? "," : "") + header_[i];
  return out + '\n' + body_;
}

void Context::write_csv(const std::string& name, const Csv& csv) {
  std::ofstream f(dir / name, std::ios::binary);
  f << csv.str();
  if (!f) throw config_error("cannot write " + (dir / name).string());
  files.push_back(name);
}

bool Context::check(const std::string& name, double value, const std::string& rel, double threshold) {
  bool pass = false;
  if (rel == "<=") pass = value <= threshold;
  else if (rel == ">=") pass = value >= threshold;
  else if (rel == "<") pass = value < threshold;
  else if (rel == ">") pass = value > threshold;
  else if (rel == "==") pass = value == threshold;
  checks.push_back({name, value, rel, threshold, pass});
  return pass;
}

std::uint64_t Context::subseed(std::string_view tag) const {
  // splitmix64 finalizer over seed ^ hash(tag).
  std::uint64_t z = seed ^ fnv1a(tag);
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

using json = nlohmann::ordered_json;

ModelManifold sol_manifold(const Config& c) {
  const auto a = c.ints("manifold.monodromy");
  return ModelManifold::sol(IntMatrix2{{a[0], a[1], a[2], a[3]}});
}

ModelManifold torus_manifold(const Config& c) {
  const auto b = c.reals("manifold.basis");
  Eigen::Matrix2d B;
  B << b[0], b[1], b[2], b[3];
  return ModelManifold::torus(B);
}

ModelManifold configured_manifold(const Config& c) {
  return c.text("manifold.kind") == "sol" ? sol_manifold(c) : torus_manifold(c);
}

RadialProfile make_profile(const Config& c, int dim) {
  const std::string kind = c.text("profile.kind");
  if (kind == "ellipse") {
    const auto a = c.reals("profile.axes");
    return RadialProfile::ellipse(Vec3(a[0], a[1], a[2]), dim);
  }
  if (kind == "fourier") return RadialProfile::fourier(c.real("profile.fourier_c0"), c.reals("profile.fourier_cos"), c.reals("profile.fourier_sin"));
  return RadialProfile::round(dim);
}

std::shared_ptr<SandwichedHamiltonians> make_sandwich(const Config& c, const ModelManifold& M) {
  const RadialProfile prof = make_profile(c, M.dim());
  const Calibration cal = calibrate(prof, M, c.real("sandwich.safety"));
  return std::make_shared<SandwichedHamiltonians>(prof, cal, c.real("sandwich.eps"));
}

IntegratorConfig make_integrator(const Config& c) {
  IntegratorConfig cfg;
  cfg.scheme = c.text("integrator.scheme") == "midpoint" ? Scheme::ImplicitMidpoint : Scheme::DormandPrince45;
  cfg.rel_tol = c.real("integrator.rel_tol");
  cfg.abs_tol = c.real("integrator.abs_tol");
  cfg.max_step = c.real("integrator.max_step");
  cfg.drift_abort = c.real("integrator.drift_abort");
  cfg.fixed_step = c.real("integrator.fixed_step");
  return cfg;
}

BasePoint base_point(const Config& c, const std::string& key, const ModelManifold& M) {
  const auto v = c.reals(key);
  return {v[0], v[1], M.is_sol() ? v[2] : 0.0};
}

json fit_json(const GrowthFit& f) {
  return {{"rate", f.rate},
          {"rate_stderr", f.rate_stderr},
          {"window", {f.window_min, f.window_max}},
          {"semilog_residual", f.residual},
          {"loglog_residual", std::isfinite(f.loglog_residual) ? json(f.loglog_residual) : json(nullptr)},
          {"loglog_slope", f.loglog_slope},
          {"verdict", verdict_name(f.verdict)}};
}

json simd_json() { return std::string(simd_level_name(active_simd_level())); }

// ---------------------------------------------------------------- Sol

struct FixedPointRun {
  double chi;
  double closed;
};

FixedPointRun fixed_point_run(const Config& c, const ModelManifold& M, double k) {
  IntegratorConfig cfg = make_integrator(c);
  cfg.output_dt = c.real("sol.output_dt");
  const CotangentPoint x0 = inverse_momentum_map(BasePoint::Zero(), fixed_point_plus(k));
  const Trajectory traj = integrate(sol_field(M), x0, c.real("sol.fixed_T"), cfg);
  return {lyapunov_plus(traj, c.real("sol.burn_in")).value, entropy_closed_form(k)};
}

std::vector<double> ensemble_run(Context& ctx, const ModelManifold& M, double k, const std::string& tag,
                                 std::vector<CotangentPoint>* starts_out = nullptr) {
  const Config& c = ctx.cfg;
  IntegratorConfig cfg = make_integrator(c);
  cfg.output_dt = c.real("sol.output_dt");
  const auto starts = sample_level(M, k, static_cast<std::size_t>(c.integer("sol.samples")), ctx.subseed(tag));
  const auto est = lyapunov_ensemble(M, starts, c.real("sol.T"), cfg, c.real("sol.burn_in"), ctx.workers);
  std::vector<double> chi;
  for (const auto& e : est) chi.push_back(e.value);
  if (starts_out) *starts_out = starts;
  return chi;
}

void sol_entropy(Context& ctx) {
  const Config& c = ctx.cfg;
  const ModelManifold M = sol_manifold(c);
  const double k = c.real("sol.k");
  const double closed = entropy_closed_form(k);
  ctx.results["k"] = k;
  ctx.results["closed_form"] = closed;

  Csv fixed({"k", "chi_plus", "closed_form", "abs_error"});
  if (k > 0.5) {
    const FixedPointRun fp = fixed_point_run(c, M, k);
    fixed.add(k).add(fp.chi).add(closed).add(std::abs(fp.chi - closed));
    fixed.end_row();
    ctx.results["fixed_point_chi"] = fp.chi;
    ctx.check("fixed_point_abs_error", std::abs(fp.chi - closed), "<=", 1e-3);
  }
  ctx.write_csv("fixed_point.csv", fixed);

  std::vector<CotangentPoint> starts;
  const auto chi = ensemble_run(ctx, M, k, "sol-ensemble", &starts);
  // Batched Euler reduction as an independent cross-check of the same averages.
  EulerBatch batch;
  for (const auto& x : starts) {
    const EulerState m = momentum_map(x);
    batch.mx.push_back(m.x());
    batch.my.push_back(m.y());
    batch.mz.push_back(m.z());
  }
  const double h = c.real("sol.kernel_step");
  const auto steps = static_cast<std::size_t>(std::llround(c.real("sol.T") / h));
  const auto burn = static_cast<std::size_t>(std::llround(c.real("sol.burn_in") * static_cast<double>(steps)));
  const auto chi_kernel = euler_mz_average(batch, h, steps, burn, active_simd_level());

  Csv ens({"sample", "chi_plus", "chi_kernel"});
  double chi_max = 0.0, chi_mean = 0.0, kernel_gap = 0.0;
  for (std::size_t i = 0; i < chi.size(); ++i) {
    ens.add(static_cast<std::uint64_t>(i)).add(chi[i]).add(chi_kernel[i]);
    ens.end_row();
    chi_max = std::max(chi_max, chi[i]);
    chi_mean += chi[i] / static_cast<double>(chi.size());
    kernel_gap = std::max(kernel_gap, std::abs(chi[i] - chi_kernel[i]));
  }
  ctx.write_csv("ensemble.csv", ens);
  ctx.results["ensemble"] = {{"samples", chi.size()},
                             {"T", c.real("sol.T")},
                             {"chi_mean", chi_mean},
                             {"chi_max", chi_max},
                             {"kernel_max_abs_difference", kernel_gap},
                             {"kernel", simd_json()}};
  if (k < 0.5) ctx.check("ensemble_max_chi", chi_max, "<=", 0.02);

  // Conservation over fixed_T on the first ensemble members.
  const auto ncons = std::min<std::size_t>(starts.size(), static_cast<std::size_t>(c.integer("sol.conservation_samples")));
  Csv cons({"sample", "energy_drift", "casimir_drift"});
  double e_max = 0.0, c_max = 0.0;
  std::vector<std::pair<double, double>> drifts(ncons);
  IntegratorConfig cfg = make_integrator(c);
  const HamiltonianField H = sol_field(M);
  parallel_for(ncons, ctx.workers, [&](std::size_t i) {
    const Trajectory tr = integrate(H, starts[i], c.real("sol.fixed_T"), cfg);
    const double c0 = tr.frame.front().x() * tr.frame.front().y();
    double dc = 0.0;
    for (const Vec3& m : tr.frame) dc = std::max(dc, std::abs(m.x() * m.y() - c0));
    drifts[i] = {tr.energy_drift, dc};
  });
  for (std::size_t i = 0; i < ncons; ++i) {
    cons.add(static_cast<std::uint64_t>(i)).add(drifts[i].first).add(drifts[i].second);
    cons.end_row();
    e_max = std::max(e_max, drifts[i].first);
    c_max = std::max(c_max, drifts[i].second);
  }
  ctx.write_csv("conservation.csv", cons);
  if (ncons > 0) {
    ctx.results["conservation"] = {{"T", c.real("sol.fixed_T")}, {"energy_drift_max", e_max}, {"casimir_drift_max", c_max}};
    ctx.check("energy_drift_max", e_max, "<=", 1e-8);
    ctx.check("casimir_drift_max", c_max, "<=", 1e-8);
  }
}

void sol_sweep(Context& ctx) {
  const Config& c = ctx.cfg;
  const ModelManifold M = sol_manifold(c);
  Csv csv({"k", "chi_plus", "closed_form", "ratio", "ensemble_mean", "ensemble_max"});
  json rows = json::array();
  for (double k : c.reals("sol.k_values")) {
    const auto chi = ensemble_run(ctx, M, k, "sol-sweep-" + format_number(k));
    double mean = 0.0, mx = 0.0;
    for (double v : chi) {
      mean += v / static_cast<double>(chi.size());
      mx = std::max(mx, v);
    }
    const double closed = entropy_closed_form(k);
    // Generic orbits on a supercritical level are periodic and average to
    // zero; the positive exponent lives on the invariant set over p_+.
    const double est = k > 0.5 ? fixed_point_run(c, M, k).chi : mean;
    const double ratio = closed > 0.0 ? est / closed : std::nan("");
    csv.add(k).add(est).add(closed).add(ratio).add(mean).add(mx);
    csv.end_row();
    rows.push_back({{"k", k}, {"chi_plus", est}, {"closed_form", closed}, {"ensemble_mean", mean}, {"ensemble_max", mx}});
    if (k > 0.5) ctx.check("k=" + format_number(k) + " fixed_point_abs_error", std::abs(est - closed), "<=", 1e-3);
    else if (k < 0.5) ctx.check("k=" + format_number(k) + " ensemble_max_chi", mx, "<=", 0.02);
  }
  ctx.results["sweep"] = rows;
  ctx.write_csv("sol_sweep.csv", csv);
}

// ---------------------------------------------------------------- census

struct SurfaceChoice {
  FiberSurface surface;
  std::string label;
};

SurfaceChoice census_surface(const Config& c, const ModelManifold& M, const std::string& which) {
  if (which == "sol-magnetic") return {FiberSurface(sol_field(M), c.real("sol.k")), "sol-magnetic"};
  auto h = std::make_shared<ProfileHamiltonian>(make_profile(c, M.dim()), 0.5);
  return {FiberSurface(HamiltonianField(M, h), 0.5), "reeb"};
}

CensusOptions census_options(const Config& c, int workers) {
  CensusOptions o;
  o.T = c.real("census.T");
  o.resolution = static_cast<std::size_t>(c.integer("census.resolution"));
  o.slab_dt = c.real("census.slab_dt");
  o.refine_threshold = c.real("census.refine_threshold");
  o.vertex_budget = static_cast<std::size_t>(c.integer("census.vertex_budget"));
  o.chord_budget = static_cast<std::size_t>(c.integer("census.chord_budget"));
  o.barycentric_slack = c.real("census.barycentric_slack");
  o.newton_tol = c.real("census.newton_tol");
  o.newton_max_iter = static_cast<int>(c.integer("census.newton_max_iter"));
  o.dedup_radius = c.real("census.dedup_radius");
  o.workers = workers;
  o.integrator = make_integrator(c);
  return o;
}

/// Lattice translates v with |q1 - q0 + v| <= t, by enumeration.
std::uint64_t lattice_count(const ModelManifold& M, const BasePoint& q0, const BasePoint& q1, double t) {
  const Eigen::Matrix2d& B = M.basis();
  const Eigen::Vector2d d = (q1 - q0).head<2>();
  const double smin = B.jacobiSvd().singularValues().minCoeff();
  const auto R = static_cast<std::int64_t>(std::ceil((t + d.norm()) / smin)) + 1;
  std::uint64_t n = 0;
  for (std::int64_t i = -R; i <= R; ++i)
    for (std::int64_t j = -R; j <= R; ++j)
      if ((d + B * Eigen::Vector2d(double(i), double(j))).norm() <= t) ++n;
  return n;
}

void chord_census_experiment(Context& ctx) {
  const Config& c = ctx.cfg;
  const ModelManifold M = configured_manifold(c);
  const auto sc = census_surface(c, M, c.text("census.hamiltonian"));
  const CensusOptions opt = census_options(c, ctx.workers);
  const auto pairs = static_cast<std::size_t>(c.integer("census.pairs"));

  std::vector<std::pair<BasePoint, BasePoint>> qs;
  if (pairs == 1) {
    qs.emplace_back(base_point(c, "census.q0", M),
                    jitter_target(M, base_point(c, "census.q1", M), c.real("census.jitter"), ctx.subseed("census-jitter")));
  } else {
    std::mt19937_64 rng(ctx.subseed("census-pairs"));
    auto draw = [&] {
      Vec3 u;
      for (int i = 0; i < 3; ++i) u[i] = std::generate_canonical<double, 53>(rng);
      return M.domain_point(u);
    };
    for (std::size_t i = 0; i < pairs; ++i) {
      const BasePoint a = draw();
      qs.emplace_back(a, draw());
    }
  }

  const bool oracle = !M.is_sol() && sc.label == "reeb" && c.text("profile.kind") == "round";
  Csv nu_csv({"pair", "t", "nu"});
  Csv chords({"pair", "arrival_time", "deck_m", "deck_n", "deck_l", "u_x", "u_y", "u_z", "residual"});
  json runs = json::array();
  bool truncated = false;
  for (std::size_t p = 0; p < qs.size(); ++p) {
    const ChordCensus cen = chord_census(sc.surface, qs[p].first, qs[p].second, opt);
    for (std::size_t i = 0; i < cen.nu_series.size(); ++i) {
      nu_csv.add(static_cast<std::uint64_t>(p)).add(static_cast<std::uint64_t>(i + 1)).add(cen.nu_series[i]);
      nu_csv.end_row();
    }
    double max_res = 0.0;
    for (const auto& r : cen.records) {
      chords.add(static_cast<std::uint64_t>(p)).add(r.arrival_time).add(r.deck.m).add(r.deck.n).add(r.deck.l);
      chords.add(r.start_direction.x()).add(r.start_direction.y()).add(r.start_direction.z()).add(r.refinement_residual);
      chords.end_row();
      max_res = std::max(max_res, r.refinement_residual);
    }
    json run = {{"q0", {qs[p].first.x(), qs[p].first.y(), qs[p].first.z()}},
                {"q1", {qs[p].second.x(), qs[p].second.y(), qs[p].second.z()}},
                {"chords", cen.records.size()},
                {"horizon_reached", cen.horizon_reached},
                {"truncated", cen.truncated},
                {"truncation_reason", cen.truncation_reason},
                {"candidates", cen.candidates},
                {"newton_failures", cen.newton_failures},
                {"max_vertices", cen.max_vertices},
                {"max_residual", max_res}};
    const std::string tag = qs.size() > 1 ? "pair " + std::to_string(p) + " " : "";
    ctx.check(tag + "max_refinement_residual", max_res, "<=", opt.newton_tol);

    // Fit over t >= fit_t_min with nu_t > 0.
    std::vector<double> tx, ty;
    for (std::size_t i = 0; i < cen.nu_series.size(); ++i) {
      const double t = static_cast<double>(i + 1);
      if (t >= c.real("census.fit_t_min") && cen.nu_series[i] > 0) {
        tx.push_back(t);
        ty.push_back(static_cast<double>(cen.nu_series[i]));
      }
    }
    const auto window = static_cast<std::size_t>(c.integer("census.fit_window"));
    if (ty.size() >= 3) run["fit"] = fit_json(fit_exponential_rate(tx, ty, std::min(window, ty.size())));

    if (oracle) {
      std::uint64_t mismatches = 0;
      const double tmax = std::min<double>(static_cast<double>(c.integer("census.oracle_t_max")), cen.horizon_reached);
      for (std::size_t i = 0; i < cen.nu_series.size() && static_cast<double>(i + 1) <= tmax; ++i)
        if (cen.nu_series[i] != lattice_count(M, qs[p].first, qs[p].second, static_cast<double>(i + 1))) ++mismatches;
      run["oracle_mismatches"] = mismatches;
      ctx.check(tag + "lattice_oracle_mismatches", static_cast<double>(mismatches), "==", 0.0);
      if (ty.size() >= 3) {
        const GrowthFit f = fit_exponential_rate(tx, ty, std::min(window, ty.size()));
        ctx.check(tag + "loglog_slope_error", std::abs(f.loglog_slope - 2.0), "<=", 0.3);
        ctx.check(tag + "verdict_polynomial", f.verdict == Verdict::Polynomial ? 1.0 : 0.0, "==", 1.0);
      }
    }
    if (M.is_sol()) {
      // (1/t) log nu_t over [fit_t_min, T] must be positive and non-decreasing.
      const double t_lo = c.real("census.fit_t_min");
      double min_rate = std::numeric_limits<double>::infinity(), worst_drop = 0.0, prev = -1.0;
      json rates = json::array();
      for (std::size_t i = 0; i < cen.nu_series.size(); ++i) {
        const double t = static_cast<double>(i + 1);
        if (t < t_lo) continue;
        const double r = cen.nu_series[i] > 0 ? std::log(static_cast<double>(cen.nu_series[i])) / t : 0.0;
        rates.push_back({t, r});
        min_rate = std::min(min_rate, r);
        if (prev >= 0.0) worst_drop = std::max(worst_drop, prev - r);
        prev = r;
      }
      run["log_rate"] = rates;
      ctx.check(tag + "horizon_reached", cen.horizon_reached, ">=", opt.T);
      ctx.check(tag + "min_log_rate", std::isfinite(min_rate) ? min_rate : 0.0, ">", 0.0);
      ctx.check(tag + "log_rate_max_decrease", rates.empty() ? 1.0 : worst_drop, "<=", 0.0);
    }
    truncated = truncated || cen.truncated;
    runs.push_back(std::move(run));
  }
  ctx.results["hamiltonian"] = sc.label;
  ctx.results["runs"] = runs;
  ctx.write_csv("census.csv", nu_csv);
  ctx.write_csv("chords.csv", chords);
  if (truncated) throw budget_error("chord census truncated before the horizon (see runs[].truncation_reason)");
}

void mpp_experiment(Context& ctx) {
  const Config& c = ctx.cfg;
  const ModelManifold M = configured_manifold(c);
  const auto sc = census_surface(c, M, c.text("census.hamiltonian"));
  const CensusOptions opt = census_options(c, ctx.workers);
  const MppResult res = mpp_estimate(sc.surface, static_cast<int>(c.integer("mpp.grid")), opt,
                                     static_cast<std::size_t>(c.integer("mpp.fit_window")), ctx.subseed("mpp"));
  Csv csv({"t", "mean_nu"});
  for (std::size_t i = 0; i < res.t.size(); ++i) {
    csv.add(res.t[i]).add(res.mean_nu[i]);
    csv.end_row();
  }
  ctx.write_csv("mpp.csv", csv);
  bool truncated = false;
  json runs = json::array();
  for (const auto& cen : res.censuses) {
    truncated = truncated || cen.truncated;
    runs.push_back({{"chords", cen.records.size()}, {"horizon_reached", cen.horizon_reached}, {"truncated", cen.truncated}});
  }
  ctx.results["hamiltonian"] = sc.label;
  ctx.results["runs"] = runs;
  if (res.mean_nu.size() >= 3) {
    ctx.results["fit"] = fit_json(res.fit);
    if (!M.is_sol()) ctx.check("verdict_polynomial", res.fit.verdict == Verdict::Polynomial ? 1.0 : 0.0, "==", 1.0);
    if (M.is_sol() && sc.label == "sol-magnetic") {
      const double closed = entropy_closed_form(c.real("sol.k"));
      ctx.results["closed_form"] = closed;
      ctx.results["ratio_to_closed_form"] = closed > 0.0 ? json(res.fit.rate / closed) : json(nullptr);
      ctx.check("rate", res.fit.rate, ">", 0.0);
    }
  }
  if (truncated) throw budget_error("an mpp census was truncated before the horizon");
}

// ---------------------------------------------------------------- volume

void volume_experiment(Context& ctx) {
  const Config& c = ctx.cfg;
  const ModelManifold M = configured_manifold(c);
  const std::string which = c.text("volume.hamiltonian");
  const auto sc = census_surface(c, M, which == "sol-magnetic" ? "sol-magnetic" : "reeb");
  const HamiltonianField H = which == "zero" ? HamiltonianField(M, std::make_shared<ZeroHamiltonian>()) : sc.surface.field();
  const MeshedSubmanifold mesh =
      fiber_mesh(sc.surface, base_point(c, "volume.q0", M), static_cast<std::size_t>(c.integer("volume.resolution")));
  VolumeGrowthOptions opt;
  opt.n_max = static_cast<int>(c.integer("volume.n_max"));
  opt.refine_threshold = c.real("volume.refine_threshold");
  opt.vertex_budget = static_cast<std::size_t>(c.integer("volume.vertex_budget"));
  opt.fit_window = static_cast<std::size_t>(c.integer("volume.fit_window"));
  opt.workers = ctx.workers;
  opt.integrator = make_integrator(c);
  const VolumeGrowthResult res = volume_growth(H, mesh, opt);

  Csv csv({"n", "volume", "vertices"});
  for (std::size_t n = 0; n < res.volumes.size(); ++n) {
    csv.add(static_cast<std::uint64_t>(n)).add(res.volumes[n]).add(static_cast<std::uint64_t>(res.vertex_counts[n]));
    csv.end_row();
  }
  ctx.write_csv("volume.csv", csv);
  json fit = fit_json(res.fit);
  if (res.fit.verdict == Verdict::Exponential) fit["label"] = "lower-bound estimate";
  ctx.results["hamiltonian"] = which;
  ctx.results["dimension"] = mesh.j;
  ctx.results["fit"] = fit;
  ctx.results["n_reached"] = res.n_reached;
  ctx.results["budget_exhausted"] = res.budget_exhausted;
  ctx.results["vertices"] = res.vertices;
  ctx.results["max_edge"] = res.max_edge;

  ctx.check("n_reached", res.n_reached, ">=", opt.n_max);
  if (which == "zero") {
    double dev = 0.0;
    for (double v : res.volumes) dev = std::max(dev, std::abs(v / res.volumes.front() - 1.0));
    ctx.check("relative_volume_change", dev, "<=", 1e-12);
  } else if (M.is_sol()) {
    ctx.check("verdict_exponential", res.fit.verdict == Verdict::Exponential ? 1.0 : 0.0, "==", 1.0);
    ctx.check("rate", res.fit.rate, ">=", 0.2);
  } else {
    ctx.check("rate", res.fit.rate, "<=", 0.05);
  }
  if (res.budget_exhausted)
    throw budget_error("vertex budget exhausted at n = " + std::to_string(res.n_reached) + " of " + std::to_string(opt.n_max));
}

// ---------------------------------------------------------------- actions

FiberChordOptions chord_options(const Config& c, const SandwichedHamiltonians& sw, int workers) {
  FiberChordOptions o;
  o.p_max = c.real("action.radius") * std::sqrt(sw.c());
  o.radial = static_cast<int>(c.integer("action.radial"));
  o.angular = static_cast<int>(c.integer("action.angular"));
  o.workers = workers;
  o.integrator = make_integrator(c);
  return o;
}

void action_experiment(Context& ctx) {
  const Config& c = ctx.cfg;
  const ModelManifold M = torus_manifold(c);
  const auto sw = make_sandwich(c, M);
  const BasePoint q0 = base_point(c, "action.q0", M), q1 = base_point(c, "action.q1", M);
  const FiberChordOptions copt = chord_options(c, *sw, ctx.workers);
  const IntegratorConfig icfg = make_integrator(c);
  ctx.results["sandwich"] = {{"c", sw->c()}, {"sigma", sw->sigma()}, {"eps", sw->cutoff().eps()}, {"eps_halvings", sw->eps_halvings()}};

  // Scaling law on chords of F.
  {
    const HamiltonianField HF(M, std::make_shared<ProfileHamiltonian>(sw->profile(), 1.0));
    const auto ch = fiber_chords(HF, q0, q1, copt);
    const auto use = std::min<std::size_t>(ch.size(), static_cast<std::size_t>(c.integer("action.scaling_chords")));
    Csv csv({"chord", "c", "relative_error", "chord_residual"});
    double worst = 0.0;
    for (double cc : c.reals("action.c_values")) {
      for (std::size_t i = 0; i < use; ++i) {
        const ScalingCheck s = verify_scaling_law(HF, ch[i].traj, cc, icfg);
        csv.add(static_cast<std::uint64_t>(i)).add(cc).add(s.relative_error).add(s.chord_residual);
        csv.end_row();
        worst = std::max(worst, s.relative_error);
      }
    }
    ctx.write_csv("action_scaling.csv", csv);
    ctx.results["scaling"] = {{"chords", use}, {"max_relative_error", worst}};
    ctx.check("scaling_chords", static_cast<double>(use), ">=", static_cast<double>(c.integer("action.scaling_chords")));
    ctx.check("scaling_max_relative_error", worst, "<=", 1e-6);
  }

  // Classification of chords of nK and the homogeneous action formula.
  std::uint64_t violations = 0;
  {
    Csv cls({"n", "chord", "deck_m", "deck_n", "class", "action", "F_min", "F_max"});
    Csv formula({"hamiltonian", "n", "chord", "quadrature", "formula", "abs_error"});
    json per_n = json::array();
    double worst_formula = 0.0;
    for (std::int64_t n : c.ints("action.n_values")) {
      const HamiltonianField HK(M, std::make_shared<SandwichHamiltonian>(sw, SandwichRole::K), static_cast<double>(n));
      const auto ch = fiber_chords(HK, q0, q1, copt);
      std::uint64_t counts[3] = {0, 0, 0}, bad = 0;
      for (std::size_t i = 0; i < ch.size(); ++i) {
        std::string label;
        double action, fmin = std::nan(""), fmax = std::nan("");
        try {
          const ChordClassification cl = classify_chord_action(ch[i].traj, *sw, M, static_cast<int>(n), c.real("action.band"));
          ++counts[static_cast<int>(cl.cls)];
          label = cl.cls == ChordClass::Inside ? "inside" : cl.cls == ChordClass::Outside ? "outside" : "ambiguous";
          action = cl.action;
          fmin = cl.F_min;
          fmax = cl.F_max;
        } catch (const LabError& e) {
          if (e.category() != ErrorCategory::InvariantFailure) throw;
          ++bad;
          label = "violation";
          action = action_of_trajectory(ch[i].traj, HK);
        }
        cls.add(n).add(static_cast<std::uint64_t>(i)).add(ch[i].deck.m).add(ch[i].deck.n).add(label).add(action).add(fmin).add(fmax);
        cls.end_row();
      }
      violations += bad;
      per_n.push_back({{"n", n},
                       {"chords", ch.size()},
                       {"inside", counts[0]},
                       {"outside", counts[1]},
                       {"ambiguous", counts[2]},
                       {"violations", bad}});

      // Lemma (i) for n f(F) and n G.
      const HamiltonianField HfF(M, std::make_shared<SandwichHamiltonian>(sw, SandwichRole::FofF), static_cast<double>(n));
      const HamiltonianField HG(M, std::make_shared<SandwichHamiltonian>(sw, SandwichRole::G), static_cast<double>(n));
      for (const auto* H : {&HfF, &HG}) {
        const bool is_g = H == &HG;
        const auto fc = fiber_chords(*H, q0, q1, copt);
        for (std::size_t i = 0; i < fc.size(); ++i) {
          const ActionEstimate q = action_quadrature(fc[i].traj, *H);
          const Vec3 m = M.to_frame(fc[i].traj.states.front());
          double expect;
          if (is_g) {
            expect = static_cast<double>(n) * action_homogeneous(1.0, sw->G(m), sw->G(m));
          } else {
            const double F = sw->F(m);
            const auto f = sw->cutoff().eval(F);
            expect = static_cast<double>(n) * action_homogeneous(f.derivative, f.value, F);
          }
          const double err = std::abs(q.value - expect);
          formula.add(std::string(is_g ? "nG" : "nf(F)")).add(n).add(static_cast<std::uint64_t>(i)).add(q.value).add(expect).add(err);
          formula.end_row();
          worst_formula = std::max(worst_formula, err);
        }
      }
    }
    ctx.write_csv("action_classes.csv", cls);
    ctx.write_csv("action_formula.csv", formula);
    ctx.results["classification"] = per_n;
    ctx.results["formula_max_abs_error"] = worst_formula;
    ctx.check("classification_violations", static_cast<double>(violations), "==", 0.0);
    ctx.check("formula_max_abs_error", worst_formula, "<=", 1e-6);
  }

  // Time-change identity at random points of Sigma.
  {
    std::mt19937_64 rng(ctx.subseed("time-change"));
    auto u01 = [&] { return std::generate_canonical<double, 53>(rng); };
    const double eps = sw->cutoff().eps();
    const auto samples = static_cast<std::size_t>(c.integer("action.time_change_samples"));
    Csv csv({"sample", "s", "residual"});
    double worst = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
      const BasePoint q = M.domain_point(Vec3(u01(), u01(), u01()));
      const double th = 2.0 * std::numbers::pi * u01();
      const Vec3 u(std::cos(th), std::sin(th), 0.0);
      const Vec3 m = sw->profile().radius(u) * u;
      const double s = i == 0 ? 1.0 : i == 1 ? eps : i == 2 ? 0.5 * eps : i == 3 ? eps * eps : 1.0 - u01();
      const double r = time_change_residual(*sw, M, CotangentPoint{q, M.from_frame(q, m)}, s);
      csv.add(static_cast<std::uint64_t>(i)).add(s).add(r);
      csv.end_row();
      worst = std::max(worst, r);
    }
    ctx.write_csv("time_change.csv", csv);
    ctx.results["time_change_max_residual"] = worst;
    ctx.check("time_change_max_residual", worst, "<=", 1e-9);
  }

  // Sandwich order on random covectors, cutoff slope and the eps bound.
  {
    std::mt19937_64 rng(ctx.subseed("sandwich"));
    const auto N = static_cast<std::size_t>(c.integer("action.sandwich_samples"));
    const double R = c.real("action.sandwich_radius") * std::sqrt(sw->c());
    std::vector<double> mx(N), my(N), mz(N, 0.0), gm(N), k(N), gp(N), gm2(N), k2(N), gp2(N);
    for (std::size_t i = 0; i < N; ++i) {
      const double r = R * std::sqrt(std::generate_canonical<double, 53>(rng));
      const double th = 2.0 * std::numbers::pi * std::generate_canonical<double, 53>(rng);
      mx[i] = r * std::cos(th);
      my[i] = r * std::sin(th);
    }
    std::uint64_t order_violations = 0, kernel_mismatches = 0;
    if (sw->profile().kind() == ProfileKind::Fourier) {
      for (std::size_t i = 0; i < N; ++i) {
        const auto t = sw->eval(Vec3(mx[i], my[i], 0.0));
        gm[i] = t.g_minus;
        k[i] = t.k;
        gp[i] = t.g_plus;
      }
    } else {
      const SandwichParams prm = sandwich_params(*sw);
      sandwich_batch(prm, mx, my, mz, gm, k, gp, active_simd_level());
      sandwich_batch(prm, mx, my, mz, gm2, k2, gp2, SimdLevel::Scalar);
      for (std::size_t i = 0; i < N; ++i)
        if (gm[i] != gm2[i] || k[i] != k2[i] || gp[i] != gp2[i]) ++kernel_mismatches;
    }
    for (std::size_t i = 0; i < N; ++i)
      if (!(gm[i] <= k[i] && k[i] <= gp[i])) ++order_violations;
    double fmin = std::numeric_limits<double>::infinity(), fmax = -fmin;
    const int grid = 10000;
    for (int i = 0; i <= grid; ++i) {
      const double d = sw->cutoff().eval(2.0 * sw->cutoff().eps() * i / grid).derivative;
      fmin = std::min(fmin, d);
      fmax = std::max(fmax, d);
    }
    const double eps = sw->cutoff().eps();
    Csv csv({"quantity", "value"});
    const std::pair<const char*, double> rows[] = {{"samples", double(N)},
                                                   {"order_violations", double(order_violations)},
                                                   {"kernel_mismatches", double(kernel_mismatches)},
                                                   {"f_prime_min", fmin},
                                                   {"f_prime_max", fmax},
                                                   {"two_sigma_eps_sq", 2.0 * sw->sigma() * eps * eps}};
    for (const auto& [name, v] : rows) {
      csv.add(std::string(name)).add(v);
      csv.end_row();
    }
    ctx.write_csv("sandwich.csv", csv);
    ctx.results["sandwich"]["order_violations"] = order_violations;
    ctx.results["sandwich"]["kernel"] = simd_json();
    ctx.check("sandwich_order_violations", static_cast<double>(order_violations), "==", 0.0);
    ctx.check("sandwich_kernel_mismatches", static_cast<double>(kernel_mismatches), "==", 0.0);
    ctx.check("f_prime_min", fmin, ">=", 0.0);
    ctx.check("f_prime_max", fmax, "<=", 2.0);
    ctx.check("two_sigma_eps_sq", 2.0 * sw->sigma() * eps * eps, "<", 1.0);
  }
  if (violations > 0) throw invariant_error(std::to_string(violations) + " chords of nK violate the action inequality");
}

void noncrossing_experiment(Context& ctx) {
  const Config& c = ctx.cfg;
  const ModelManifold M = torus_manifold(c);
  const auto sw = make_sandwich(c, M);
  const BasePoint q0 = base_point(c, "action.q0", M), q1 = base_point(c, "action.q1", M);
  const FiberChordOptions copt = chord_options(c, *sw, ctx.workers);
  const auto s_points = c.integer("noncrossing.s_points");
  Csv csv({"n", "s", "a_s", "chords", "min_gap"});
  json per_n = json::array();
  double worst = std::numeric_limits<double>::infinity();
  for (std::int64_t n : c.ints("noncrossing.n_values")) {
    const double dn = static_cast<double>(n);
    // a sits in the widest gap of the nG action spectrum inside (n, n + 1).
    const HamiltonianField HG(M, std::make_shared<SandwichHamiltonian>(sw, SandwichRole::G), dn);
    std::vector<double> spec{dn, dn + 1.0};
    for (const auto& ch : fiber_chords(HG, q0, q1, copt)) {
      const double a = action_of_trajectory(ch.traj, HG);
      if (a > dn && a < dn + 1.0) spec.push_back(a);
    }
    std::sort(spec.begin(), spec.end());
    double gap = 0.0, a = dn + 0.5;
    for (std::size_t i = 0; i + 1 < spec.size(); ++i) {
      if (spec[i + 1] - spec[i] > gap) {
        gap = spec[i + 1] - spec[i];
        a = 0.5 * (spec[i] + spec[i + 1]);
      }
    }
    double worst_n = std::numeric_limits<double>::infinity();
    for (std::int64_t k = 0; k < s_points; ++k) {
      const double s = static_cast<double>(k) / static_cast<double>(s_points - 1);
      const HamiltonianField H(M, std::make_shared<SandwichHamiltonian>(sw, SandwichRole::Gs, s), dn);
      const double a_s = a / (1.0 + beta_step(s) * (sw->sigma() - 1.0));
      const auto ch = fiber_chords(H, q0, q1, copt);
      double g = std::numeric_limits<double>::infinity();
      for (const auto& x : ch) g = std::min(g, std::abs(action_of_trajectory(x.traj, H) - a_s));
      csv.add(n).add(s).add(a_s).add(static_cast<std::uint64_t>(ch.size())).add(g);
      csv.end_row();
      worst_n = std::min(worst_n, g);
    }
    worst = std::min(worst, worst_n);
    per_n.push_back({{"n", n}, {"a", a}, {"spectral_gap", gap}, {"min_gap", worst_n}});
  }
  ctx.write_csv("noncrossing.csv", csv);
  ctx.results["per_n"] = per_n;
  ctx.results["min_gap"] = worst;
  const double need = c.real("noncrossing.min_gap");
  if (!ctx.check("min_gap", worst, ">=", need))
    throw invariant_error("a chord action of nG_s came within " + format_number(worst) + " of a(s)");
}

// ---------------------------------------------------------------- growth

void growth_experiment(Context& ctx) {
  const Config& c = ctx.cfg;
  const auto a = c.ints("manifold.monodromy");
  const IntMatrix2 A{{a[0], a[1], a[2], a[3]}};
  const auto window = static_cast<std::size_t>(c.integer("growth.fit_window"));
  auto emit = [&](const std::string& file, const std::vector<std::uint64_t>& b) {
    Csv csv({"n", "b_n", "rate"});
    std::vector<double> y;
    for (std::size_t n = 0; n < b.size(); ++n) {
      csv.add(static_cast<std::uint64_t>(n)).add(b[n]).add(n ? std::log(static_cast<double>(b[n])) / double(n) : std::nan(""));
      csv.end_row();
      y.push_back(static_cast<double>(b[n]));
    }
    ctx.write_csv(file, csv);
    return fit_exponential_rate(y, std::min(window, y.size()));
  };
  const auto b = ball_counts(A, static_cast<int>(c.integer("growth.n_max")), GeneratorSet::SemiDirect);
  const auto bc = ball_counts(A, static_cast<int>(c.integer("growth.control_n_max")), GeneratorSet::AbelianControl);
  const GrowthFit f = emit("growth.csv", b);
  const GrowthFit fc = emit("growth_control.csv", bc);
  ctx.results["semidirect"] = {{"b", b}, {"fit", fit_json(f)}};
  ctx.results["control"] = {{"b_last", bc.back()}, {"fit", fit_json(fc)}};
  bool increasing = true;
  for (std::size_t n = 1; n < b.size(); ++n) increasing = increasing && b[n] > b[n - 1];
  ctx.check("strictly_increasing", increasing ? 1.0 : 0.0, "==", 1.0);
  ctx.check("rate", f.rate, ">=", 0.3);
  ctx.check("verdict_exponential", f.verdict == Verdict::Exponential ? 1.0 : 0.0, "==", 1.0);
  ctx.check("control_verdict_polynomial", fc.verdict == Verdict::Polynomial ? 1.0 : 0.0, "==", 1.0);
  ctx.check("control_rate", fc.rate, "<=", 0.1);
}

}  // namespace

void run_experiment(Context& ctx) {
  const std::string e = ctx.cfg.text("experiment");
  if (e == "sol-entropy") sol_entropy(ctx);
  else if (e == "sol-sweep") sol_sweep(ctx);
  else if (e == "chord-census") chord_census_experiment(ctx);
  else if (e == "volume-growth") volume_experiment(ctx);
  else if (e == "action-check") action_experiment(ctx);
  else if (e == "noncrossing-check") noncrossing_experiment(ctx);
  else if (e == "group-growth") growth_experiment(ctx);
  else if (e == "mpp") mpp_experiment(ctx);
  else throw config_error("unknown experiment " + e);
}

}  // namespace spherization::cli
