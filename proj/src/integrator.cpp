// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <string>

#include "spherization/dynamics.hpp"
#include "spherization/errors.hpp"

namespace spherization {
namespace {

using S = FrameState;

S axpy(const S& y, double h, std::initializer_list<std::pair<double, const S*>> terms) {
  S out = y;
  for (int i = 0; i < 6; ++i) {
    double acc = 0.0;
    for (const auto& [w, k] : terms) acc += w * (*k)[i];
    out[i] = y[i] + h * acc;
  }
  return out;
}

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct DopriStep {
  S y_new;
  S k7;  // f(y_new), reused as the next k1
  double err;
};

DopriStep dopri_step(const HamiltonianField& H, const S& y, const S& k1, double h, double rtol, double atol) {
  const S k2 = H.frame_rhs(axpy(y, h, {{a21, &k1}}));
  const S k3 = H.frame_rhs(axpy(y, h, {{a31, &k1}, {a32, &k2}}));
  const S k4 = H.frame_rhs(axpy(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
  const S k5 = H.frame_rhs(axpy(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
  const S k6 = H.frame_rhs(axpy(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
  DopriStep r;
  r.y_new = axpy(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
  r.k7 = H.frame_rhs(r.y_new);
  double sum = 0.0;
  for (int i = 0; i < 6; ++i) {
    const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * r.k7[i]);
    const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(r.y_new[i]));
    sum += (e / sc) * (e / sc);
  }
  r.err = std::sqrt(sum / 6.0);
  return r;
}

S midpoint_step(const HamiltonianField& H, const S& y, double h) {
  const S f0 = H.frame_rhs(y);
  S y1 = axpy(y, h, {{1.0, &f0}});
  for (int it = 0; it < 200; ++it) {
    S mid;
    for (int i = 0; i < 6; ++i) mid[i] = 0.5 * (y[i] + y1[i]);
    const S f = H.frame_rhs(mid);
    const S next = axpy(y, h, {{1.0, &f}});
    double delta = 0.0;
    for (int i = 0; i < 6; ++i) delta = std::max(delta, std::abs(next[i] - y1[i]) / (1.0 + std::abs(next[i])));
    y1 = next;
    if (delta <= 1e-15) return y1;
  }
  throw divergence_error("implicit midpoint iteration did not converge; reduce fixed_step");
}

void check_finite(const S& y) {
  for (double v : y) {
    if (!std::isfinite(v)) throw divergence_error("non-finite state during integration");
  }
}

/// Advances y from t to t_end, keeping the step proposal h across calls.
class Driver {
 public:
  Driver(const HamiltonianField& H, const IntegratorConfig& cfg, const S& y0)
      : H_(H), cfg_(cfg), y_(y0), h_(std::min(cfg.max_step, 0.01)) {
    if (!(cfg.rel_tol > 0.0) || !(cfg.abs_tol > 0.0) || !(cfg.max_step > 0.0) || !(cfg.fixed_step > 0.0))
      throw config_error("integrator tolerances and steps must be positive");
    k1_ = H.frame_rhs(y_);
    e0_ = energy(y_);
  }

  double energy(const S& y) const { return H_.value_frame(Vec3(y[3], y[4], y[5])); }

  void advance(double duration, std::vector<double>* steps_out) {
    double left = duration;
    while (left > 0.0) {
      if (++steps_ > cfg_.max_steps) throw budget_error("integrator step budget exhausted");
      if (cfg_.scheme == Scheme::ImplicitMidpoint) {
        const double h = std::min(cfg_.fixed_step, left);
        y_ = midpoint_step(H_, y_, h);
        left = finish(h, left, steps_out);
        continue;
      }
      const double proposal = std::min(h_, cfg_.max_step);
      // Land exactly on the interval end; avoid leaving a sliver behind.
      const bool last = proposal >= left * (1.0 - 1e-12) || left - proposal < 1e-3 * proposal;
      const double h = last ? left : proposal;
      if (h < cfg_.min_step && !last) throw divergence_error("step size underflow");
      const DopriStep st = dopri_step(H_, y_, k1_, h, cfg_.rel_tol, cfg_.abs_tol);
      const double fac = st.err > 0.0 ? 0.9 * std::pow(st.err, -0.2) : 5.0;
      if (!(st.err <= 1.0)) {
        ++rejections_;
        if (!std::isfinite(st.err)) {
          h_ = 0.2 * h;
        } else {
          h_ = h * std::max(0.2, fac);
        }
        if (h_ < cfg_.min_step) throw divergence_error("step size underflow");
        continue;
      }
      y_ = st.y_new;
      k1_ = st.k7;
      if (!last || h >= proposal * 0.5) h_ = std::min(cfg_.max_step, proposal * std::min(5.0, std::max(0.2, fac)));
      left = finish(h, left, steps_out);
    }
  }

  const S& state() const { return y_; }
  double drift() const { return drift_; }
  std::size_t steps() const { return steps_; }
  std::size_t rejections() const { return rejections_; }

 private:
  double finish(double h, double left, std::vector<double>* steps_out) {
    check_finite(y_);
    if (steps_out) steps_out->push_back(h);
    const double de = std::abs(energy(y_) - e0_) / std::max(std::abs(e0_), 1e-8);
    drift_ = std::max(drift_, de);
    if (drift_ > cfg_.drift_abort)
      throw divergence_error("energy drift " + std::to_string(drift_) + " exceeds drift_abort");
    return h >= left ? 0.0 : left - h;
  }

  const HamiltonianField& H_;
  const IntegratorConfig& cfg_;
  S y_;
  S k1_{};
  double h_;
  double e0_ = 0.0;
  double drift_ = 0.0;
  std::size_t steps_ = 0;
  std::size_t rejections_ = 0;
};

}  // namespace

Trajectory integrate(const HamiltonianField& H, const CotangentPoint& x0, double T, const IntegratorConfig& cfg) {
  if (!(T > 0.0) || !std::isfinite(T)) throw config_error("integration horizon must be positive");
  Driver drv(H, cfg, H.to_state(x0));
  Trajectory tr;
  auto record = [&](double t) {
    tr.times.push_back(t);
    tr.states.push_back(H.from_state(drv.state()));
    const S& y = drv.state();
    tr.frame.emplace_back(y[3], y[4], y[5]);
  };
  record(0.0);
  if (cfg.output_dt > 0.0) {
    const auto n = static_cast<std::size_t>(std::ceil(T / cfg.output_dt - 1e-9));
    double t = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
      const double tk = k == n ? T : static_cast<double>(k) * cfg.output_dt;
      drv.advance(tk - t, nullptr);
      t = tk;
      record(t);
    }
  } else {
    std::vector<double> steps;
    drv.advance(T, &steps);
    // Without an output grid, replay the accepted steps to record every sample.
    S y = H.to_state(x0);
    double t = 0.0;
    for (double h : steps) {
      y = flow_frozen(H, y, std::span<const double>(&h, 1), cfg.scheme);
      t += h;
      tr.times.push_back(t);
      tr.states.push_back(H.from_state(y));
      tr.frame.emplace_back(y[3], y[4], y[5]);
    }
  }
  tr.energy_drift = drv.drift();
  tr.steps = drv.steps();
  tr.rejections = drv.rejections();
  return tr;
}

FrameState flow(const HamiltonianField& H, const FrameState& y0, double duration, const IntegratorConfig& cfg,
                std::vector<double>* steps_out) {
  if (duration == 0.0) return y0;
  if (!(duration > 0.0)) throw config_error("flow duration must be non-negative");
  Driver drv(H, cfg, y0);
  drv.advance(duration, steps_out);
  return drv.state();
}

FrameState flow_frozen(const HamiltonianField& H, const FrameState& y0, std::span<const double> steps, Scheme scheme) {
  S y = y0;
  for (double h : steps) {
    if (scheme == Scheme::ImplicitMidpoint) {
      y = midpoint_step(H, y, h);
    } else {
      const S k1 = H.frame_rhs(y);
      y = dopri_step(H, y, k1, h, 1.0, 1.0).y_new;
    }
  }
  return y;
}

}  // namespace spherization
