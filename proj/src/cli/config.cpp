// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "spherization/cli.hpp"
#include "spherization/errors.hpp"

namespace spherization::cli {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

KeySpec real(std::string key, std::string fallback, double lo, double hi, std::string doc) {
  return {std::move(key), ValueType::Real, std::move(fallback), lo, hi, {}, std::move(doc)};
}
KeySpec integer(std::string key, std::string fallback, double lo, double hi, std::string doc) {
  return {std::move(key), ValueType::Integer, std::move(fallback), lo, hi, {}, std::move(doc)};
}
KeySpec choice(std::string key, std::string fallback, std::vector<std::string> choices, std::string doc) {
  return {std::move(key), ValueType::Choice, std::move(fallback), 0, 0, std::move(choices), std::move(doc)};
}
KeySpec reals(std::string key, std::string fallback, double lo, double hi, std::size_t min_len, std::size_t max_len,
              std::string doc) {
  return {std::move(key), ValueType::RealList, std::move(fallback), lo, hi, {}, std::move(doc), min_len, max_len};
}
KeySpec ints(std::string key, std::string fallback, double lo, double hi, std::size_t min_len, std::size_t max_len,
             std::string doc) {
  return {std::move(key), ValueType::IntList, std::move(fallback), lo, hi, {}, std::move(doc), min_len, max_len};
}

std::vector<KeySpec> build_schema() {
  return {
      choice("experiment", "",
             {"sol-entropy", "sol-sweep", "chord-census", "volume-growth", "action-check", "noncrossing-check",
              "group-growth", "mpp"},
             "Experiment to run."),
      {"seed", ValueType::Unsigned, "1", 0, 0, {}, "64-bit seed for every random draw."},
      integer("workers", "1", 1, 256, "Worker threads. Never changes results."),
      {"output.dir", ValueType::Text, "out", 0, 0, {}, "Output directory (overridden by --out, then SPHERIZATION_LAB_OUT)."},

      choice("manifold.kind", "torus", {"torus", "sol"}, "Model manifold for chord-census, volume-growth and mpp."),
      ints("manifold.monodromy", "2 1 1 1", -1000, 1000, 4, 4, "Sol lattice matrix A row-major; det 1, trace > 2."),
      reals("manifold.basis", "1 0 0 1", -1e6, 1e6, 4, 4, "Torus lattice basis, columns b1 b2 row-major."),

      choice("profile.kind", "round", {"round", "ellipse", "fourier"}, "Radial profile of Sigma in the frame."),
      reals("profile.axes", "1 2 1", 1e-3, 1e3, 3, 3, "Ellipse semi-axes (the third is ignored on the torus)."),
      real("profile.fourier_c0", "1", 1e-3, 1e3, "Constant term of the Fourier radius."),
      reals("profile.fourier_cos", "", -1e3, 1e3, 0, 64, "Cosine coefficients a_1.. of the Fourier radius."),
      reals("profile.fourier_sin", "", -1e3, 1e3, 0, 64, "Sine coefficients b_1.. of the Fourier radius."),

      real("sandwich.eps", "0.2", 1e-6, 0.5, "Cutoff width; halved until eps^2 < 1/(2 sigma)."),
      real("sandwich.safety", "1.1", 1.0, 10.0, "Margin on the sampled sigma."),

      choice("integrator.scheme", "dopri5", {"dopri5", "midpoint"}, "Adaptive Dormand-Prince 5(4) or implicit midpoint."),
      real("integrator.rel_tol", "1e-10", 1e-15, 1e-2, "Relative tolerance."),
      real("integrator.abs_tol", "1e-12", 1e-18, 1e-2, "Absolute tolerance."),
      real("integrator.max_step", "0.1", 1e-6, 10, "Largest step."),
      real("integrator.drift_abort", "1e-6", 1e-14, 1, "Relative energy drift treated as divergence."),
      real("integrator.fixed_step", "0.01", 1e-6, 1, "Step of the midpoint scheme."),

      real("sol.k", "1", 1e-6, 1e3, "Energy level of the Sol magnetic Hamiltonian."),
      reals("sol.k_values", "0.3 0.5 0.75 1 1.5", 1e-6, 1e3, 1, 64, "Levels for sol-sweep."),
      real("sol.fixed_T", "100", 1e-3, 1e6, "Horizon of the run seeded at p+ and of the conservation check."),
      integer("sol.samples", "50", 1, 1e6, "Random initial conditions on the level."),
      real("sol.T", "2000", 1e-3, 1e7, "Horizon of the random ensemble."),
      real("sol.burn_in", "0.1", 0, 0.9, "Discarded fraction of each run before averaging M_z."),
      real("sol.output_dt", "0.05", 1e-4, 10, "Sampling interval of the running M_z average."),
      real("sol.kernel_step", "0.001", 1e-6, 0.1, "RK4 step of the batched Euler kernel cross-check."),
      integer("sol.conservation_samples", "5", 0, 1e4, "Ensemble members re-run over fixed_T for the conservation check."),

      choice("census.hamiltonian", "reeb", {"reeb", "sol-magnetic"},
             "reeb: F/2 at level 1/2 (unit speed geodesics for the round profile); sol-magnetic: level sol.k."),
      real("census.T", "10", 1e-3, 1e3, "Horizon."),
      integer("census.resolution", "64", 64, 1e6, "Initial fiber mesh vertices (at least 64)."),
      real("census.slab_dt", "0.25", 1e-3, 10, "Thickness of the time slabs."),
      real("census.refine_threshold", "0.5", 1e-4, 1e3, "Max base-image edge length."),
      integer("census.vertex_budget", "200000", 16, 1e9, "Mesh vertex budget."),
      integer("census.chord_budget", "1000000", 1, 1e9, "Chord budget."),
      real("census.barycentric_slack", "0.25", 0, 10, "Slack of the simplex containment test."),
      real("census.newton_tol", "1e-8", 1e-14, 1e-3, "Newton residual tolerance."),
      integer("census.newton_max_iter", "40", 1, 1000, "Newton iteration cap."),
      real("census.dedup_radius", "1e-4", 1e-12, 1, "Chord dedup radius in (parameter, time)."),
      reals("census.q0", "0 0 0", -1e6, 1e6, 3, 3, "Start base point (z ignored on the torus)."),
      reals("census.q1", "0.5 0.5 0", -1e6, 1e6, 3, 3, "Target base point before jitter."),
      real("census.jitter", "1e-3", 0, 1, "Seeded jitter magnitude applied to q1."),
      integer("census.pairs", "1", 1, 1000, "1: use q0, q1; more: seeded uniform pairs."),
      integer("census.fit_window", "6", 3, 1e6, "Trailing points of the nu_t fit."),
      real("census.fit_t_min", "1", 0, 1e3, "Smallest t used by the fit and the monotonicity check."),
      integer("census.oracle_t_max", "10", 0, 1e3, "Largest t compared against the lattice count (torus, round)."),

      choice("volume.hamiltonian", "reeb", {"reeb", "sol-magnetic", "zero"}, "Flow evolving the fiber surface."),
      integer("volume.n_max", "12", 1, 1000, "Number of time-1 steps."),
      real("volume.refine_threshold", "0.5", 1e-4, 1e3, "Max edge length in the Sasaki proxy."),
      integer("volume.vertex_budget", "200000", 16, 1e9, "Vertex budget."),
      integer("volume.resolution", "64", 8, 1e6, "Initial fiber mesh vertices."),
      integer("volume.fit_window", "6", 3, 1e6, "Trailing points of the volume fit."),
      reals("volume.q0", "0 0 0", -1e6, 1e6, 3, 3, "Base point of the fiber."),

      ints("action.n_values", "1 2 3", 1, 100, 1, 16, "Multiples n of K."),
      reals("action.c_values", "2 3", 1e-3, 1e3, 1, 16, "Scaling factors c."),
      integer("action.scaling_chords", "10", 1, 1e5, "Chords used by the scaling law."),
      real("action.radius", "4.5", 0.1, 100, "Search radius in the rescaled fiber norm."),
      integer("action.radial", "200", 2, 1e5, "Radial rings of the shooting grid."),
      integer("action.angular", "256", 8, 1e5, "Angular nodes of the shooting grid."),
      real("action.band", "1e-6", 0, 1, "Boundary band of the inside/outside classification."),
      reals("action.q0", "0.1 0.2 0", -1e6, 1e6, 3, 3, "Chord start base point."),
      reals("action.q1", "0.6 0.45 0", -1e6, 1e6, 3, 3, "Chord end base point."),
      integer("action.time_change_samples", "1000", 2, 1e7, "Random (Sigma point, s) pairs."),
      integer("action.sandwich_samples", "100000", 1, 1e9, "Random covectors for the sandwich order."),
      real("action.sandwich_radius", "8", 0.1, 1e3, "Sampling disc radius in the rescaled norm."),

      ints("noncrossing.n_values", "1 2 3", 1, 100, 1, 16, "Multiples n."),
      integer("noncrossing.s_points", "32", 2, 1e4, "Homotopy grid points on [0, 1]."),
      real("noncrossing.min_gap", "1e-4", 0, 1, "Required distance between chord actions and a(s)."),

      integer("growth.n_max", "12", 1, 16, "Ball radius for the semidirect product."),
      integer("growth.control_n_max", "48", 1, 100000, "Ball radius for the Z^2 control."),
      integer("growth.fit_window", "6", 3, 100000, "Trailing points of the rate fit."),

      integer("mpp.grid", "2", 1, 100, "Pairs per axis: grid^2 seeded (q, q') pairs."),
      integer("mpp.fit_window", "6", 3, 1e6, "Trailing points of the averaged fit."),
  };
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

template <class T>
bool parse_number(const std::string& s, T& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

std::string format_real(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void check_range(const KeySpec& spec, double v, const std::string& shown) {
  if (!std::isfinite(v) || v < spec.min || v > spec.max)
    throw config_error(spec.key + " = " + shown + " is outside [" + format_real(spec.min) + ", " +
                       format_real(spec.max) + "]");
}

/// Parses and normalizes one value.
std::string normalize(const KeySpec& spec, const std::string& value) {
  auto bad = [&] { return config_error(spec.key + ": cannot parse '" + value + "'"); };
  switch (spec.type) {
    case ValueType::Integer: {
      std::int64_t v;
      if (!parse_number(value, v)) throw bad();
      check_range(spec, static_cast<double>(v), value);
      return std::to_string(v);
    }
    case ValueType::Unsigned: {
      std::uint64_t v;
      if (!parse_number(value, v)) throw bad();
      return std::to_string(v);
    }
    case ValueType::Real: {
      double v;
      if (!parse_number(value, v)) throw bad();
      check_range(spec, v, value);
      return format_real(v);
    }
    case ValueType::Text:
      if (value.empty()) throw bad();
      return value;
    case ValueType::Choice:
      if (std::find(spec.choices.begin(), spec.choices.end(), value) == spec.choices.end())
        throw config_error(spec.key + ": '" + value + "' is not one of the allowed values");
      return value;
    case ValueType::RealList:
    case ValueType::IntList: {
      const auto parts = split_list(value);
      if (parts.size() < spec.min_len || parts.size() > spec.max_len)
        throw config_error(spec.key + ": expected " + std::to_string(spec.min_len) + ".." +
                           std::to_string(spec.max_len) + " entries");
      std::string out;
      for (const auto& p : parts) {
        if (!out.empty()) out += ' ';
        if (spec.type == ValueType::IntList) {
          std::int64_t v;
          if (!parse_number(p, v)) throw bad();
          check_range(spec, static_cast<double>(v), p);
          out += std::to_string(v);
        } else {
          double v;
          if (!parse_number(p, v)) throw bad();
          check_range(spec, v, p);
          out += format_real(v);
        }
      }
      return out;
    }
  }
  throw bad();
}

}  // namespace

const std::vector<KeySpec>& schema() {
  static const std::vector<KeySpec> s = build_schema();
  return s;
}

const KeySpec* find_spec(std::string_view key) {
  for (const auto& s : schema())
    if (s.key == key) return &s;
  return nullptr;
}

std::string schema_markdown() {
  std::ostringstream os;
  os << "| key | type | default | range | description |\n|---|---|---|---|---|\n";
  for (const auto& s : schema()) {
    std::string type, range;
    switch (s.type) {
      case ValueType::Integer: type = "integer"; range = format_real(s.min) + " .. " + format_real(s.max); break;
      case ValueType::Unsigned: type = "uint64"; break;
      case ValueType::Real: type = "real"; range = format_real(s.min) + " .. " + format_real(s.max); break;
      case ValueType::Text: type = "text"; break;
      case ValueType::Choice:
        type = "choice";
        for (const auto& c : s.choices) range += (range.empty() ? "" : ", ") + c;
        break;
      case ValueType::RealList:
      case ValueType::IntList:
        type = s.type == ValueType::RealList ? "real list" : "integer list";
        range = std::to_string(s.min_len) + ".." + std::to_string(s.max_len) + " entries in " + format_real(s.min) +
                " .. " + format_real(s.max);
        break;
    }
    os << "| `" << s.key << "` | " << type << " | " << (s.fallback.empty() ? "" : "`" + s.fallback + "`") << " | "
       << range << " | " << s.doc << " |\n";
  }
  return os.str();
}

Config Config::parse(std::string_view text, std::string_view origin) {
  Config c;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  auto where = [&] { return std::string(origin) + ":" + std::to_string(lineno) + ": "; };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw config_error(where() + "malformed section header");
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw config_error(where() + "expected key = value");
    const std::string name = trim(std::string_view(t).substr(0, eq));
    const std::string key = section.empty() ? name : section + "." + name;
    if (c.explicit_.contains(key)) throw config_error(where() + "duplicate key " + key);
    try {
      c.set(key, trim(std::string_view(t).substr(eq + 1)));
    } catch (const LabError& e) {
      throw config_error(where() + e.what());
    }
  }
  for (const auto& s : schema())
    if (!c.values_.contains(s.key)) {
      if (s.fallback.empty() && s.type != ValueType::RealList) throw config_error(std::string(origin) + ": missing required key " + s.key);
      c.values_[s.key] = s.fallback;
    }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw config_error("cannot read config " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse(ss.str(), path.string());
}

void Config::set(const std::string& key, const std::string& value) {
  const KeySpec* spec = find_spec(key);
  if (!spec) throw config_error("unknown key " + key);
  const bool empty_list = value.empty() && (spec->type == ValueType::RealList || spec->type == ValueType::IntList);
  values_[key] = empty_list && spec->min_len == 0 ? std::string() : normalize(*spec, value);
  explicit_.insert(key);
}

const std::string& Config::raw(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw config_error("unset key " + key);
  return it->second;
}

double Config::real(const std::string& key) const {
  double v = 0;
  parse_number(raw(key), v);
  return v;
}
std::int64_t Config::integer(const std::string& key) const {
  std::int64_t v = 0;
  parse_number(raw(key), v);
  return v;
}
std::uint64_t Config::unsigned_value(const std::string& key) const {
  std::uint64_t v = 0;
  parse_number(raw(key), v);
  return v;
}
std::string Config::text(const std::string& key) const { return raw(key); }
std::vector<double> Config::reals(const std::string& key) const {
  std::vector<double> out;
  for (const auto& p : split_list(raw(key))) {
    double v = 0;
    parse_number(p, v);
    out.push_back(v);
  }
  return out;
}
std::vector<std::int64_t> Config::ints(const std::string& key) const {
  std::vector<std::int64_t> out;
  for (const auto& p : split_list(raw(key))) {
    std::int64_t v = 0;
    parse_number(p, v);
    out.push_back(v);
  }
  return out;
}

void Config::validate() const {
  const std::string exp = text("experiment");
  const auto A = ints("manifold.monodromy");
  if (A[0] * A[3] - A[1] * A[2] != 1 || A[0] + A[3] <= 2)
    throw config_error("manifold.monodromy must have determinant 1 and trace > 2");
  const auto B = reals("manifold.basis");
  if (std::abs(B[0] * B[3] - B[1] * B[2]) < 1e-9) throw config_error("manifold.basis is singular");
  if ((exp == "action-check" || exp == "noncrossing-check") && text("manifold.kind") != "torus")
    throw config_error(exp + " runs on the torus only");
  const bool sol = exp == "sol-entropy" || exp == "sol-sweep" || text("manifold.kind") == "sol";
  if (sol && text("profile.kind") == "fourier") throw config_error("Fourier profiles need planar fibers (torus)");
  if (text("profile.kind") == "fourier" && text("profile.fourier_cos").empty() && text("profile.fourier_sin").empty() &&
      !is_set("profile.fourier_c0"))
    throw config_error("a Fourier profile needs coefficients");
  if (exp == "chord-census" || exp == "mpp") {
    if (text("census.hamiltonian") == "sol-magnetic" && text("manifold.kind") != "sol")
      throw config_error("census.hamiltonian = sol-magnetic needs manifold.kind = sol");
  }
  if (exp == "volume-growth" && text("volume.hamiltonian") == "sol-magnetic" && text("manifold.kind") != "sol")
    throw config_error("volume.hamiltonian = sol-magnetic needs manifold.kind = sol");
  if (exp == "noncrossing-check" && text("profile.kind") != "round")
    throw config_error("noncrossing-check uses the round profile");
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) {
    if (k == "workers" || k == "output.dir") continue;
    out += k + " = " + v + "\n";
  }
  return out;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t Config::hash() const { return fnv1a(canonical()); }

nlohmann::ordered_json Config::echo() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : values_) {
    if (k == "workers" || k == "output.dir") continue;
    j[k] = v;
  }
  return j;
}

}  // namespace spherization::cli
