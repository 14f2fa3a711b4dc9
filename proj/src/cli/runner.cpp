// SPDX-License-Identifier: Apache-2.0
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "experiments.hpp"
#include "spherization/errors.hpp"
#include "spherization/kernels.hpp"

namespace spherization::cli {
namespace {

using json = nlohmann::ordered_json;

constexpr const char* kVersion = "1.0.0";

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::filesystem::path resolve_out(const std::optional<std::filesystem::path>& flag, const std::string& configured) {
  if (flag) return *flag;
  if (const char* env = std::getenv("SPHERIZATION_LAB_OUT"); env && *env) return env;
  return configured;
}

void write_manifest(const std::filesystem::path& dir, const json& manifest) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::ofstream f(dir / "manifest.json", std::ios::binary);
  f << manifest.dump(2) << '\n';
}

json error_block(ErrorCategory cat, const std::string& msg) {
  return {{"category", std::string(category_name(cat))}, {"exit_code", static_cast<int>(cat)}, {"message", msg}};
}

}  // namespace

RunResult run(Config config, const RunOverrides& ov) {
  RunResult rr;
  if (ov.seed) config.set("seed", std::to_string(*ov.seed));
  if (ov.workers) config.set("workers", std::to_string(*ov.workers));
  rr.out_dir = resolve_out(ov.out_dir, config.text("output.dir"));

  const auto t0 = std::chrono::steady_clock::now();
  json& m = rr.manifest;
  m["tool"] = "spherization-lab";
  m["version"] = kVersion;
  m["experiment"] = config.text("experiment");
  m["config_hash"] = "fnv1a64:" + hex64(config.hash());
  m["seed"] = config.unsigned_value("seed");
  m["config"] = config.echo();
  m["status"] = "ok";

  Context ctx{config, rr.out_dir, config.unsigned_value("seed"), static_cast<int>(config.integer("workers")),
              json::object(), {}, {}};
  try {
    config.validate();
    std::filesystem::create_directories(rr.out_dir);
    run_experiment(ctx);
  } catch (const LabError& e) {
    m["status"] = "error";
    m["error"] = error_block(e.category(), e.what());
    rr.exit_code = static_cast<int>(e.category());
  } catch (const std::bad_alloc&) {
    m["status"] = "error";
    m["error"] = error_block(ErrorCategory::BudgetExceeded, "out of memory");
    rr.exit_code = static_cast<int>(ErrorCategory::BudgetExceeded);
  } catch (const std::exception& e) {
    m["status"] = "error";
    m["error"] = {{"category", "internal"}, {"exit_code", 1}, {"message", e.what()}};
    rr.exit_code = 1;
  }
  m["results"] = ctx.results;
  json checks = json::array();
  bool all = true;
  for (const Check& c : ctx.checks) {
    checks.push_back({{"name", c.name}, {"value", c.value}, {"relation", c.relation}, {"threshold", c.threshold}, {"pass", c.pass}});
    all = all && c.pass;
  }
  m["acceptance"] = {{"pass", all && rr.exit_code == 0}, {"checks", checks}};
  m["files"] = ctx.files;
  m["runtime"] = {{"workers", ctx.workers},
                  {"simd", std::string(simd_level_name(active_simd_level()))},
                  {"started_utc", utc_now()},
                  {"wall_clock_seconds",
                   std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()}};
  write_manifest(rr.out_dir, m);
  return rr;
}

int main_entry(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for spherizations of fiberwise starshaped hypersurfaces"};
  app.require_subcommand(1);
  std::string config_path;
  std::optional<std::string> out_flag;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;

  auto* run_cmd = app.add_subcommand("run", "Run the experiment named in a config file");
  run_cmd->add_option("config", config_path, "Config file")->required();
  run_cmd->add_option("--out", out_flag, "Output directory");
  run_cmd->add_option("--seed", seed, "Seed override");
  run_cmd->add_option("--workers", workers, "Worker threads")->check(CLI::Range(1, 256));

  auto* validate_cmd = app.add_subcommand("validate", "Check a config file against the schema");
  validate_cmd->add_option("config", config_path, "Config file")->required();

  app.add_subcommand("schema", "Print the config schema as a Markdown table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ErrorCategory::ConfigInvalid);
  }

  if (app.got_subcommand("schema")) {
    std::cout << schema_markdown();
    return 0;
  }

  if (app.got_subcommand("validate")) {
    try {
      const Config c = Config::load(config_path);
      c.validate();
      std::cout << "ok " << c.text("experiment") << " fnv1a64:" << hex64(c.hash()) << '\n';
      return 0;
    } catch (const LabError& e) {
      std::cerr << category_name(e.category()) << ": " << e.what() << '\n';
      return static_cast<int>(e.category());
    }
  }

  RunOverrides ov;
  if (out_flag) ov.out_dir = *out_flag;
  ov.seed = seed;
  ov.workers = workers;
  Config config;
  try {
    config = Config::load(config_path);
  } catch (const LabError& e) {
    // Still leave a manifest behind so the failure is machine-readable.
    const auto dir = resolve_out(ov.out_dir, "out");
    json m = {{"tool", "spherization-lab"},
              {"version", kVersion},
              {"config_path", config_path},
              {"status", "error"},
              {"error", error_block(e.category(), e.what())}};
    write_manifest(dir, m);
    std::cerr << category_name(e.category()) << ": " << e.what() << '\n';
    return static_cast<int>(e.category());
  }
  const RunResult rr = run(std::move(config), ov);
  const json& m = rr.manifest;
  std::cout << m["experiment"].get<std::string>() << ": " << m["status"].get<std::string>() << " (" << rr.out_dir.string()
            << ")\n";
  for (const auto& c : m["acceptance"]["checks"])
    std::cout << (c["pass"].get<bool>() ? "  PASS " : "  FAIL ") << c["name"].get<std::string>() << " = "
              << format_number(c["value"].get<double>()) << " " << c["relation"].get<std::string>() << " "
              << format_number(c["threshold"].get<double>()) << '\n';
  if (m.contains("error"))
    std::cerr << m["error"]["category"].get<std::string>() << ": " << m["error"]["message"].get<std::string>() << '\n';
  return rr.exit_code;
}

}  // namespace spherization::cli
