// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "spherization/cli.hpp"
#include "spherization/errors.hpp"

using namespace spherization;
using namespace spherization::cli;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / "spherization-test" / name;
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("config parsing") {
  const Config c = Config::parse("experiment = group-growth\n[growth]\nn_max = 8  # comment\n");
  CHECK(c.integer("growth.n_max") == 8);
  CHECK(c.integer("growth.control_n_max") == 48);
  CHECK(c.text("integrator.scheme") == "dopri5");
  CHECK_THROWS_AS(Config::parse("experiment = group-growth\n[growth]\nbogus = 1\n"), LabError);
  CHECK_THROWS_AS(Config::parse("[census]\nT = 3\n"), LabError);
  CHECK_THROWS_AS(Config::parse("experiment = chord-census\n[census]\nT = -1\n"), LabError);
  CHECK_THROWS_AS(Config::parse("experiment = chord-census\n[census]\nT = abc\n"), LabError);
  CHECK_THROWS_AS(Config::parse("experiment = nope\n"), LabError);
  CHECK_THROWS_AS(Config::parse("experiment = mpp\nexperiment = mpp\n"), LabError);
}

TEST_CASE("hash ignores formatting and workers") {
  const Config a = Config::parse("experiment = mpp\nworkers = 1\n[census]\nT = 12\n");
  const Config b = Config::parse("# same run\nexperiment=mpp\nworkers = 8\n[census]\nT = 12.0\n");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash() != Config::parse("experiment = mpp\n[census]\nT = 13\n").hash());
}

TEST_CASE("cross-key validation") {
  CHECK_THROWS_AS(Config::parse("experiment = action-check\n[manifold]\nkind = sol\n").validate(), LabError);
  CHECK_THROWS_AS(Config::parse("experiment = group-growth\n[manifold]\nmonodromy = 1 1 0 1\n").validate(), LabError);
}

TEST_CASE("malformed config exits with the config category and leaves a manifest") {
  const auto dir = scratch("bad");
  Config c = Config::parse("experiment = chord-census\n[manifold]\nkind = torus\n[census]\nhamiltonian = sol-magnetic\n");
  const RunResult r = run(c, {dir, std::nullopt, std::nullopt});
  CHECK(r.exit_code == 2);
  REQUIRE(std::filesystem::exists(dir / "manifest.json"));
  const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(m["error"]["category"] == "config-invalid");
}

TEST_CASE("CSV bodies do not depend on the worker count") {
  const char* cfg =
      "experiment = chord-census\nseed = 4\n[census]\nT = 6\n"
      "[integrator]\nrel_tol = 1e-10\n";
  const auto d1 = scratch("w1"), d8 = scratch("w8");
  const RunResult a = run(Config::parse(cfg), {d1, std::nullopt, 1});
  const RunResult b = run(Config::parse(cfg), {d8, std::nullopt, 8});
  CHECK(a.exit_code == 0);
  CHECK(b.exit_code == 0);
  for (const char* f : {"census.csv", "chords.csv"}) CHECK(slurp(d1 / f) == slurp(d8 / f));
  CHECK(a.manifest["config_hash"] == b.manifest["config_hash"]);
  CHECK(a.manifest["results"] == b.manifest["results"]);
}

TEST_CASE("group growth experiment end to end") {
  const auto dir = scratch("growth");
  const RunResult r = run(Config::parse("experiment = group-growth\n[growth]\nn_max = 12\n"), {dir, 123, std::nullopt});
  CHECK(r.exit_code == 0);
  CHECK(r.manifest["seed"] == 123);
  CHECK(r.manifest["acceptance"]["pass"] == true);
  const std::string csv = slurp(dir / "growth.csv");
  CHECK(csv.rfind("n,b_n,rate\n0,1,nan\n1,7,", 0) == 0);
}
