// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "spherization/cli.hpp"

namespace spherization::cli {

/// Header plus rows; numbers use the shortest round-trip form, NaN is `nan`.
class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : header_(std::move(header)) {}
  Csv& add(double v);
  Csv& add(std::int64_t v);
  Csv& add(std::uint64_t v);
  Csv& add(int v) { return add(static_cast<std::int64_t>(v)); }
  Csv& add(const std::string& v);
  void end_row();
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::string> row_;
  std::string body_;
};

struct Check {
  std::string name;
  double value;
  std::string relation;
  double threshold;
  bool pass;
};

struct Context {
  const Config& cfg;
  std::filesystem::path dir;
  std::uint64_t seed;
  int workers;
  nlohmann::ordered_json results = nlohmann::ordered_json::object();
  std::vector<Check> checks;
  std::vector<std::string> files;

  void write_csv(const std::string& name, const Csv& csv);
  /// Records value <relation> threshold; relation is one of <=, >=, <, >, ==.
  bool check(const std::string& name, double value, const std::string& relation, double threshold);
  /// Independent stream for a named purpose.
  std::uint64_t subseed(std::string_view tag) const;
};

void run_experiment(Context& ctx);

std::string format_number(double v);

}  // namespace spherization::cli
