// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace spherization::cli {

enum class ValueType { Integer, Unsigned, Real, Text, Choice, RealList, IntList };

struct KeySpec {
  std::string key;  // "section.name", or a bare name for top-level keys
  ValueType type;
  std::string fallback;  // empty: required
  double min = 0.0;
  double max = 0.0;
  std::vector<std::string> choices;
  std::string doc;
  /// Bounds on each entry of list values, and on the list length.
  std::size_t min_len = 0;
  std::size_t max_len = 0;
};

const std::vector<KeySpec>& schema();
const KeySpec* find_spec(std::string_view key);
/// Markdown rendering of the schema, the source of docs/config-schema.md.
std::string schema_markdown();

/// Flat typed key-value configuration. Lines are `key = value`; `[section]`
/// headers prefix later keys with `section.`; `#` starts a comment.
class Config {
 public:
  static Config parse(std::string_view text, std::string_view origin = "<string>");
  static Config load(const std::filesystem::path& path);

  /// Validates against the schema and stores the normalized value.
  void set(const std::string& key, const std::string& value);
  bool is_set(const std::string& key) const { return explicit_.contains(key); }

  double real(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  std::uint64_t unsigned_value(const std::string& key) const;
  std::string text(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;
  std::vector<std::int64_t> ints(const std::string& key) const;

  /// Cross-key checks; throws config-invalid.
  void validate() const;

  /// Every resolved key except the ones that must not change results
  /// (workers, output directory), one `key = value` per line, sorted.
  std::string canonical() const;
  std::uint64_t hash() const;
  nlohmann::ordered_json echo() const;

 private:
  const std::string& raw(const std::string& key) const;
  std::map<std::string, std::string> values_;
  std::set<std::string> explicit_;
};

std::uint64_t fnv1a(std::string_view bytes);

struct RunOverrides {
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
};

struct RunResult {
  int exit_code = 0;
  std::filesystem::path out_dir;
  nlohmann::ordered_json manifest;
};

/// Runs the configured experiment, writing CSV files and manifest.json into
/// the output directory. Never throws for lab errors; they become the exit code
/// and the manifest's error block.
RunResult run(Config config, const RunOverrides& overrides);

int main_entry(int argc, char** argv);

}  // namespace spherization::cli
