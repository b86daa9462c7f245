#pragma once
// Plumbing: flat key=value config files with hard-error unknown keys, CSV
// emission with shortest round-trip doubles, content hashing, and the run
// manifest. Data files are pure functions of the config content.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace replichain {

inline constexpr const char* kArtifactVersion = "1.0.0";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat config: `key = value` lines, '#' comments, blank lines ignored.
// Every key must be consumed by the caller; unconsumed keys are a hard
// error naming the offending key.
class Config {
 public:
  static Config parse_file(const std::filesystem::path& p);
  static Config parse_string(const std::string& text);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, std::optional<std::string> fallback = {});
  double get_double(const std::string& key, std::optional<double> fallback = {});
  int get_int(const std::string& key, std::optional<int> fallback = {});
  std::vector<double> get_double_list(const std::string& key,
                                      std::optional<std::vector<double>> fallback = {});
  std::vector<int> get_int_list(const std::string& key,
                                std::optional<std::vector<int>> fallback = {});
  std::vector<std::string> get_string_list(const std::string& key,
                                           std::optional<std::vector<std::string>> fallback = {});

  // Throws ConfigError naming the first key that was never read.
  void reject_unknown() const;

  const std::string& raw_text() const { return raw_; }

 private:
  std::map<std::string, std::string> kv_;
  mutable std::map<std::string, bool> used_;
  std::string raw_;
};

// Shortest round-trip decimal text for a double (std::to_chars).
std::string format_double(double v);
double parse_double(const std::string& s);

// One CSV table: header row plus string cells, comma separator, LF lines.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::initializer_list<std::string> cells);
  std::string to_string() const;
  static CsvTable from_string(const std::string& text);
};

void write_file(const std::filesystem::path& p, const std::string& content);
std::string read_file(const std::filesystem::path& p);

// FNV-1a 64-bit content hash, rendered as "fnv1a:<hex>".
std::string content_hash(const std::string& bytes);

struct RunManifest {
  std::string config_digest;
  double timing_seconds = 0.0;
  std::vector<std::pair<std::string, std::string>> files; // name, hash
  std::vector<std::string> failed_points; // sweep points that errored

  std::string to_json() const;
};

} // namespace replichain
