#include "replichain/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace replichain {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

} // namespace

Config Config::parse_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

Config Config::parse_string(const std::string& text) {
  Config cfg;
  cfg.raw_ = text;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + " is not key = value: " + line);
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(lineno) + " has an empty key");
    if (cfg.kv_.count(key))
      throw ConfigError("duplicate config key: " + key);
    cfg.kv_[key] = val;
    cfg.used_[key] = false;
  }
  return cfg;
}

bool Config::has(const std::string& key) const { return kv_.count(key) > 0; }

std::string Config::get_string(const std::string& key, std::optional<std::string> fallback) {
  auto it = kv_.find(key);
  if (it == kv_.end()) {
    if (fallback) return *fallback;
    throw ConfigError("missing required config key: " + key);
  }
  used_[key] = true;
  return it->second;
}

double Config::get_double(const std::string& key, std::optional<double> fallback) {
  if (!has(key)) {
    if (fallback) return *fallback;
    throw ConfigError("missing required config key: " + key);
  }
  const std::string v = get_string(key);
  try {
    return parse_double(v);
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + " is not a number: " + v);
  }
}

int Config::get_int(const std::string& key, std::optional<int> fallback) {
  if (!has(key)) {
    if (fallback) return *fallback;
    throw ConfigError("missing required config key: " + key);
  }
  const std::string v = get_string(key);
  int out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ConfigError("config key " + key + " is not an integer: " + v);
  return out;
}

std::vector<double> Config::get_double_list(const std::string& key,
                                            std::optional<std::vector<double>> fallback) {
  if (!has(key)) {
    if (fallback) return *fallback;
    throw ConfigError("missing required config key: " + key);
  }
  const std::string v = get_string(key);
  std::vector<double> out;
  for (const auto& piece : split(v, ',')) {
    const std::string t = trim(piece);
    if (t.empty()) throw ConfigError("config key " + key + " has an empty list entry");
    try {
      out.push_back(parse_double(t));
    } catch (const std::exception&) {
      throw ConfigError("config key " + key + " has a non-numeric entry: " + t);
    }
  }
  return out;
}

std::vector<int> Config::get_int_list(const std::string& key,
                                      std::optional<std::vector<int>> fallback) {
  if (!has(key)) {
    if (fallback) return *fallback;
    throw ConfigError("missing required config key: " + key);
  }
  const std::string v = get_string(key);
  std::vector<int> out;
  for (const auto& piece : split(v, ',')) {
    const std::string t = trim(piece);
    int x = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), x);
    if (ec != std::errc{} || ptr != t.data() + t.size())
      throw ConfigError("config key " + key + " has a non-integer entry: " + t);
    out.push_back(x);
  }
  return out;
}

std::vector<std::string> Config::get_string_list(const std::string& key,
                                                 std::optional<std::vector<std::string>> fallback) {
  if (!has(key)) {
    if (fallback) return *fallback;
    throw ConfigError("missing required config key: " + key);
  }
  const std::string v = get_string(key);
  std::vector<std::string> out;
  for (const auto& piece : split(v, ',')) out.push_back(trim(piece));
  return out;
}

void Config::reject_unknown() const {
  for (const auto& [key, used] : used_) {
    if (!used) throw ConfigError("unknown config key: " + key);
  }
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw std::runtime_error("double formatting failed");
  return std::string(buf, ptr);
}

double parse_double(const std::string& s) {
  double out = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw std::runtime_error("not a number: " + s);
  return out;
}

void CsvTable::add_row(std::initializer_list<std::string> cells) {
  rows.emplace_back(cells);
}

std::string CsvTable::to_string() const {
  std::string out;
  auto emit = [&out](const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out.push_back(',');
      out += cells[i];
    }
    out.push_back('\n');
  };
  emit(header);
  for (const auto& r : rows) emit(r);
  return out;
}

CsvTable CsvTable::from_string(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line, ',');
    if (first) {
      t.header = cells;
      first = false;
    } else {
      t.rows.push_back(cells);
    }
  }
  return t;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + p.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("write failed: " + p.string());
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string content_hash(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string RunManifest::to_json() const {
  nlohmann::json j;
  j["artifact_version"] = kArtifactVersion;
  j["config_digest"] = config_digest;
  j["timing_seconds"] = timing_seconds;
  auto arr = nlohmann::json::array();
  for (const auto& [name, hash] : files) {
    arr.push_back({{"name", name}, {"hash", hash}});
  }
  j["files"] = arr;
  j["failed_points"] = failed_points;
  return j.dump(2) + "\n";
}

} // namespace replichain
