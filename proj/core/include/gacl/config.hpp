#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gacl::config {

/// Carries every problem found, one message per offending key.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// Flat `key = value` file with optional `[section]` headers; keys are stored
/// as `section.key`. `#` and `;` start a comment at the beginning of a line
/// or after whitespace.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in, const std::string& source = "<config>");
  static KeyValueConfig load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  /// Parses "key=value"; throws ConfigError when '=' is missing.
  void set_assignment(const std::string& assignment);
  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  const std::map<std::string, std::string>& entries() const { return entries_; }

  /// Sectioned, key-sorted rendering that parse() reads back unchanged.
  std::string dump() const;

 private:
  std::map<std::string, std::string> entries_;
};

/// Typed reads that collect errors instead of throwing on the first one.
class Reader {
 public:
  explicit Reader(const KeyValueConfig& config) : config_(config) {}

  std::string text(const std::string& key, const std::string& fallback);
  double real(const std::string& key, double fallback);
  int integer(const std::string& key, int fallback);
  std::uint64_t seed(const std::string& key, std::uint64_t fallback);
  bool boolean(const std::string& key, bool fallback);
  std::vector<double> reals(const std::string& key, const std::vector<double>& fallback);
  std::vector<int> integers(const std::string& key, const std::vector<int>& fallback);

  void error(const std::string& key, const std::string& message);
  /// Flags keys that were never read.
  void reject_unknown();
  /// Throws ConfigError if any problem was recorded.
  void finish() const;

 private:
  const KeyValueConfig& config_;
  std::vector<std::string> problems_;
  std::vector<std::string> seen_;
};

std::vector<double> parse_real_list(const std::string& text);

}  // namespace gacl::config
