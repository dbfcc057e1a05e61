#include "gacl/config.hpp"

#include "gacl/io.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <sstream>

namespace gacl::config {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out = "invalid configuration:";
  for (const auto& s : items) out += "\n  " + s;
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join(problems)), problems_(std::move(problems)) {}

KeyValueConfig KeyValueConfig::parse(std::istream& in, const std::string& source) {
  KeyValueConfig cfg;
  std::vector<std::string> problems;
  std::string section;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto body = io::trim(line);
    if (body.empty() || body.front() == '#' || body.front() == ';') continue;
    // Trailing comment: '#' or ';' after whitespace.
    for (std::size_t i = 1; i < body.size(); ++i) {
      if ((body[i] == '#' || body[i] == ';') && (body[i - 1] == ' ' || body[i - 1] == '\t')) {
        body = io::trim(body.substr(0, i));
        break;
      }
    }
    if (body.front() == '[') {
      if (body.back() != ']') {
        problems.push_back(source + ":" + std::to_string(line_no) + ": unterminated section header");
        continue;
      }
      section = std::string(io::trim(body.substr(1, body.size() - 2)));
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      problems.push_back(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
      continue;
    }
    const std::string key(io::trim(body.substr(0, eq)));
    if (key.empty()) {
      problems.push_back(source + ":" + std::to_string(line_no) + ": empty key");
      continue;
    }
    cfg.entries_[section.empty() ? key : section + "." + key] =
        std::string(io::trim(body.substr(eq + 1)));
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  return parse(in, path.string());
}

void KeyValueConfig::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError({"override '" + assignment + "' must look like key=value"});
  }
  set(std::string(io::trim(std::string_view(assignment).substr(0, eq))),
      std::string(io::trim(std::string_view(assignment).substr(eq + 1))));
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string KeyValueConfig::dump() const {
  std::map<std::string, std::vector<std::pair<std::string, std::string>>> sections;
  for (const auto& [key, value] : entries_) {
    const auto dot = key.find('.');
    if (dot == std::string::npos) {
      sections[""].emplace_back(key, value);
    } else {
      sections[key.substr(0, dot)].emplace_back(key.substr(dot + 1), value);
    }
  }
  std::ostringstream out;
  bool first = true;
  for (const auto& [section, items] : sections) {
    if (!section.empty()) out << (first ? "" : "\n") << '[' << section << "]\n";
    for (const auto& [k, v] : items) out << k << " = " << v << '\n';
    first = false;
  }
  return out.str();
}

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  std::string normalized = text;
  std::replace(normalized.begin(), normalized.end(), ',', ' ');
  for (const auto tok : io::split_whitespace(normalized)) {
    double v = 0.0;
    if (!io::parse_double(tok, v)) throw std::invalid_argument("not a number: '" + std::string(tok) + "'");
    out.push_back(v);
  }
  return out;
}

std::string Reader::text(const std::string& key, const std::string& fallback) {
  seen_.push_back(key);
  return config_.get(key).value_or(fallback);
}

double Reader::real(const std::string& key, double fallback) {
  seen_.push_back(key);
  const auto v = config_.get(key);
  if (!v) return fallback;
  double out = 0.0;
  if (!io::parse_double(*v, out) || !std::isfinite(out)) {
    error(key, "expected a number, got '" + *v + "'");
    return fallback;
  }
  return out;
}

int Reader::integer(const std::string& key, int fallback) {
  seen_.push_back(key);
  const auto v = config_.get(key);
  if (!v) return fallback;
  double out = 0.0;
  if (!io::parse_double(*v, out) || out != std::floor(out) || std::abs(out) > 1e9) {
    error(key, "expected an integer, got '" + *v + "'");
    return fallback;
  }
  return static_cast<int>(out);
}

std::uint64_t Reader::seed(const std::string& key, std::uint64_t fallback) {
  seen_.push_back(key);
  const auto v = config_.get(key);
  if (!v) return fallback;
  try {
    std::size_t pos = 0;
    const unsigned long long out = std::stoull(*v, &pos);
    if (pos != v->size() || v->front() == '-') throw std::invalid_argument("trailing");
    return out;
  } catch (const std::exception&) {
    error(key, "expected a non-negative integer seed, got '" + *v + "'");
    return fallback;
  }
}

bool Reader::boolean(const std::string& key, bool fallback) {
  seen_.push_back(key);
  const auto v = config_.get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  error(key, "expected true/false, got '" + *v + "'");
  return fallback;
}

std::vector<double> Reader::reals(const std::string& key, const std::vector<double>& fallback) {
  seen_.push_back(key);
  const auto v = config_.get(key);
  if (!v) return fallback;
  try {
    return parse_real_list(*v);
  } catch (const std::exception& e) {
    error(key, e.what());
    return fallback;
  }
}

std::vector<int> Reader::integers(const std::string& key, const std::vector<int>& fallback) {
  std::vector<double> fb(fallback.begin(), fallback.end());
  const std::size_t before = problems_.size();
  const auto values = reals(key, fb);
  std::vector<int> out;
  for (double v : values) {
    if (v != std::floor(v)) {
      if (problems_.size() == before) error(key, "expected integers");
      return fallback;
    }
    out.push_back(static_cast<int>(v));
  }
  return out;
}

void Reader::error(const std::string& key, const std::string& message) {
  problems_.push_back(key + ": " + message);
}

void Reader::reject_unknown() {
  for (const auto& [key, value] : config_.entries()) {
    if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) error(key, "unknown key");
  }
}

void Reader::finish() const {
  if (!problems_.empty()) throw ConfigError(problems_);
}

}  // namespace gacl::config
