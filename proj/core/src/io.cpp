#include "gacl/io.hpp"

#include <cctype>
#include <charconv>
#include <istream>
#include <ostream>
#include <system_error>

namespace gacl::io {

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool parse_double(std::string_view token, double& out) {
  if (token.empty()) return false;
  if (token.front() == '+') token.remove_prefix(1);
  const auto res = std::from_chars(token.data(), token.data() + token.size(), out);
  return res.ec == std::errc() && res.ptr == token.data() + token.size();
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return in;
}

Trajectory parse_kitti_poses(std::istream& in, const std::string& source) {
  std::vector<Pose> poses;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = split_whitespace(line);
    if (tokens.empty()) continue;
    if (tokens.size() != 12) {
      throw ParseError(source, line_no,
                       "expected 12 values, found " + std::to_string(tokens.size()));
    }
    Matrix4 m = Matrix4::Identity();
    for (int k = 0; k < 12; ++k) {
      double v = 0.0;
      if (!parse_double(tokens[k], v)) {
        throw ParseError(source, line_no, "not a number: '" + std::string(tokens[k]) + "'");
      }
      m(k / 4, k % 4) = v;
    }
    poses.push_back(Pose::from_matrix(m));
  }
  if (poses.empty()) throw ParseError(source, line_no, "no poses found");
  return Trajectory(std::move(poses));
}

Trajectory read_kitti_poses(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_kitti_poses(in, path.string());
}

void write_kitti_poses(std::ostream& out, const Trajectory& trajectory) {
  for (const Pose& p : trajectory.poses()) {
    const Matrix4 m = p.matrix();
    for (int k = 0; k < 12; ++k) {
      if (k) out << ' ';
      out << format_double(m(k / 4, k % 4));
    }
    out << '\n';
  }
}

void write_kitti_poses(const std::filesystem::path& path, const Trajectory& trajectory) {
  auto out = open_output(path);
  write_kitti_poses(out, trajectory);
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace gacl::io

namespace gacl::io {

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

const std::string& CsvTable::text(std::size_t row, const std::string& name) const {
  const int c = column(name);
  if (c < 0) throw ParseError(source, 1, "missing column '" + name + "'");
  return rows.at(row)[static_cast<std::size_t>(c)];
}

double CsvTable::number(std::size_t row, const std::string& name) const {
  double v = 0.0;
  if (!parse_double(text(row, name), v)) {
    throw ParseError(source, row + 2, "column '" + name + "' is not a number");
  }
  return v;
}

CsvTable parse_csv(std::istream& in, const std::string& source) {
  CsvTable table;
  table.source = source;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    std::vector<std::string> fields;
    for (auto f : split(line, ',')) fields.emplace_back(trim(f));
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw ParseError(source, line_no,
                       "expected " + std::to_string(table.header.size()) + " fields, got " +
                           std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
  }
  if (table.header.empty()) throw ParseError(source, 1, "empty file");
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_csv(in, path.string());
}

}  // namespace gacl::io
