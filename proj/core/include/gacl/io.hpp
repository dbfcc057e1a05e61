#pragma once

#include "gacl/geometry.hpp"

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gacl::io {

/// Malformed input; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal representation that round-trips exactly.
std::string format_double(double v);
/// Strict full-token parse; returns false on any trailing garbage.
bool parse_double(std::string_view token, double& out);
std::vector<std::string_view> split(std::string_view line, char sep);
std::vector<std::string_view> split_whitespace(std::string_view line);
std::string_view trim(std::string_view s);

std::ofstream open_output(const std::filesystem::path& path);
std::ifstream open_input(const std::filesystem::path& path);

// KITTI odometry format: one pose per line, 12 numbers, row-major upper 3x4
// block of the homogeneous matrix.
Trajectory parse_kitti_poses(std::istream& in, const std::string& source = "<stream>");
Trajectory read_kitti_poses(const std::filesystem::path& path);
void write_kitti_poses(std::ostream& out, const Trajectory& trajectory);
void write_kitti_poses(const std::filesystem::path& path, const Trajectory& trajectory);

/// Comma-separated table with a header row. No quoting; every row must have
/// as many fields as the header.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index, or -1.
  int column(const std::string& name) const;
  bool has(const std::string& name) const { return column(name) >= 0; }
  /// Numeric cell; throws ParseError naming the row.
  double number(std::size_t row, const std::string& name) const;
  const std::string& text(std::size_t row, const std::string& name) const;

  std::string source;
};

CsvTable parse_csv(std::istream& in, const std::string& source = "<stream>");
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace gacl::io
