#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace spdcwg {

using Json = nlohmann::ordered_json;

inline constexpr std::uint32_t container_version = 1;

/// Self-describing array container: magic, format version, a JSON header with
/// grid metadata, then a little-endian float64 payload in row-major order.
struct Container {
  Json header;
  std::vector<double> payload;
};

void write_container(const std::filesystem::path& path, const Json& header,
                     std::span<const double> payload);
Container read_container(const std::filesystem::path& path);

/// Replace `path` by writing a sibling temporary file and renaming it over.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t h);

/// Plot-ready CSV with a '#'-commented preamble. Numbers use the shortest
/// representation that round-trips.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void comment(std::string line) { comments_.push_back(std::move(line)); }
  void row(std::span<const double> values);
  void row(std::initializer_list<double> values) { row(std::span(values.begin(), values.size())); }
  /// Row with a leading text cell followed by numbers.
  void row(const std::string& key, std::span<const double> values);
  /// Row of preformatted cells.
  void text_row(const std::vector<std::string>& cells);

  std::size_t rows() const { return rows_.size(); }
  std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::string> comments_;
  std::vector<std::string> rows_;
};

std::string format_number(double x);

}  // namespace spdcwg
