#include "spdcwg/io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <system_error>
#include <thread>

#include <unistd.h>

#include <fmt/format.h>

#include "spdcwg/errors.hpp"

namespace spdcwg {

namespace {

static_assert(std::endian::native == std::endian::little, "container payload is little-endian");

constexpr std::array<char, 8> magic = {'S', 'P', 'D', 'C', 'W', 'G', '\0', '\x1a'};

template <class T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <class T>
T take(const std::string& in, std::size_t& pos, const std::filesystem::path& path) {
  if (pos + sizeof(T) > in.size()) throw IoError(fmt::format("{}: truncated container", path.string()));
  T value;
  std::memcpy(&value, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return value;
}

}  // namespace

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  auto tmp = path;
  tmp += fmt::format(".tmp.{}.{}", ::getpid(),
                     std::hash<std::thread::id>{}(std::this_thread::get_id()) & 0xffffff);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot open {} for writing", tmp.string()));
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError(fmt::format("write failed: {}", tmp.string()));
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError(fmt::format("cannot move {} into place: {}", path.string(), ec.message()));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_container(const std::filesystem::path& path, const Json& header,
                     std::span<const double> payload) {
  const std::string text = header.dump();
  std::string out;
  out.reserve(32 + text.size() + payload.size_bytes());
  out.append(magic.data(), magic.size());
  put<std::uint32_t>(out, container_version);
  put<std::uint64_t>(out, text.size());
  out += text;
  put<std::uint64_t>(out, payload.size());
  out.append(reinterpret_cast<const char*>(payload.data()), payload.size_bytes());
  write_file_atomic(path, out);
}

Container read_container(const std::filesystem::path& path) {
  const std::string in = read_file(path);
  if (in.size() < magic.size() || std::memcmp(in.data(), magic.data(), magic.size()) != 0) {
    throw IoError(fmt::format("{}: not a spdcwg container", path.string()));
  }
  std::size_t pos = magic.size();
  const auto version = take<std::uint32_t>(in, pos, path);
  if (version != container_version) {
    throw CacheError(fmt::format("{}: container format v{} but this build reads v{}; delete the "
                                 "file or rerun with --rebuild-cache",
                                 path.string(), version, container_version));
  }
  const auto header_len = take<std::uint64_t>(in, pos, path);
  if (pos + header_len > in.size()) throw IoError(fmt::format("{}: truncated header", path.string()));
  Container c;
  try {
    c.header = Json::parse(in.substr(pos, header_len));
  } catch (const Json::parse_error& e) {
    throw IoError(fmt::format("{}: bad header: {}", path.string(), e.what()));
  }
  pos += header_len;
  const auto n = take<std::uint64_t>(in, pos, path);
  if (pos + n * sizeof(double) != in.size()) {
    throw IoError(fmt::format("{}: payload size mismatch", path.string()));
  }
  c.payload.resize(n);
  std::memcpy(c.payload.data(), in.data() + pos, n * sizeof(double));
  return c;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t h) { return fmt::format("{:016x}", h); }

std::string format_number(double x) { return fmt::format("{}", x); }

void CsvTable::row(std::span<const double> values) {
  if (values.size() != columns_.size()) throw ContractError("csv row width mismatch");
  std::string line;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) line += ',';
    line += format_number(values[i]);
  }
  rows_.push_back(std::move(line));
}

void CsvTable::row(const std::string& key, std::span<const double> values) {
  if (values.size() + 1 != columns_.size()) throw ContractError("csv row width mismatch");
  std::string line = key;
  for (double v : values) {
    line += ',';
    line += format_number(v);
  }
  rows_.push_back(std::move(line));
}

void CsvTable::text_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_.size()) throw ContractError("csv row width mismatch");
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += cells[i];
  }
  rows_.push_back(std::move(line));
}

std::string CsvTable::str() const {
  std::string out;
  for (const auto& c : comments_) out += "# " + c + "\n";
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i) out += ',';
    out += columns_[i];
  }
  out += '\n';
  for (const auto& r : rows_) out += r + "\n";
  return out;
}

void CsvTable::write(const std::filesystem::path& path) const { write_file_atomic(path, str()); }

}  // namespace spdcwg
