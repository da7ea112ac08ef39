#pragma once

// BGF1 binary grid files and CSV sample import.
//
// BGF1 layout (all integers and floats little-endian):
//   bytes  0..7   magic "BGF1GRID"
//   bytes  8..11  u32 format version (1)
//   bytes 12..15  u32 reserved (0)
//   u32 dim, u32 N, f64 extent L
//   N (dim 1) or N*N (dim 2) f64 samples, row-major

#include "besov/error.hpp"
#include "besov/grid.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

namespace besov::io {

inline constexpr std::array<char, 8> kBgfMagic{'B', 'G', 'F', '1', 'G', 'R', 'I', 'D'};
inline constexpr std::uint32_t kBgfVersion = 1;

namespace detail {

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

inline void put_f64(std::vector<unsigned char>& out, double d) {
  auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }

  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }
  const unsigned char* here() const { return bytes_.data() + pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw InvalidArgument("BGF1 file truncated");
  }

  const std::vector<unsigned char>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<unsigned char> encode_bgf(const GridFunction& f) {
  std::vector<unsigned char> out(kBgfMagic.begin(), kBgfMagic.end());
  detail::put_u32(out, kBgfVersion);
  detail::put_u32(out, 0);
  detail::put_u32(out, static_cast<std::uint32_t>(f.spec().dim()));
  detail::put_u32(out, static_cast<std::uint32_t>(f.spec().points()));
  detail::put_f64(out, f.spec().extent());
  for (double v : f.values()) detail::put_f64(out, v);
  return out;
}

inline GridFunction decode_bgf(const std::vector<unsigned char>& bytes) {
  detail::Reader r(bytes);
  if (r.remaining() < kBgfMagic.size() || std::memcmp(r.here(), kBgfMagic.data(), kBgfMagic.size()) != 0)
    throw InvalidArgument("not a BGF1 file (bad magic)");
  r.skip(kBgfMagic.size());
  if (std::uint32_t version = r.u32(); version != kBgfVersion)
    throw InvalidArgument("unsupported BGF1 version " + std::to_string(version));
  r.u32();
  std::uint32_t dim = r.u32();
  std::uint32_t n = r.u32();
  double extent = r.f64();
  GridSpec spec(static_cast<int>(dim), extent, n);
  if (r.remaining() != spec.size() * 8)
    throw InvalidArgument("BGF1 payload holds " + std::to_string(r.remaining()) +
                          " bytes, expected " + std::to_string(spec.size() * 8));
  std::vector<double> values(spec.size());
  for (double& v : values) v = r.f64();
  return {spec, std::move(values)};
}

inline void write_bgf(const std::filesystem::path& path, const GridFunction& f) {
  auto bytes = encode_bgf(f);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidArgument("cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline GridFunction read_bgf(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidArgument("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_bgf(bytes);
}

/// Parses CSV samples: one value per line for 1D, or N lines of N
/// comma-separated values for 2D. Blank lines are ignored.
inline GridFunction parse_csv(std::istream& is, double extent) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw InvalidArgument("CSV cell is not a number: '" + cell + "'");
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidArgument("CSV input is empty");
  const std::size_t width = rows.front().size();
  for (const auto& row : rows)
    if (row.size() != width) throw InvalidArgument("CSV rows have differing lengths");
  if (width == 1) {
    GridSpec spec(1, extent, rows.size());
    std::vector<double> v;
    for (const auto& row : rows) v.push_back(row[0]);
    return {spec, std::move(v)};
  }
  if (width != rows.size()) throw InvalidArgument("2D CSV input must be square (N lines of N values)");
  GridSpec spec(2, extent, width);
  std::vector<double> v;
  v.reserve(spec.size());
  for (const auto& row : rows) v.insert(v.end(), row.begin(), row.end());
  return {spec, std::move(v)};
}

inline GridFunction read_csv(const std::filesystem::path& path, double extent) {
  std::ifstream is(path);
  if (!is) throw InvalidArgument("cannot open " + path.string());
  return parse_csv(is, extent);
}

}  // namespace besov::io
