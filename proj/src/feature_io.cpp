#include "gblobs/feature_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace gblobs {

namespace {

constexpr char kMagic[4] = {'G', 'B', 'F', 'S'};
constexpr uint32_t kVersion = 1;

void put_u32(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

void put_u64(std::string& out, uint64_t v) {
  put_u32(out, static_cast<uint32_t>(v & 0xFFFFFFFFull));
  put_u32(out, static_cast<uint32_t>(v >> 32));
}

uint32_t get_u32(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint64_t get_u64(const unsigned char* p) {
  return static_cast<uint64_t>(get_u32(p)) | (static_cast<uint64_t>(get_u32(p + 4)) << 32);
}

}  // namespace

void write_feature_bin(const std::string& path, const FeatureSet& fs) {
  std::string bytes;
  bytes.reserve(20 + fs.rows() * (12 + 4 * static_cast<std::size_t>(fs.width)));
  bytes.append(kMagic, 4);
  put_u32(bytes, kVersion);
  put_u32(bytes, fs.width);
  put_u64(bytes, fs.rows());
  for (std::size_t r = 0; r < fs.rows(); ++r) {
    put_u32(bytes, fs.coords[r].ix);
    put_u32(bytes, fs.coords[r].iy);
    put_u32(bytes, fs.coords[r].iz);
    for (float v : fs.row(r)) put_u32(bytes, std::bit_cast<uint32_t>(v));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failure on " + path);
}

FeatureSet read_feature_bin(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on " + path);

  if (bytes.size() < 20) throw MalformedFile(path + ": truncated feature container header");
  const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (std::memcmp(p, kMagic, 4) != 0) throw MalformedFile(path + ": bad magic (expected GBFS)");
  const uint32_t version = get_u32(p + 4);
  if (version != kVersion)
    throw MalformedFile(path + ": unsupported feature container version " + std::to_string(version));
  const uint32_t width = get_u32(p + 8);
  const uint64_t rows = get_u64(p + 12);

  const std::size_t record = 12 + 4 * static_cast<std::size_t>(width);
  const std::size_t expected = 20 + record * rows;
  if (bytes.size() != expected)
    throw MalformedFile(path + ": byte length " + std::to_string(bytes.size()) + " does not match header (expected " +
                        std::to_string(expected) + ")");

  FeatureSet fs;
  fs.width = width;
  fs.coords.reserve(rows);
  fs.values.reserve(rows * width);
  p += 20;
  for (uint64_t r = 0; r < rows; ++r) {
    VoxelCoord c;
    c.ix = get_u32(p);
    c.iy = get_u32(p + 4);
    c.iz = get_u32(p + 8);
    fs.coords.push_back(c);
    p += 12;
    for (uint32_t f = 0; f < width; ++f, p += 4)
      fs.values.push_back(std::bit_cast<float>(get_u32(p)));
  }
  return fs;
}

void write_feature_csv(const std::string& path, const FeatureSet& fs) {
  std::ostringstream out;
  out.precision(9);  // round-trips float32
  out << "ix,iy,iz";
  for (uint32_t f = 0; f < fs.width; ++f) out << ",f" << f;
  out << '\n';
  for (std::size_t r = 0; r < fs.rows(); ++r) {
    out << fs.coords[r].ix << ',' << fs.coords[r].iy << ',' << fs.coords[r].iz;
    for (float v : fs.row(r)) out << ',' << v;
    out << '\n';
  }
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw IoError("cannot open " + path + " for writing");
  file << out.str();
  if (!file) throw IoError("write failure on " + path);
}

}  // namespace gblobs
