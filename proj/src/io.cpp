#include "gblobs/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace gblobs {

namespace {

float read_f32_le(const unsigned char* p) {
  const uint32_t u = static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
                     (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(u);
}

void write_f32_le(std::string& out, float v) {
  const uint32_t u = std::bit_cast<uint32_t>(v);
  out.push_back(static_cast<char>(u & 0xFF));
  out.push_back(static_cast<char>((u >> 8) & 0xFF));
  out.push_back(static_cast<char>((u >> 16) & 0xFF));
  out.push_back(static_cast<char>((u >> 24) & 0xFF));
}

const char* kFieldNames[4] = {"x", "y", "z", "intensity"};

}  // namespace

PointCloud load_kitti_bin(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on " + path);
  if (bytes.size() % 16 != 0)
    throw MalformedFile(path + ": byte length " + std::to_string(bytes.size()) +
                        " is not divisible by 16 (expected packed float32 x4 records)");

  const std::size_t n = bytes.size() / 16;
  PointCloud cloud(4);
  cloud.reserve(n);
  const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes.data());
  for (std::size_t i = 0; i < n; ++i, p += 16) {
    float v[4];
    for (int f = 0; f < 4; ++f) {
      v[f] = read_f32_le(p + 4 * f);
      if (!std::isfinite(v[f]))
        throw MalformedFile(path + ": non-finite " + kFieldNames[f] + " at point index " +
                            std::to_string(i));
    }
    cloud.add(v[0], v[1], v[2], v[3]);
  }
  return cloud;
}

void write_kitti_bin(const std::string& path, const PointCloud& cloud) {
  std::string bytes;
  bytes.reserve(cloud.size() * 16);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    write_f32_le(bytes, static_cast<float>(cloud.x(i)));
    write_f32_le(bytes, static_cast<float>(cloud.y(i)));
    write_f32_le(bytes, static_cast<float>(cloud.z(i)));
    write_f32_le(bytes, cloud.has_intensity() ? static_cast<float>(cloud.intensity(i)) : 0.0f);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failure on " + path);
}

namespace {

// Parses one CSV token as a finite double. Leading/trailing spaces tolerated.
double parse_field(std::string_view token, const std::string& path, std::size_t line_no) {
  std::size_t b = 0, e = token.size();
  while (b < e && (token[b] == ' ' || token[b] == '\t')) ++b;
  while (e > b && (token[e - 1] == ' ' || token[e - 1] == '\t')) --e;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data() + b, token.data() + e, value);
  if (ec != std::errc() || ptr != token.data() + e)
    throw MalformedFile(path + ":" + std::to_string(line_no) + ": cannot parse number '" +
                        std::string(token) + "'");
  if (!std::isfinite(value))
    throw MalformedFile(path + ":" + std::to_string(line_no) + ": non-finite value");
  return value;
}

}  // namespace

PointCloud load_xyz_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);

  PointCloud cloud3(3), cloud4(4);
  int dims = 0;  // inferred from the first data line
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;   // blank
    if (line[first] == '#') continue;           // comment

    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (;;) {
      const std::size_t comma = rest.find(',');
      if (comma == std::string_view::npos) {
        fields.push_back(rest);
        break;
      }
      fields.push_back(rest.substr(0, comma));
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != 3 && fields.size() != 4)
      throw MalformedFile(path + ":" + std::to_string(line_no) + ": expected 3 or 4 fields, got " +
                          std::to_string(fields.size()));
    if (dims == 0) dims = static_cast<int>(fields.size());
    if (static_cast<int>(fields.size()) != dims)
      throw MalformedFile(path + ":" + std::to_string(line_no) + ": mixed arity (file started with " +
                          std::to_string(dims) + " fields, this line has " +
                          std::to_string(fields.size()) + ")");

    double v[4] = {0, 0, 0, 0};
    for (std::size_t f = 0; f < fields.size(); ++f) v[f] = parse_field(fields[f], path, line_no);
    if (dims == 4)
      cloud4.add(v[0], v[1], v[2], v[3]);
    else
      cloud3.add(v[0], v[1], v[2]);
  }
  if (in.bad()) throw IoError("read failure on " + path);
  return dims == 4 ? std::move(cloud4) : std::move(cloud3);
}

void write_xyz_csv(const std::string& path, const PointCloud& cloud) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    out << cloud.x(i) << ',' << cloud.y(i) << ',' << cloud.z(i);
    if (cloud.has_intensity()) out << ',' << cloud.intensity(i);
    out << '\n';
  }
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw IoError("cannot open " + path + " for writing");
  file << out.str();
  if (!file) throw IoError("write failure on " + path);
}

}  // namespace gblobs
