#pragma once

#include <string>

#include "gblobs/point_cloud.hpp"

namespace gblobs {

/// Reads a KITTI-style .bin: packed little-endian float32 quadruples
/// (x, y, z, intensity). Returns a dims=4 cloud in file order.
/// Throws IoError if the file cannot be read, MalformedFile if the byte
/// length is not divisible by 16 or any value is non-finite (the message
/// names the offending point index and field).
PointCloud load_kitti_bin(const std::string& path);

/// Writes the packed little-endian float32 x4 layout. A dims=3 cloud is
/// written with intensity 0. Coordinates are rounded to float32; a cloud
/// loaded from a .bin writes back byte-for-byte.
void write_kitti_bin(const std::string& path, const PointCloud& cloud);

/// Reads a whitespace-free CSV of "x,y,z" or "x,y,z,intensity" rows.
/// Lines starting with '#' and blank lines are ignored. dims is inferred
/// from the first data line; mixed arity or an unparsable/non-finite number
/// throws MalformedFile naming the 1-based line number. Point order follows
/// file order.
PointCloud load_xyz_csv(const std::string& path);

/// Writes "x,y,z[,intensity]" rows at full double precision.
void write_xyz_csv(const std::string& path, const PointCloud& cloud);

}  // namespace gblobs
