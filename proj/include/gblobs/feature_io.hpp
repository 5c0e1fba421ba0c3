#pragma once

#include <string>

#include "gblobs/descriptors.hpp"

namespace gblobs {

/// Binary feature container, all little-endian:
///   bytes 0..3   magic "GBFS"
///   u32          format version (currently 1)
///   u32          row width
///   u64          row count
///   per row: u32 ix, u32 iy, u32 iz, width x f32 values
/// write -> read is an identity (same width, coords, and value bits).
void write_feature_bin(const std::string& path, const FeatureSet& fs);

/// Throws IoError on unreadable files, MalformedFile on a bad magic, an
/// unsupported version, or a byte length that disagrees with the header.
FeatureSet read_feature_bin(const std::string& path);

/// CSV with header "ix,iy,iz,f0,...,f{width-1}", one row per voxel, values
/// printed with enough digits to round-trip float32.
void write_feature_csv(const std::string& path, const FeatureSet& fs);

}  // namespace gblobs
