#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "gblobs/geom.hpp"
#include "gblobs/point_cloud.hpp"

namespace gblobs {

/// Integer voxel coordinate, ordered lexicographically by (ix, iy, iz).
struct VoxelCoord {
  uint32_t ix = 0, iy = 0, iz = 0;
  friend auto operator<=>(const VoxelCoord&, const VoxelCoord&) = default;
};

/// Axis-aligned voxel grid over the half-open box [range_min, range_max).
struct GridSpec {
  Vec3 range_min = {-75.2, -75.2, -2.0};
  Vec3 range_max = {75.2, 75.2, 4.0};
  Vec3 voxel_size = {0.1, 0.1, 0.15};
  uint32_t max_points_per_voxel = 5;

  /// Sensor-range preset: +-75.2 m in x/y, z in [-2, 4), voxels 0.1 x 0.1 x 0.15.
  static GridSpec waymo_preset() { return GridSpec{}; }

  /// Throws InvalidArgument unless sizes are positive, ranges are non-empty,
  /// max_points_per_voxel >= 1, and per-axis extents fit in uint32.
  void validate() const;

  /// Voxel count per axis: ceil((max - min) / size).
  std::array<uint32_t, 3> extents() const;

  /// Metric center of a voxel.
  Vec3 voxel_center(const VoxelCoord& c) const {
    return {range_min[0] + (c.ix + 0.5) * voxel_size[0],
            range_min[1] + (c.iy + 0.5) * voxel_size[1],
            range_min[2] + (c.iz + 0.5) * voxel_size[2]};
  }
};

/// Maps a point to its voxel, or nullopt when the point lies outside
/// [range_min, range_max) on any axis. Indexing is floor((p - min) / size)
/// in double precision; a point exactly on range_min lands in voxel 0, a
/// point exactly on range_max is out of range (half-open convention).
std::optional<VoxelCoord> voxel_index(const Vec3& p, const GridSpec& spec);

/// Occupied voxels of one cloud, CSR layout. Voxels are stored in ascending
/// (ix, iy, iz) lexicographic order; every voxel holds between 1 and
/// max_points_per_voxel source-point indices, in ascending index order.
struct VoxelSet {
  GridSpec spec;
  std::vector<VoxelCoord> coords;       // one per occupied voxel, sorted
  std::vector<uint32_t> offsets;        // size() + 1 prefix offsets into members
  std::vector<uint32_t> members;        // point indices into the source cloud
  uint64_t dropped_out_of_range = 0;    // points outside the grid box
  uint64_t dropped_overflow = 0;        // points beyond max_points_per_voxel
  std::size_t source_count = 0;

  std::size_t size() const { return coords.size(); }
  std::span<const uint32_t> voxel_members(std::size_t v) const {
    return {members.data() + offsets[v], members.data() + offsets[v + 1]};
  }
};

/// Groups in-range points by voxel. When a voxel attracts more than
/// max_points_per_voxel points, the lowest point indices are kept and the
/// rest are counted as dropped_overflow, so truncation is deterministic and
/// matches fixed-capacity buffer semantics. The result is identical for any
/// thread count: candidate (coord, index) pairs are sorted under a total
/// order before grouping.
VoxelSet voxelize(const PointCloud& cloud, const GridSpec& spec, int threads = 1);

/// Histogram of voxel occupancy: map from point count (1..K) to the number
/// of voxels holding exactly that many points. Values sum to vs.size().
std::map<uint32_t, uint64_t> occupancy_histogram(const VoxelSet& vs);

/// Fraction of voxels holding at most `limit` points (0 when the set is empty).
double occupancy_fraction_at_most(const VoxelSet& vs, uint32_t limit);

}  // namespace gblobs
