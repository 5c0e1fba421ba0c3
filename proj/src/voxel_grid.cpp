#include "gblobs/voxel_grid.hpp"

#include <algorithm>
#include <cmath>

#include "gblobs/parallel.hpp"

namespace gblobs {

void GridSpec::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (!std::isfinite(range_min[a]) || !std::isfinite(range_max[a]) || !std::isfinite(voxel_size[a]))
      throw InvalidArgument("grid range and voxel size must be finite");
    if (!(voxel_size[a] > 0.0)) throw InvalidArgument("voxel size must be positive on every axis");
    if (!(range_max[a] > range_min[a])) throw InvalidArgument("grid range must be non-empty on every axis");
    const double cells = std::ceil((range_max[a] - range_min[a]) / voxel_size[a]);
    if (!(cells < 4294967296.0)) throw InvalidArgument("grid extent does not fit 32-bit voxel indices");
  }
  if (max_points_per_voxel < 1) throw InvalidArgument("max_points_per_voxel must be >= 1");
}

std::array<uint32_t, 3> GridSpec::extents() const {
  std::array<uint32_t, 3> e{};
  for (int a = 0; a < 3; ++a)
    e[a] = static_cast<uint32_t>(std::ceil((range_max[a] - range_min[a]) / voxel_size[a]));
  return e;
}

std::optional<VoxelCoord> voxel_index(const Vec3& p, const GridSpec& spec) {
  uint32_t idx[3];
  const auto ext = spec.extents();
  for (int a = 0; a < 3; ++a) {
    if (!(p[a] >= spec.range_min[a]) || !(p[a] < spec.range_max[a])) return std::nullopt;
    double cell = std::floor((p[a] - spec.range_min[a]) / spec.voxel_size[a]);
    // Guard the float boundary: p just below range_max can round up to the
    // extent; p == range_min always maps to cell 0.
    if (cell < 0.0) cell = 0.0;
    if (cell >= static_cast<double>(ext[a])) cell = static_cast<double>(ext[a]) - 1.0;
    idx[a] = static_cast<uint32_t>(cell);
  }
  return VoxelCoord{idx[0], idx[1], idx[2]};
}

namespace {

struct Entry {
  VoxelCoord coord;
  uint32_t index;
  friend bool operator<(const Entry& a, const Entry& b) {
    if (a.coord != b.coord) return a.coord < b.coord;
    return a.index < b.index;
  }
};

}  // namespace

VoxelSet voxelize(const PointCloud& cloud, const GridSpec& spec, int threads) {
  spec.validate();
  VoxelSet out;
  out.spec = spec;
  out.source_count = cloud.size();
  if (cloud.empty()) {
    out.offsets = {0};
    return out;
  }

  const std::size_t n = cloud.size();
  const std::size_t chunks = chunk_count(n, threads);
  std::vector<std::vector<Entry>> chunk_entries(chunks);
  std::vector<uint64_t> chunk_oor(chunks, 0);

  // Each chunk classifies and sorts its own slice; merging sorted chunks in a
  // fixed order makes the result independent of the thread count.
  parallel_chunks(n, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
    auto& entries = chunk_entries[c];
    entries.reserve(end - begin);
    uint64_t oor = 0;
    for (std::size_t i = begin; i < end; ++i) {
      if (auto coord = voxel_index(cloud.point(i), spec))
        entries.push_back({*coord, static_cast<uint32_t>(i)});
      else
        ++oor;
    }
    std::sort(entries.begin(), entries.end());
    chunk_oor[c] = oor;
  });

  for (uint64_t v : chunk_oor) out.dropped_out_of_range += v;

  std::vector<Entry> entries = std::move(chunk_entries[0]);
  for (std::size_t c = 1; c < chunks; ++c) {
    const std::size_t mid = entries.size();
    entries.insert(entries.end(), chunk_entries[c].begin(), chunk_entries[c].end());
    std::inplace_merge(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(mid), entries.end());
    chunk_entries[c].clear();
    chunk_entries[c].shrink_to_fit();
  }

  out.offsets.push_back(0);
  const uint32_t cap = spec.max_points_per_voxel;
  std::size_t i = 0;
  while (i < entries.size()) {
    const VoxelCoord coord = entries[i].coord;
    std::size_t j = i;
    while (j < entries.size() && entries[j].coord == coord) ++j;
    const std::size_t kept = std::min<std::size_t>(j - i, cap);
    out.coords.push_back(coord);
    for (std::size_t k = i; k < i + kept; ++k) out.members.push_back(entries[k].index);
    out.dropped_overflow += (j - i) - kept;
    out.offsets.push_back(static_cast<uint32_t>(out.members.size()));
    i = j;
  }
  return out;
}

std::map<uint32_t, uint64_t> occupancy_histogram(const VoxelSet& vs) {
  std::map<uint32_t, uint64_t> hist;
  for (std::size_t v = 0; v < vs.size(); ++v) ++hist[vs.offsets[v + 1] - vs.offsets[v]];
  return hist;
}

double occupancy_fraction_at_most(const VoxelSet& vs, uint32_t limit) {
  if (vs.size() == 0) return 0.0;
  uint64_t small = 0;
  for (std::size_t v = 0; v < vs.size(); ++v)
    if (vs.offsets[v + 1] - vs.offsets[v] <= limit) ++small;
  return static_cast<double>(small) / static_cast<double>(vs.size());
}

}  // namespace gblobs
