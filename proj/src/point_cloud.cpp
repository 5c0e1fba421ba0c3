#include "gblobs/point_cloud.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gblobs/rng.hpp"

namespace gblobs {

PointCloud transform(const PointCloud& cloud, const RigidTransform& rt) {
  rt.validate();
  PointCloud out(cloud.dims(), cloud.frame_id);
  out.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3 p = rt.apply(cloud.point(i));
    if (cloud.has_intensity())
      out.add(p[0], p[1], p[2], cloud.intensity(i));
    else
      out.add(p[0], p[1], p[2]);
  }
  return out;
}

std::vector<uint32_t> subsample_indices(std::size_t count, double keep_fraction, uint64_t seed) {
  if (!(keep_fraction >= 0.0 && keep_fraction <= 1.0))
    throw InvalidArgument("keep_fraction must be in [0, 1]");
  const std::size_t k = static_cast<std::size_t>(std::llround(keep_fraction * static_cast<double>(count)));
  std::vector<uint32_t> idx(count);
  std::iota(idx.begin(), idx.end(), 0u);
  Rng rng(seed);
  // Partial Fisher-Yates: after i swaps, idx[0..i) is a uniform i-subset.
  for (std::size_t i = 0; i < k && i + 1 < count; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(count - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

PointCloud subsample(const PointCloud& cloud, double keep_fraction, uint64_t seed) {
  const std::vector<uint32_t> keep = subsample_indices(cloud.size(), keep_fraction, seed);
  PointCloud out(cloud.dims(), cloud.frame_id);
  out.reserve(keep.size());
  for (uint32_t i : keep) {
    if (cloud.has_intensity())
      out.add(cloud.x(i), cloud.y(i), cloud.z(i), cloud.intensity(i));
    else
      out.add(cloud.x(i), cloud.y(i), cloud.z(i));
  }
  return out;
}

}  // namespace gblobs
