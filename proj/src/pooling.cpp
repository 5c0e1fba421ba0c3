#include <algorithm>
#include <limits>

#include "gblobs/genbench.hpp"

namespace gblobs {

const char* pooling_name(Pooling p) { return p == Pooling::mean ? "mean" : "max"; }

Pooling parse_pooling(const std::string& name) {
  if (name == "mean") return Pooling::mean;
  if (name == "max") return Pooling::max;
  throw InvalidArgument("unknown pooling '" + name + "' (expected mean|max)");
}

void pool_object_features(DesignMatrix& out, const FeatureSet& fs, const VoxelSet& vs,
                          const LabeledCloud& lc, Pooling pooling) {
  if (fs.rows() != vs.size()) throw InvalidArgument("feature set and voxel set are not aligned");
  if (vs.source_count != lc.cloud.size())
    throw InvalidArgument("voxel set was not built from this labeled cloud");
  if (out.width == 0 && out.values.empty())
    out.width = fs.width;
  else if (out.width != fs.width)
    throw InvalidArgument("design matrix width does not match the feature set");

  const std::size_t n_obj = lc.objects.size();
  const std::size_t width = fs.width;
  std::vector<double> acc(n_obj * width,
                          pooling == Pooling::max ? -std::numeric_limits<double>::infinity() : 0.0);
  std::vector<uint32_t> voxels_per_object(n_obj, 0);

  std::vector<std::pair<int32_t, uint32_t>> votes;  // (object id, count) per voxel
  for (std::size_t v = 0; v < vs.size(); ++v) {
    votes.clear();
    for (uint32_t idx : vs.voxel_members(v)) {
      const int32_t id = lc.object_ids[idx];
      bool found = false;
      for (auto& [vid, count] : votes)
        if (vid == id) {
          ++count;
          found = true;
          break;
        }
      if (!found) votes.push_back({id, 1});
    }
    // Majority vote; ties resolve to the smaller id (ground -1 included).
    int32_t winner = votes.front().first;
    uint32_t best = votes.front().second;
    for (const auto& [vid, count] : votes)
      if (count > best || (count == best && vid < winner)) {
        winner = vid;
        best = count;
      }
    if (winner < 0) continue;  // ground voxel

    const std::size_t o = static_cast<std::size_t>(winner);
    ++voxels_per_object[o];
    const auto row = fs.row(v);
    double* dst = acc.data() + o * width;
    if (pooling == Pooling::mean)
      for (std::size_t f = 0; f < width; ++f) dst[f] += static_cast<double>(row[f]);
    else
      for (std::size_t f = 0; f < width; ++f) dst[f] = std::max(dst[f], static_cast<double>(row[f]));
  }

  for (std::size_t o = 0; o < n_obj; ++o) {
    if (voxels_per_object[o] == 0) {
      ++out.skipped_objects;
      continue;
    }
    const double* src = acc.data() + o * width;
    if (pooling == Pooling::mean) {
      const double inv = 1.0 / static_cast<double>(voxels_per_object[o]);
      for (std::size_t f = 0; f < width; ++f) out.values.push_back(src[f] * inv);
    } else {
      for (std::size_t f = 0; f < width; ++f) out.values.push_back(src[f]);
    }
    out.labels.push_back(static_cast<int>(lc.objects[o].cls));
  }
}

DesignMatrix pool_object_features(const FeatureSet& fs, const VoxelSet& vs, const LabeledCloud& lc,
                                  Pooling pooling) {
  DesignMatrix dm;
  pool_object_features(dm, fs, vs, lc, pooling);
  return dm;
}

DesignMatrix slice_columns(const DesignMatrix& dm,
                           const std::vector<std::pair<std::size_t, std::size_t>>& ranges) {
  DesignMatrix out;
  for (const auto& [b, e] : ranges) {
    if (b >= e || e > dm.width) throw InvalidArgument("column slice empty or outside the design matrix");
    out.width += e - b;
  }
  out.labels = dm.labels;
  out.skipped_objects = dm.skipped_objects;
  out.values.reserve(dm.rows() * out.width);
  for (std::size_t r = 0; r < dm.rows(); ++r) {
    const double* src = dm.values.data() + r * dm.width;
    for (const auto& [b, e] : ranges)
      for (std::size_t f = b; f < e; ++f) out.values.push_back(src[f]);
  }
  return out;
}

}  // namespace gblobs
