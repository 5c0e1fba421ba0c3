#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gblobs/errors.hpp"
#include "gblobs/geom.hpp"
#include "gblobs/voxel_grid.hpp"

namespace gblobs {

template <int M>
using VecM = std::array<double, M>;
template <int M>
using MatM = std::array<double, M * M>;  // row-major

/// Arithmetic mean of a non-empty point set. Throws EmptyNeighborhood.
template <int M>
VecM<M> neighborhood_mean(std::span<const VecM<M>> pts) {
  static_assert(M == 3 || M == 4);
  if (pts.empty()) throw EmptyNeighborhood("mean of empty neighborhood");
  VecM<M> mu{};
  for (const auto& p : pts)
    for (int a = 0; a < M; ++a) mu[a] += p[a];
  const double inv_n = 1.0 / static_cast<double>(pts.size());
  for (int a = 0; a < M; ++a) mu[a] *= inv_n;
  return mu;
}

/// Population covariance (normalized by N, not N-1) of a non-empty point set.
/// Two passes: points are centered on the mean before the outer products are
/// accumulated, so the result is translation invariant to rounding error even
/// at sensor-range coordinates, and a single point yields exactly zero.
/// Only the upper triangle is accumulated and then mirrored, so the returned
/// matrix is symmetric to the bit.
template <int M>
MatM<M> neighborhood_cov(std::span<const VecM<M>> pts) {
  static_assert(M == 3 || M == 4);
  if (pts.empty()) throw EmptyNeighborhood("covariance of empty neighborhood");
  const VecM<M> mu = neighborhood_mean<M>(pts);
  MatM<M> cov{};
  for (const auto& p : pts) {
    VecM<M> q;
    for (int a = 0; a < M; ++a) q[a] = p[a] - mu[a];
    for (int a = 0; a < M; ++a)
      for (int b = a; b < M; ++b) cov[a * M + b] += q[a] * q[b];
  }
  const double inv_n = 1.0 / static_cast<double>(pts.size());
  for (int a = 0; a < M; ++a)
    for (int b = a; b < M; ++b) {
      const double v = cov[a * M + b] * inv_n;
      cov[a * M + b] = v;
      cov[b * M + a] = v;
    }
  return cov;
}

/// How the local offset vector d is realized.
///  - literal: d = (1/N) sum(p_i - mu). Analytically zero; kept for the
///    degeneracy demonstration and as the strictly translation-invariant mode.
///  - padded: fixed-capacity buffer semantics. The neighborhood is treated as
///    K slots of which N hold points and K-N hold zeros, and both the
///    centering mean and the offset average divide by the capacity K:
///    mu~ = (1/K) sum p_i and d = (1/K) sum(p_i - mu~) = (N/K)(1 - N/K) mu.
///    Nonzero unless the buffer is full (N == K) or mu == 0; deliberately not
///    translation invariant.
///  - voxel_center: d = mu - voxel center; invariant under co-shifts of cloud
///    and grid only.
enum class DMode { literal, padded, voxel_center };

const char* d_mode_name(DMode mode);
DMode parse_d_mode(const std::string& name);  // throws InvalidArgument

/// Gaussian blob: offset vector d plus covariance sigma. Flattened width
/// M + M*M (12 for M=3, 20 for M=4).
template <int M>
struct GBlob {
  VecM<M> d{};
  MatM<M> sigma{};

  std::array<double, M + M * M> flatten() const {
    std::array<double, M + M * M> out{};
    for (int a = 0; a < M; ++a) out[a] = d[a];
    for (int i = 0; i < M * M; ++i) out[M + i] = sigma[i];
    return out;
  }
};

/// Computes the blob for one neighborhood.
/// pre: pts non-empty (EmptyNeighborhood otherwise);
///      mode == padded requires capacity with *capacity >= pts.size();
///      mode == voxel_center requires voxel_center (for M == 4 its fourth
///      component is the intensity reference, normally 0).
/// Violations throw InvalidArgument.
template <int M>
GBlob<M> gaussian_blob(std::span<const VecM<M>> pts, DMode mode,
                       std::optional<VecM<M>> voxel_center = std::nullopt,
                       std::optional<uint32_t> capacity = std::nullopt) {
  static_assert(M == 3 || M == 4);
  if (pts.empty()) throw EmptyNeighborhood("blob of empty neighborhood");
  GBlob<M> blob;
  blob.sigma = neighborhood_cov<M>(pts);
  const double n = static_cast<double>(pts.size());
  switch (mode) {
    case DMode::literal: {
      const VecM<M> mu = neighborhood_mean<M>(pts);
      VecM<M> acc{};
      for (const auto& p : pts)
        for (int a = 0; a < M; ++a) acc[a] += p[a] - mu[a];
      for (int a = 0; a < M; ++a) blob.d[a] = acc[a] / n;
      break;
    }
    case DMode::padded: {
      if (!capacity) throw InvalidArgument("padded d_mode requires a capacity");
      if (*capacity < pts.size()) throw InvalidArgument("padded capacity smaller than neighborhood");
      const double k = static_cast<double>(*capacity);
      VecM<M> sum{};
      for (const auto& p : pts)
        for (int a = 0; a < M; ++a) sum[a] += p[a];
      // Capacity-normalized mean, then capacity-normalized offset average
      // over the N real slots: d = (N/K)(1 - N/K) mu.
      VecM<M> mu_k;
      for (int a = 0; a < M; ++a) mu_k[a] = sum[a] / k;
      for (int a = 0; a < M; ++a) blob.d[a] = (sum[a] - n * mu_k[a]) / k;
      break;
    }
    case DMode::voxel_center: {
      if (!voxel_center) throw InvalidArgument("voxel_center d_mode requires the voxel center");
      const VecM<M> mu = neighborhood_mean<M>(pts);
      for (int a = 0; a < M; ++a) blob.d[a] = mu[a] - (*voxel_center)[a];
      break;
    }
  }
  return blob;
}

/// Relative-distance descriptor: per-axis mean absolute offset from the mean,
/// concatenated with the per-axis maximum absolute offset. Width 2*M.
template <int M>
std::array<double, 2 * M> rel_distance_descriptor(std::span<const VecM<M>> pts) {
  static_assert(M == 3 || M == 4);
  if (pts.empty()) throw EmptyNeighborhood("rel_distance of empty neighborhood");
  const VecM<M> mu = neighborhood_mean<M>(pts);
  std::array<double, 2 * M> out{};
  for (const auto& p : pts)
    for (int a = 0; a < M; ++a) {
      const double off = std::abs(p[a] - mu[a]);
      out[a] += off;
      if (off > out[M + a]) out[M + a] = off;
    }
  const double inv_n = 1.0 / static_cast<double>(pts.size());
  for (int a = 0; a < M; ++a) out[a] *= inv_n;
  return out;
}

/// Eigendecomposition of a symmetric 3x3 matrix (cyclic Jacobi rotations).
/// values are ascending; vectors[k] is the unit eigenvector for values[k].
/// Vector signs are fixed deterministically: the component with the largest
/// magnitude is made positive (lowest index wins ties), so equal inputs give
/// bitwise equal outputs. Input asymmetry beyond 1e-9 relative throws
/// InvalidArgument.
struct EigSym3 {
  std::array<double, 3> values;
  std::array<Vec3, 3> vectors;
};
EigSym3 eig_sym3(const Mat3& m);

/// PCA surface descriptor: unit normal (eigenvector of the smallest
/// covariance eigenvalue), oriented toward the sensor origin, plus curvature
/// lambda_min / (lambda_1 + lambda_2 + lambda_3).
/// Fewer than 3 points is degenerate: normal (0,0,1), curvature 0.
/// Empty input throws EmptyNeighborhood. Width 4 when flattened.
struct SurfaceNormal {
  Vec3 normal = {0, 0, 1};
  double curvature = 0.0;
  bool degenerate = false;
};
SurfaceNormal surface_normal_descriptor(std::span<const Vec3> pts, const Vec3& sensor_origin);

/// Per-voxel feature blocks an encoder can emit. Widths for M spatial (+1
/// intensity) channels:
///   global_mean    M      mean position in the cloud frame (not local)
///   rel_distance   2M
///   surface_normal 4      xyz only, even when intensity is enabled
///   gblobs_d       M      the d block alone
///   gblobs_sigma   M*M    the sigma block alone
///   gblobs         M+M*M  d followed by sigma
/// With compact_sigma the sigma block shrinks to its upper triangle,
/// M*(M+1)/2 values, so gblobs_sigma is 6 (M=3) / 10 (M=4) wide and gblobs
/// is 9 / 14.
enum class FeatureKind { global_mean, rel_distance, surface_normal, gblobs_d, gblobs_sigma, gblobs };

const char* feature_kind_name(FeatureKind kind);

/// Describes one encoder: an ordered concatenation of distinct feature kinds
/// plus the d realization and the channel count.
struct EncoderSpec {
  std::vector<FeatureKind> kinds = {FeatureKind::gblobs};
  DMode d_mode = DMode::padded;
  bool include_intensity = false;
  /// Emit sigma as its upper triangle (row-major: xx, xy, xz, yy, yz, zz)
  /// instead of the full matrix with mirrored duplicates. Off by default;
  /// the experiments and the stock feature-set names use the full layout.
  bool compact_sigma = false;

  int point_dims() const { return include_intensity ? 4 : 3; }
  std::size_t width() const;
  void validate() const;  // InvalidArgument on empty or duplicate kinds

  /// Parses "global", "d+sigma", "gblobs", "rel_distance+surface_normal", ...
  /// Accepted kind names: global|global_mean, d, sigma, gblobs, rel_distance,
  /// surface_normal. Throws InvalidArgument on unknown names or duplicates.
  static EncoderSpec parse(const std::string& text, DMode d_mode = DMode::padded,
                           bool include_intensity = false);
  std::string to_string() const;  // kind names joined with '+'
};

/// Encoded features: one row of `width` float32 values per occupied voxel,
/// in the voxel set's (ascending coordinate) order.
struct FeatureSet {
  uint32_t width = 0;
  std::vector<VoxelCoord> coords;
  std::vector<float> values;  // rows() * width, row-major

  std::size_t rows() const { return coords.size(); }
  std::span<const float> row(std::size_t r) const {
    return {values.data() + static_cast<std::size_t>(r) * width, width};
  }
};

/// Encodes every voxel of `vs` (built from `cloud`). Rows follow the voxel
/// order; the output is identical for every thread count (each row is written
/// into its preallocated slot). sensor_origin feeds surface-normal
/// orientation. include_intensity requires a dims=4 cloud.
FeatureSet encode_voxels(const PointCloud& cloud, const VoxelSet& vs, const EncoderSpec& spec,
                         int threads = 1, const Vec3& sensor_origin = {0, 0, 0});

/// voxelize() followed by encode_voxels(). A cloud entirely outside the grid
/// yields a FeatureSet with zero rows.
FeatureSet encode_cloud(const PointCloud& cloud, const GridSpec& grid, const EncoderSpec& spec,
                        int threads = 1, const Vec3& sensor_origin = {0, 0, 0});

/// Column range [begin, end) of `kind` inside spec's concatenated row, for
/// slicing a master feature matrix into sub-encoders. Throws InvalidArgument
/// if spec does not contain the kind.
std::pair<std::size_t, std::size_t> feature_columns(const EncoderSpec& spec, FeatureKind kind);

}  // namespace gblobs
