#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "gblobs/errors.hpp"
#include "gblobs/geom.hpp"

namespace gblobs {

/// Structure-of-arrays point cloud. dims is 3 (x,y,z) or 4 (x,y,z,intensity).
/// Coordinates are stored as doubles so that metric identities (transform
/// round-trips, grid co-shifts) hold to 1e-9 even at sensor-range magnitudes;
/// float32 file formats convert losslessly on load and round once on write.
/// All stored values are finite: mutation paths reject NaN/inf.
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(int dims, std::string frame_id = "") : frame_id(std::move(frame_id)), dims_(dims) {
    if (dims != 3 && dims != 4) throw InvalidArgument("point cloud dims must be 3 or 4");
  }

  int dims() const { return dims_; }
  bool has_intensity() const { return dims_ == 4; }
  std::size_t size() const { return xs_.size(); }
  bool empty() const { return xs_.empty(); }

  void reserve(std::size_t n) {
    xs_.reserve(n);
    ys_.reserve(n);
    zs_.reserve(n);
    if (dims_ == 4) intensity_.reserve(n);
  }

  void add(double x, double y, double z) {
    if (dims_ != 3) throw InvalidArgument("add(x,y,z) requires dims == 3");
    check_finite(x, y, z);
    xs_.push_back(x);
    ys_.push_back(y);
    zs_.push_back(z);
  }

  void add(double x, double y, double z, double intensity) {
    if (dims_ != 4) throw InvalidArgument("add(x,y,z,i) requires dims == 4");
    check_finite(x, y, z);
    if (!std::isfinite(intensity)) throw InvalidArgument("intensity must be finite");
    xs_.push_back(x);
    ys_.push_back(y);
    zs_.push_back(z);
    intensity_.push_back(intensity);
  }

  double x(std::size_t i) const { return xs_[i]; }
  double y(std::size_t i) const { return ys_[i]; }
  double z(std::size_t i) const { return zs_[i]; }
  double intensity(std::size_t i) const { return intensity_[i]; }
  Vec3 point(std::size_t i) const { return {xs_[i], ys_[i], zs_[i]}; }

  const std::vector<double>& xs() const { return xs_; }
  const std::vector<double>& ys() const { return ys_; }
  const std::vector<double>& zs() const { return zs_; }
  const std::vector<double>& intensities() const { return intensity_; }

  /// Overwrites point i, keeping intensity (if any).
  void set_point(std::size_t i, const Vec3& p) {
    check_finite(p[0], p[1], p[2]);
    xs_[i] = p[0];
    ys_[i] = p[1];
    zs_[i] = p[2];
  }

  std::string frame_id;

 private:
  static void check_finite(double x, double y, double z) {
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
      throw InvalidArgument("point coordinates must be finite");
  }

  int dims_ = 3;
  std::vector<double> xs_, ys_, zs_, intensity_;
};

/// Applies a rigid transform to every point. Validates the transform first
/// (throws InvalidTransform). Intensity and point order are unchanged.
PointCloud transform(const PointCloud& cloud, const RigidTransform& rt);

/// Deterministic order-preserving random subsample.
/// Keeps k = llround(keep_fraction * size()) points (keep_fraction in [0, 1]).
/// Selection: partial Fisher-Yates over an index array seeded by `seed`, then
/// the chosen indices are sorted ascending, so survivors keep their relative
/// order. Same (cloud, fraction, seed) yields the same subset on any platform.
PointCloud subsample(const PointCloud& cloud, double keep_fraction, uint64_t seed);

/// Index-set core of subsample(), reusable for parallel label arrays:
/// returns the kept indices, sorted ascending.
std::vector<uint32_t> subsample_indices(std::size_t count, double keep_fraction, uint64_t seed);

}  // namespace gblobs
