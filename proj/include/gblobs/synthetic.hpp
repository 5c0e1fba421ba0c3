#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gblobs/geom.hpp"
#include "gblobs/point_cloud.hpp"

namespace gblobs {

/// Primitive shape classes, sized by default like common road agents
/// (car-, pedestrian-, and cyclist-scale).
enum class ShapeClass : int { cuboid = 0, cylinder = 1, thin_box = 2 };
inline constexpr int kNumClasses = 3;

const char* class_name(ShapeClass cls);
ShapeClass parse_class(const std::string& name);  // throws InvalidArgument

/// Per-axis size interval. For cylinders size[0] is the diameter (size[1] is
/// tied to it) and size[2] the height.
struct SizeRange {
  Vec3 lo{}, hi{};
};

/// Scene recipe: how many objects of each class, their size priors, where
/// they may stand, and how densely surfaces are sampled.
struct SceneSpec {
  std::array<int, kNumClasses> counts = {2, 2, 2};
  std::array<SizeRange, kNumClasses> size_ranges = default_size_ranges();
  std::array<double, 2> placement_min = {-10.0, -10.0};
  std::array<double, 2> placement_max = {10.0, 10.0};
  bool ground = true;
  double ground_z = 0.0;
  double surface_density = 150.0;  // points per square meter on object shells
  double ground_density = 8.0;     // points per square meter on the ground plane
  double density_jitter = 0.0;     // per-scene uniform density factor in [1-j, 1+j]
  double noise_sigma = 0.0;        // isotropic Gaussian jitter at generation time
  bool random_yaw = true;          // false: objects stay axis-aligned (parked rows)
  double min_gap = 0.25;           // clearance between object footprints (meters)
  int max_place_retries = 100;

  /// Size priors: cuboids are car-scale, cylinders pedestrian-scale, thin
  /// boxes cyclist-scale. Heights are deliberately staggered across classes
  /// so every encoder family has class signal to work with.
  static std::array<SizeRange, kNumClasses> default_size_ranges();

  void validate() const;  // throws InvalidArgument
};

/// One placed object. position is the center of the base footprint (its z is
/// the base height); local shell points span z in [0, size[2]] before yaw
/// rotation about +z and translation.
struct ObjectInstance {
  ShapeClass cls = ShapeClass::cuboid;
  Vec3 size{};
  double yaw = 0.0;
  Vec3 position{};
};

/// A generated scene: points, a per-point object id (-1 for ground), and the
/// placed objects. The generating spec and seed ride along so domain
/// transforms can re-sample surfaces at a different density.
struct LabeledCloud {
  PointCloud cloud{3};
  std::vector<int32_t> object_ids;
  std::vector<ObjectInstance> objects;
  SceneSpec scene;
  uint64_t seed = 0;

  /// Class index of an object id; throws InvalidArgument for ground (-1) or
  /// out-of-range ids.
  int class_label(int32_t object_id) const;
};

/// Deterministically generates one scene. Points are laid out object by
/// object (in placement order) followed by ground points. Draws come from
/// per-purpose streams derived from (seed, salt, index), so two scenes with
/// the same spec and seed are identical on any platform and object i's
/// surface points do not depend on how many points object i-1 received.
/// Throws GenerationFailure when an object cannot be placed within
/// max_place_retries attempts without footprint overlap.
LabeledCloud generate_scene(const SceneSpec& spec, uint64_t seed);

/// Domain shift applied to a scene at test (or train) time.
struct DomainSpec {
  double z_offset = 0.0;        // sensor mounting height change, meters
  double density_factor = 1.0;  // > 0: surface re-sampling factor
  double keep_fraction = 1.0;   // (0, 1]: random subsample kept at the end
  double noise_sigma = 0.0;     // extra isotropic Gaussian noise, meters

  bool is_identity() const {
    return z_offset == 0.0 && density_factor == 1.0 && keep_fraction == 1.0 && noise_sigma == 0.0;
  }
  void validate() const;  // throws InvalidArgument

  /// Named presets: "dense-64-beam" (identity), "sparse-32-beam"
  /// (density_factor 0.25), "shifted-origin" (z_offset 1.6).
  static DomainSpec preset(const std::string& name);  // throws InvalidArgument
  static std::vector<std::string> preset_names();
};

/// Applies a domain shift in a fixed step order:
///   1. density re-sampling (each object's shell and the ground are re-drawn
///      with round(density_factor * current count) points),
///   2. additive Gaussian noise,
///   3. z translation (also shifts the carried object poses and ground level),
///   4. random subsample of keep_fraction.
/// Steps at their identity values are skipped exactly, so an identity domain
/// returns a bitwise-identical scene. Randomized steps draw from streams
/// derived from `seed`, independent of the scene's own seed.
LabeledCloud apply_domain(const LabeledCloud& in, const DomainSpec& dom, uint64_t seed);

/// Writes scenes as KITTI-style .bin files plus per-scene label CSVs
/// ("point,object_id,class" with -1s for ground) and a manifest.json listing
/// the scenes, the generating seed, and an FNV-1a hash of the scene spec.
void write_dataset(const std::string& dir, const std::vector<LabeledCloud>& scenes,
                   const std::string& name, uint64_t seed);

/// Structured throughput-benchmark cloud of approximately target_points
/// points: twenty objects in a +-20 m region, topped up with (or subsampled
/// to) the target using ground points. Deterministic in (target, seed).
PointCloud benchmark_cloud(std::size_t target_points, uint64_t seed);

}  // namespace gblobs
