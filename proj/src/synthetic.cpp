#include "gblobs/synthetic.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gblobs/config_json.hpp"
#include "gblobs/hash.hpp"
#include "gblobs/io.hpp"
#include "gblobs/rng.hpp"

namespace gblobs {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Stream salts for generate_scene / apply_domain. Object streams are indexed
// by object position in the scene; domain streams by purpose.
constexpr uint64_t kGroundSalt = 0;
constexpr uint64_t kPlacementSalt = 1;
constexpr uint64_t kObjectSalt = 2;
constexpr uint64_t kDensitySalt = 3;
constexpr uint64_t kResampleObjectSalt = 10;
constexpr uint64_t kResampleGroundSalt = 11;
constexpr uint64_t kNoiseSalt = 12;
constexpr uint64_t kSubsampleSalt = 13;

}  // namespace

const char* class_name(ShapeClass cls) {
  switch (cls) {
    case ShapeClass::cuboid: return "cuboid";
    case ShapeClass::cylinder: return "cylinder";
    case ShapeClass::thin_box: return "thin_box";
  }
  return "?";
}

ShapeClass parse_class(const std::string& name) {
  if (name == "cuboid") return ShapeClass::cuboid;
  if (name == "cylinder") return ShapeClass::cylinder;
  if (name == "thin_box") return ShapeClass::thin_box;
  throw InvalidArgument("unknown shape class '" + name + "'");
}

std::array<SizeRange, kNumClasses> SceneSpec::default_size_ranges() {
  return {SizeRange{{4.2, 1.7, 1.35}, {4.8, 1.9, 1.55}},    // cuboid, car-scale
          SizeRange{{0.5, 0.5, 1.65}, {0.7, 0.7, 1.85}},    // cylinder, pedestrian-scale
          SizeRange{{1.6, 0.5, 1.05}, {2.0, 0.7, 1.25}}};   // thin_box, cyclist-scale
}

void SceneSpec::validate() const {
  for (int c = 0; c < kNumClasses; ++c) {
    if (counts[c] < 0) throw InvalidArgument("object counts must be non-negative");
    for (int a = 0; a < 3; ++a) {
      const double lo = size_ranges[c].lo[a], hi = size_ranges[c].hi[a];
      if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo > 0.0) || !(hi >= lo))
        throw InvalidArgument(std::string("invalid size range for class ") +
                              class_name(static_cast<ShapeClass>(c)));
    }
  }
  for (int a = 0; a < 2; ++a)
    if (!std::isfinite(placement_min[a]) || !std::isfinite(placement_max[a]) ||
        !(placement_max[a] > placement_min[a]))
      throw InvalidArgument("placement region must be non-empty");
  if (!std::isfinite(ground_z)) throw InvalidArgument("ground_z must be finite");
  if (!(surface_density > 0.0) || !std::isfinite(surface_density))
    throw InvalidArgument("surface_density must be positive");
  if (ground_density < 0.0 || !std::isfinite(ground_density))
    throw InvalidArgument("ground_density must be non-negative");
  if (density_jitter < 0.0 || density_jitter >= 1.0 || !std::isfinite(density_jitter))
    throw InvalidArgument("density_jitter must be in [0, 1)");
  if (noise_sigma < 0.0 || !std::isfinite(noise_sigma))
    throw InvalidArgument("noise_sigma must be non-negative");
  if (min_gap < 0.0 || !std::isfinite(min_gap)) throw InvalidArgument("min_gap must be non-negative");
  if (max_place_retries < 1) throw InvalidArgument("max_place_retries must be >= 1");
}

int LabeledCloud::class_label(int32_t object_id) const {
  if (object_id < 0 || static_cast<std::size_t>(object_id) >= objects.size())
    throw InvalidArgument("object id " + std::to_string(object_id) + " has no class");
  return static_cast<int>(objects[static_cast<std::size_t>(object_id)].cls);
}

namespace {

double shell_area(ShapeClass cls, const Vec3& s) {
  if (cls == ShapeClass::cylinder) {
    const double r = 0.5 * s[0];
    return kTwoPi * r * s[2] + 2.0 * (0.5 * kTwoPi) * r * r;  // lateral + two caps
  }
  return 2.0 * (s[0] * s[1] + s[0] * s[2] + s[1] * s[2]);
}

// One point on the shell, in the local frame (xy centered, z in [0, size_z]).
// Consumes exactly three uniform draws.
Vec3 sample_shell_local(ShapeClass cls, const Vec3& s, Rng& rng) {
  const double pick = rng.uniform();
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  if (cls == ShapeClass::cylinder) {
    const double r = 0.5 * s[0];
    const double lateral = kTwoPi * r * s[2];
    const double cap = 0.5 * kTwoPi * r * r;
    const double t = pick * (lateral + 2.0 * cap);
    if (t < lateral) {
      const double theta = kTwoPi * u1;
      return {r * std::cos(theta), r * std::sin(theta), s[2] * u2};
    }
    const double rho = r * std::sqrt(u1);
    const double theta = kTwoPi * u2;
    const double z = (t < lateral + cap) ? 0.0 : s[2];
    return {rho * std::cos(theta), rho * std::sin(theta), z};
  }

  const double az = s[0] * s[1];  // each z face
  const double ay = s[0] * s[2];  // each y face
  const double ax = s[1] * s[2];  // each x face
  double t = pick * 2.0 * (az + ay + ax);
  if (t < 2.0 * az) {
    const double z = (t < az) ? 0.0 : s[2];
    return {(u1 - 0.5) * s[0], (u2 - 0.5) * s[1], z};
  }
  t -= 2.0 * az;
  if (t < 2.0 * ay) {
    const double y = (t < ay) ? -0.5 * s[1] : 0.5 * s[1];
    return {(u1 - 0.5) * s[0], y, u2 * s[2]};
  }
  t -= 2.0 * ay;
  const double x = (t < ax) ? -0.5 * s[0] : 0.5 * s[0];
  return {x, (u1 - 0.5) * s[1], u2 * s[2]};
}

// Appends n shell points of obj in world coordinates, with optional isotropic
// Gaussian jitter (three normal draws per point when sigma > 0).
void append_object_points(PointCloud& cloud, std::vector<int32_t>& ids, int32_t id,
                          const ObjectInstance& obj, std::size_t n, Rng& rng, double sigma) {
  const double c = std::cos(obj.yaw), s = std::sin(obj.yaw);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3 local = sample_shell_local(obj.cls, obj.size, rng);
    double x = c * local[0] - s * local[1] + obj.position[0];
    double y = s * local[0] + c * local[1] + obj.position[1];
    double z = local[2] + obj.position[2];
    if (sigma > 0.0) {
      x += sigma * rng.normal();
      y += sigma * rng.normal();
      z += sigma * rng.normal();
    }
    cloud.add(x, y, z);
    ids.push_back(id);
  }
}

void append_ground_points(PointCloud& cloud, std::vector<int32_t>& ids, const SceneSpec& spec,
                          double ground_z, std::size_t n, Rng& rng, double sigma) {
  for (std::size_t k = 0; k < n; ++k) {
    double x = rng.uniform(spec.placement_min[0], spec.placement_max[0]);
    double y = rng.uniform(spec.placement_min[1], spec.placement_max[1]);
    double z = ground_z;
    if (sigma > 0.0) {
      x += sigma * rng.normal();
      y += sigma * rng.normal();
      z += sigma * rng.normal();
    }
    cloud.add(x, y, z);
    ids.push_back(-1);
  }
}

std::size_t shell_point_count(double density, double area) {
  const long long n = std::llround(density * area);
  return n < 1 ? 1 : static_cast<std::size_t>(n);
}

}  // namespace

LabeledCloud generate_scene(const SceneSpec& spec, uint64_t seed) {
  spec.validate();
  LabeledCloud out;
  out.scene = spec;
  out.seed = seed;

  Rng place_rng(derive_stream(seed, kPlacementSalt, 0));
  std::vector<Rng> object_streams;  // continue each object's stream into point sampling

  int object_index = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    for (int j = 0; j < spec.counts[c]; ++j, ++object_index) {
      Rng obj_rng(derive_stream(seed, kObjectSalt, static_cast<uint64_t>(object_index)));
      ObjectInstance obj;
      obj.cls = static_cast<ShapeClass>(c);
      const SizeRange& sr = spec.size_ranges[c];
      obj.size[0] = obj_rng.uniform(sr.lo[0], sr.hi[0]);
      obj.size[1] = obj.cls == ShapeClass::cylinder ? obj.size[0] : obj_rng.uniform(sr.lo[1], sr.hi[1]);
      obj.size[2] = obj_rng.uniform(sr.lo[2], sr.hi[2]);
      // Drawn unconditionally so the point streams line up between yawed and
      // axis-aligned renderings of the same (spec, seed).
      const double yaw = obj_rng.uniform(0.0, kTwoPi);
      obj.yaw = spec.random_yaw ? yaw : 0.0;

      const double radius = 0.5 * std::hypot(obj.size[0], obj.size[1]);
      const double lo_x = spec.placement_min[0] + radius, hi_x = spec.placement_max[0] - radius;
      const double lo_y = spec.placement_min[1] + radius, hi_y = spec.placement_max[1] - radius;
      if (!(hi_x > lo_x) || !(hi_y > lo_y))
        throw GenerationFailure("object " + std::to_string(object_index) +
                                " does not fit the placement region");
      bool placed = false;
      for (int attempt = 0; attempt < spec.max_place_retries && !placed; ++attempt) {
        const double cx = place_rng.uniform(lo_x, hi_x);
        const double cy = place_rng.uniform(lo_y, hi_y);
        placed = true;
        for (const ObjectInstance& other : out.objects) {
          const double other_r = 0.5 * std::hypot(other.size[0], other.size[1]);
          const double dx = cx - other.position[0], dy = cy - other.position[1];
          if (std::hypot(dx, dy) < radius + other_r + spec.min_gap) {
            placed = false;
            break;
          }
        }
        if (placed) obj.position = {cx, cy, spec.ground_z};
      }
      if (!placed)
        throw GenerationFailure("could not place object " + std::to_string(object_index) + " within " +
                                std::to_string(spec.max_place_retries) + " attempts");
      out.objects.push_back(obj);
      object_streams.push_back(obj_rng);
    }
  }

  // Scene-wide density factor (models shot-to-shot sensor and range variation).
  // With density_jitter == 0 no stream is drawn and output matches older data.
  double density_factor = 1.0;
  if (spec.density_jitter > 0.0) {
    Rng density_rng(derive_stream(seed, kDensitySalt, 0));
    density_factor = density_rng.uniform(1.0 - spec.density_jitter, 1.0 + spec.density_jitter);
  }

  // Point layout: object 0 .. n-1 in placement order, then ground.
  for (std::size_t i = 0; i < out.objects.size(); ++i) {
    const std::size_t n = shell_point_count(density_factor * spec.surface_density,
                                            shell_area(out.objects[i].cls, out.objects[i].size));
    append_object_points(out.cloud, out.object_ids, static_cast<int32_t>(i), out.objects[i], n,
                         object_streams[i], spec.noise_sigma);
  }
  if (spec.ground && spec.ground_density > 0.0) {
    const double area = (spec.placement_max[0] - spec.placement_min[0]) *
                        (spec.placement_max[1] - spec.placement_min[1]);
    const std::size_t n =
        static_cast<std::size_t>(std::llround(density_factor * spec.ground_density * area));
    Rng ground_rng(derive_stream(seed, kGroundSalt, 0));
    append_ground_points(out.cloud, out.object_ids, spec, spec.ground_z, n, ground_rng, spec.noise_sigma);
  }
  return out;
}

void DomainSpec::validate() const {
  if (!std::isfinite(z_offset)) throw InvalidArgument("z_offset must be finite");
  if (!(density_factor > 0.0) || !std::isfinite(density_factor))
    throw InvalidArgument("density_factor must be positive");
  if (!(keep_fraction > 0.0 && keep_fraction <= 1.0))
    throw InvalidArgument("keep_fraction must be in (0, 1]");
  if (noise_sigma < 0.0 || !std::isfinite(noise_sigma))
    throw InvalidArgument("noise_sigma must be non-negative");
}

DomainSpec DomainSpec::preset(const std::string& name) {
  DomainSpec d;
  if (name == "dense-64-beam") return d;
  if (name == "sparse-32-beam") {
    d.density_factor = 0.25;
    return d;
  }
  if (name == "shifted-origin") {
    d.z_offset = 1.6;
    return d;
  }
  throw InvalidArgument("unknown domain preset '" + name + "'");
}

std::vector<std::string> DomainSpec::preset_names() {
  return {"dense-64-beam", "sparse-32-beam", "shifted-origin"};
}

LabeledCloud apply_domain(const LabeledCloud& in, const DomainSpec& dom, uint64_t seed) {
  dom.validate();
  LabeledCloud out = in;

  if (dom.density_factor != 1.0) {
    std::vector<std::size_t> counts(out.objects.size(), 0);
    std::size_t ground_count = 0;
    for (int32_t id : out.object_ids) {
      if (id < 0)
        ++ground_count;
      else
        ++counts[static_cast<std::size_t>(id)];
    }
    PointCloud cloud(3, out.cloud.frame_id);
    std::vector<int32_t> ids;
    for (std::size_t i = 0; i < out.objects.size(); ++i) {
      const std::size_t n =
          static_cast<std::size_t>(std::llround(dom.density_factor * static_cast<double>(counts[i])));
      Rng rng(derive_stream(seed, kResampleObjectSalt, i));
      append_object_points(cloud, ids, static_cast<int32_t>(i), out.objects[i], n, rng,
                           out.scene.noise_sigma);
    }
    if (ground_count > 0) {
      const std::size_t n =
          static_cast<std::size_t>(std::llround(dom.density_factor * static_cast<double>(ground_count)));
      Rng rng(derive_stream(seed, kResampleGroundSalt, 0));
      append_ground_points(cloud, ids, out.scene, out.scene.ground_z, n, rng, out.scene.noise_sigma);
    }
    out.cloud = std::move(cloud);
    out.object_ids = std::move(ids);
  }

  if (dom.noise_sigma > 0.0) {
    Rng rng(derive_stream(seed, kNoiseSalt, 0));
    for (std::size_t i = 0; i < out.cloud.size(); ++i) {
      Vec3 p = out.cloud.point(i);
      p[0] += dom.noise_sigma * rng.normal();
      p[1] += dom.noise_sigma * rng.normal();
      p[2] += dom.noise_sigma * rng.normal();
      out.cloud.set_point(i, p);
    }
  }

  if (dom.z_offset != 0.0) {
    for (std::size_t i = 0; i < out.cloud.size(); ++i) {
      Vec3 p = out.cloud.point(i);
      p[2] += dom.z_offset;
      out.cloud.set_point(i, p);
    }
    for (ObjectInstance& obj : out.objects) obj.position[2] += dom.z_offset;
    out.scene.ground_z += dom.z_offset;
  }

  if (dom.keep_fraction != 1.0) {
    const std::vector<uint32_t> keep =
        subsample_indices(out.cloud.size(), dom.keep_fraction, derive_stream(seed, kSubsampleSalt, 0));
    PointCloud cloud(3, out.cloud.frame_id);
    cloud.reserve(keep.size());
    std::vector<int32_t> ids;
    ids.reserve(keep.size());
    for (uint32_t i : keep) {
      cloud.add(out.cloud.x(i), out.cloud.y(i), out.cloud.z(i));
      ids.push_back(out.object_ids[i]);
    }
    out.cloud = std::move(cloud);
    out.object_ids = std::move(ids);
  }

  return out;
}

PointCloud benchmark_cloud(std::size_t target_points, uint64_t seed) {
  SceneSpec spec;
  spec.counts = {10, 5, 5};
  spec.placement_min = {-20.0, -20.0};
  spec.placement_max = {20.0, 20.0};
  spec.surface_density = 300.0;
  spec.ground = false;
  spec.ground_density = 0.0;
  spec.noise_sigma = 0.01;

  const LabeledCloud objects = generate_scene(spec, seed);
  if (objects.cloud.size() >= target_points) {
    const double fraction =
        static_cast<double>(target_points) / static_cast<double>(objects.cloud.size());
    return subsample(objects.cloud, fraction, seed);
  }
  const double area = (spec.placement_max[0] - spec.placement_min[0]) *
                      (spec.placement_max[1] - spec.placement_min[1]);
  spec.ground = true;
  spec.ground_density = static_cast<double>(target_points - objects.cloud.size()) / area;
  return generate_scene(spec, seed).cloud;
}

void write_dataset(const std::string& dir, const std::vector<LabeledCloud>& scenes,
                   const std::string& name, uint64_t seed) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create dataset directory " + dir);

  nlohmann::json manifest;
  manifest["name"] = name;
  manifest["seed"] = seed;
  manifest["scenes"] = nlohmann::json::array();
  if (!scenes.empty()) manifest["scene_spec_hash"] = fnv1a64(scene_spec_json(scenes.front().scene).dump());

  for (std::size_t s = 0; s < scenes.size(); ++s) {
    char base[32];
    std::snprintf(base, sizeof(base), "scene_%05zu", s);
    const std::string bin_name = std::string(base) + ".bin";
    const std::string label_name = std::string(base) + "_labels.csv";
    write_kitti_bin(dir + "/" + bin_name, scenes[s].cloud);

    std::ostringstream labels;
    labels << "point,object_id,class\n";
    for (std::size_t i = 0; i < scenes[s].cloud.size(); ++i) {
      const int32_t id = scenes[s].object_ids[i];
      labels << i << ',' << id << ',' << (id < 0 ? -1 : scenes[s].class_label(id)) << '\n';
    }
    std::ofstream label_file(dir + "/" + label_name, std::ios::trunc);
    if (!label_file) throw IoError("cannot write " + dir + "/" + label_name);
    label_file << labels.str();

    nlohmann::json entry;
    entry["cloud"] = bin_name;
    entry["labels"] = label_name;
    entry["points"] = scenes[s].cloud.size();
    entry["objects"] = scenes[s].objects.size();
    entry["seed"] = scenes[s].seed;
    manifest["scenes"].push_back(entry);
  }

  std::ofstream mf(dir + "/manifest.json", std::ios::trunc);
  if (!mf) throw IoError("cannot write " + dir + "/manifest.json");
  mf << manifest.dump(2) << '\n';
}

}  // namespace gblobs
