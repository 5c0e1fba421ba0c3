#include "gblobs/config_json.hpp"

#include <fstream>

#include "gblobs/hash.hpp"

namespace gblobs {

namespace {

using nlohmann::json;

json vec3_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

Vec3 vec3_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3)
    throw InvalidArgument(std::string(what) + " must be an array of 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

std::array<double, 2> vec2_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2)
    throw InvalidArgument(std::string(what) + " must be an array of 2 numbers");
  return {j[0].get<double>(), j[1].get<double>()};
}

template <typename T>
void maybe(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

}  // namespace

json grid_spec_json(const GridSpec& g) {
  json j;
  j["range_min"] = vec3_json(g.range_min);
  j["range_max"] = vec3_json(g.range_max);
  j["voxel_size"] = vec3_json(g.voxel_size);
  j["max_points_per_voxel"] = g.max_points_per_voxel;
  return j;
}

GridSpec grid_spec_from_json(const json& j) {
  GridSpec g;
  if (auto it = j.find("range_min"); it != j.end()) g.range_min = vec3_from(*it, "range_min");
  if (auto it = j.find("range_max"); it != j.end()) g.range_max = vec3_from(*it, "range_max");
  if (auto it = j.find("voxel_size"); it != j.end()) g.voxel_size = vec3_from(*it, "voxel_size");
  maybe(j, "max_points_per_voxel", g.max_points_per_voxel);
  g.validate();
  return g;
}

json scene_spec_json(const SceneSpec& s) {
  json j;
  j["counts"] = s.counts;
  json ranges = json::array();
  for (const SizeRange& r : s.size_ranges)
    ranges.push_back(json{{"lo", vec3_json(r.lo)}, {"hi", vec3_json(r.hi)}});
  j["size_ranges"] = ranges;
  j["placement_min"] = s.placement_min;
  j["placement_max"] = s.placement_max;
  j["ground"] = s.ground;
  j["ground_z"] = s.ground_z;
  j["surface_density"] = s.surface_density;
  j["ground_density"] = s.ground_density;
  j["density_jitter"] = s.density_jitter;
  j["noise_sigma"] = s.noise_sigma;
  j["random_yaw"] = s.random_yaw;
  j["min_gap"] = s.min_gap;
  j["max_place_retries"] = s.max_place_retries;
  return j;
}

SceneSpec scene_spec_from_json(const json& j) {
  SceneSpec s;
  if (auto it = j.find("counts"); it != j.end()) {
    if (!it->is_array() || it->size() != kNumClasses)
      throw InvalidArgument("counts must list one value per class");
    for (int c = 0; c < kNumClasses; ++c) s.counts[c] = (*it)[c].get<int>();
  }
  if (auto it = j.find("size_ranges"); it != j.end()) {
    if (!it->is_array() || it->size() != kNumClasses)
      throw InvalidArgument("size_ranges must list one range per class");
    for (int c = 0; c < kNumClasses; ++c) {
      s.size_ranges[c].lo = vec3_from((*it)[c].at("lo"), "size range lo");
      s.size_ranges[c].hi = vec3_from((*it)[c].at("hi"), "size range hi");
    }
  }
  if (auto it = j.find("placement_min"); it != j.end()) s.placement_min = vec2_from(*it, "placement_min");
  if (auto it = j.find("placement_max"); it != j.end()) s.placement_max = vec2_from(*it, "placement_max");
  maybe(j, "ground", s.ground);
  maybe(j, "ground_z", s.ground_z);
  maybe(j, "surface_density", s.surface_density);
  maybe(j, "ground_density", s.ground_density);
  maybe(j, "density_jitter", s.density_jitter);
  maybe(j, "noise_sigma", s.noise_sigma);
  maybe(j, "random_yaw", s.random_yaw);
  maybe(j, "min_gap", s.min_gap);
  maybe(j, "max_place_retries", s.max_place_retries);
  s.validate();
  return s;
}

json domain_spec_json(const DomainSpec& d) {
  json j;
  j["z_offset"] = d.z_offset;
  j["density_factor"] = d.density_factor;
  j["keep_fraction"] = d.keep_fraction;
  j["noise_sigma"] = d.noise_sigma;
  return j;
}

DomainSpec domain_spec_from_json(const json& j) {
  DomainSpec d;
  maybe(j, "z_offset", d.z_offset);
  maybe(j, "density_factor", d.density_factor);
  maybe(j, "keep_fraction", d.keep_fraction);
  maybe(j, "noise_sigma", d.noise_sigma);
  d.validate();
  return d;
}

json train_config_json(const TrainConfig& t) {
  json j;
  j["learning_rate"] = t.learning_rate;
  j["epochs"] = t.epochs;
  j["l2"] = t.l2;
  j["init_scale"] = t.init_scale;
  j["seed"] = t.seed;
  return j;
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig t;
  maybe(j, "learning_rate", t.learning_rate);
  maybe(j, "epochs", t.epochs);
  maybe(j, "l2", t.l2);
  maybe(j, "init_scale", t.init_scale);
  maybe(j, "seed", t.seed);
  return t;
}

json experiment_config_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["seeds"] = c.seeds;
  j["train_scenes"] = c.train_scenes;
  j["test_scenes"] = c.test_scenes;
  j["scene"] = scene_spec_json(c.scene);
  j["grid"] = grid_spec_json(c.grid);
  j["train_domain"] = domain_spec_json(c.train_domain);
  json domains = json::array();
  for (const DomainEntry& d : c.test_domains)
    domains.push_back(json{{"name", d.name}, {"domain", domain_spec_json(d.domain)}});
  j["test_domains"] = domains;
  j["feature_sets"] = c.feature_sets;
  j["d_mode"] = d_mode_name(c.d_mode);
  j["pooling"] = pooling_name(c.pooling);
  j["train"] = train_config_json(c.train);
  j["keep_fractions"] = c.keep_fractions;
  j["voxel_sizes"] = c.voxel_sizes;
  j["sweep_encoders"] = c.sweep_encoders;
  j["threads"] = c.threads;
  return j;
}

ExperimentConfig experiment_config_from_json(const json& j) {
  ExperimentConfig c;
  maybe(j, "name", c.name);
  maybe(j, "seeds", c.seeds);
  maybe(j, "train_scenes", c.train_scenes);
  maybe(j, "test_scenes", c.test_scenes);
  if (auto it = j.find("scene"); it != j.end()) c.scene = scene_spec_from_json(*it);
  if (auto it = j.find("grid"); it != j.end()) c.grid = grid_spec_from_json(*it);
  if (auto it = j.find("train_domain"); it != j.end()) c.train_domain = domain_spec_from_json(*it);
  if (auto it = j.find("test_domains"); it != j.end()) {
    c.test_domains.clear();
    for (const json& entry : *it) {
      DomainEntry d;
      d.name = entry.at("name").get<std::string>();
      if (auto dit = entry.find("domain"); dit != entry.end())
        d.domain = domain_spec_from_json(*dit);
      else
        d.domain = DomainSpec::preset(d.name);
      c.test_domains.push_back(std::move(d));
    }
  }
  maybe(j, "feature_sets", c.feature_sets);
  if (auto it = j.find("d_mode"); it != j.end()) c.d_mode = parse_d_mode(it->get<std::string>());
  if (auto it = j.find("pooling"); it != j.end()) c.pooling = parse_pooling(it->get<std::string>());
  if (auto it = j.find("train"); it != j.end()) c.train = train_config_from_json(*it);
  maybe(j, "keep_fractions", c.keep_fractions);
  maybe(j, "voxel_sizes", c.voxel_sizes);
  maybe(j, "sweep_encoders", c.sweep_encoders);
  maybe(j, "threads", c.threads);
  c.validate();
  return c;
}

uint64_t experiment_config_hash(const ExperimentConfig& c) {
  return fnv1a64(experiment_config_json(c).dump());
}

json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw MalformedFile(path + ": invalid JSON");
  return j;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  try {
    return experiment_config_from_json(parse_json_file(path));
  } catch (const json::exception& e) {
    throw MalformedFile(path + ": " + e.what());
  }
}

SceneSpec load_scene_spec(const std::string& path) {
  try {
    return scene_spec_from_json(parse_json_file(path));
  } catch (const json::exception& e) {
    throw MalformedFile(path + ": " + e.what());
  }
}

DomainSpec load_domain_spec(const std::string& path_or_preset) {
  for (const std::string& name : DomainSpec::preset_names())
    if (name == path_or_preset) return DomainSpec::preset(name);
  try {
    return domain_spec_from_json(parse_json_file(path_or_preset));
  } catch (const json::exception& e) {
    throw MalformedFile(path_or_preset + ": " + e.what());
  }
}

}  // namespace gblobs
