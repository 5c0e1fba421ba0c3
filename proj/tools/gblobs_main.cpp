#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gblobs/config_json.hpp"
#include "gblobs/feature_io.hpp"
#include "gblobs/genbench.hpp"
#include "gblobs/io.hpp"
#include "gblobs/parallel.hpp"
#include "gblobs/rng.hpp"

namespace {

using namespace gblobs;
using nlohmann::json;

// Exit codes: 0 success, 1 usage error, 2 data error, 3 experiment failure.
template <typename Fn>
int run_guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const MalformedFile& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const InvalidArgument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 3;
  }
}

struct GridFlags {
  std::vector<double> range;  // xmin ymin zmin xmax ymax zmax
  std::vector<double> voxel;  // vx vy vz
  uint32_t max_points = 5;
  std::string preset;

  void attach(CLI::App* cmd) {
    cmd->add_option("--range", range, "grid box: xmin ymin zmin xmax ymax zmax")->expected(6);
    cmd->add_option("--voxel", voxel, "voxel edge lengths: vx vy vz")->expected(3);
    cmd->add_option("--max-points", max_points, "points kept per voxel (default 5)");
    cmd->add_option("--preset", preset, "grid preset: waymo-voxel");
  }

  GridSpec resolve() const {
    GridSpec g;
    if (!preset.empty()) {
      if (preset != "waymo-voxel") throw InvalidArgument("unknown preset '" + preset + "'");
      g = GridSpec::waymo_preset();
    }
    if (!range.empty()) {
      g.range_min = {range[0], range[1], range[2]};
      g.range_max = {range[3], range[4], range[5]};
    }
    if (!voxel.empty()) g.voxel_size = {voxel[0], voxel[1], voxel[2]};
    g.max_points_per_voxel = max_points;
    g.validate();
    return g;
  }
};

PointCloud load_cloud(const std::string& path, const std::string& format) {
  std::string fmt = format;
  if (fmt == "auto") {
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".bin") == 0)
      fmt = "kitti_bin";
    else if (path.size() >= 4 && (path.compare(path.size() - 4, 4, ".csv") == 0 ||
                                  path.compare(path.size() - 4, 4, ".txt") == 0 ||
                                  path.compare(path.size() - 4, 4, ".xyz") == 0))
      fmt = "csv";
    else
      throw InvalidArgument("cannot infer format of '" + path + "'; pass --format");
  }
  if (fmt == "kitti_bin") return load_kitti_bin(path);
  if (fmt == "csv") return load_xyz_csv(path);
  throw InvalidArgument("unknown format '" + fmt + "' (expected kitti_bin|csv)");
}

std::string default_out(const std::string& input, const char* ext) {
  const std::size_t dot = input.find_last_of('.');
  const std::size_t slash = input.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return input + ext;
  return input.substr(0, dot) + ext;
}

void echo_config(const json& j) { std::cout << "config: " << j.dump() << "\n"; }

int cmd_encode(const std::string& input, const std::string& format, const GridFlags& grid_flags,
               const std::string& encoder, const std::string& d_mode, bool intensity,
               std::string out_path, const std::string& csv_path, int threads) {
  const GridSpec grid = grid_flags.resolve();
  const EncoderSpec spec = EncoderSpec::parse(encoder, parse_d_mode(d_mode), intensity);
  if (out_path.empty()) out_path = default_out(input, ".gbf");

  json cfg;
  cfg["input"] = input;
  cfg["format"] = format;
  cfg["grid"] = grid_spec_json(grid);
  cfg["encoder"] = spec.to_string();
  cfg["d_mode"] = d_mode_name(spec.d_mode);
  cfg["include_intensity"] = spec.include_intensity;
  cfg["threads"] = threads;
  cfg["out"] = out_path;
  echo_config(cfg);

  const PointCloud cloud = load_cloud(input, format);
  const VoxelSet vs = voxelize(cloud, grid, threads);
  const FeatureSet fs = encode_voxels(cloud, vs, spec, threads);

  std::cout << "rows=" << fs.rows() << " width=" << fs.width
            << " dropped_out_of_range=" << vs.dropped_out_of_range
            << " dropped_overflow=" << vs.dropped_overflow << "\n";
  if (fs.rows() == 0)
    std::cout << "warning: no points fell inside the grid range; the feature set is empty\n";
  write_feature_bin(out_path, fs);
  std::cout << "wrote " << out_path << "\n";
  if (!csv_path.empty()) {
    write_feature_csv(csv_path, fs);
    std::cout << "wrote " << csv_path << "\n";
  }
  return 0;
}

int cmd_stats(const std::string& input, const std::string& format, const GridFlags& grid_flags,
              const std::string& csv_path, int threads) {
  const GridSpec grid = grid_flags.resolve();
  json cfg;
  cfg["input"] = input;
  cfg["format"] = format;
  cfg["grid"] = grid_spec_json(grid);
  cfg["threads"] = threads;
  echo_config(cfg);

  const PointCloud cloud = load_cloud(input, format);
  const VoxelSet vs = voxelize(cloud, grid, threads);
  const auto hist = occupancy_histogram(vs);

  std::cout << "points=" << cloud.size() << " voxels=" << vs.size()
            << " dropped_out_of_range=" << vs.dropped_out_of_range
            << " dropped_overflow=" << vs.dropped_overflow << "\n";
  std::cout << "occupancy,count\n";
  for (const auto& [occ, count] : hist) std::cout << occ << ',' << count << "\n";
  std::printf("fraction_le2=%.6f\n", occupancy_fraction_at_most(vs, 2));

  if (!csv_path.empty()) {
    std::ostringstream body;
    body << "occupancy,count\n";
    for (const auto& [occ, count] : hist) body << occ << ',' << count << '\n';
    std::ofstream file(csv_path, std::ios::trunc);
    if (!file) throw IoError("cannot open " + csv_path + " for writing");
    file << body.str();
    std::cout << "wrote " << csv_path << "\n";
  }
  return 0;
}

int cmd_synth(const std::string& scene_path, const std::string& domain_arg, uint64_t seed, int scenes,
              const std::string& out_dir, const std::string& name) {
  constexpr uint64_t kSynthSceneSalt = 201;
  constexpr uint64_t kSynthDomainSalt = 202;

  SceneSpec scene;
  if (!scene_path.empty()) scene = load_scene_spec(scene_path);
  scene.validate();
  DomainSpec domain;
  if (!domain_arg.empty()) domain = load_domain_spec(domain_arg);

  json cfg;
  cfg["scene"] = scene_spec_json(scene);
  cfg["domain"] = domain_spec_json(domain);
  cfg["seed"] = seed;
  cfg["scenes"] = scenes;
  cfg["out_dir"] = out_dir;
  cfg["name"] = name;
  echo_config(cfg);

  if (scenes < 1) throw InvalidArgument("--scenes must be >= 1");
  std::vector<LabeledCloud> generated;
  std::size_t total_points = 0;
  for (int s = 0; s < scenes; ++s) {
    LabeledCloud lc = generate_scene(scene, derive_stream(seed, kSynthSceneSalt, s));
    if (!domain.is_identity()) lc = apply_domain(lc, domain, derive_stream(seed, kSynthDomainSalt, s));
    total_points += lc.cloud.size();
    generated.push_back(std::move(lc));
  }
  write_dataset(out_dir, generated, name, seed);
  std::cout << "wrote dataset " << out_dir << " (" << scenes << " scenes, " << total_points
            << " points)\n";
  return 0;
}

void print_cells(const Report& rep) {
  for (const CellStats& c : rep.cells)
    std::printf("%-16s %-16s mean=%.4f stddev=%.4f\n", c.domain.c_str(), c.features.c_str(), c.mean,
                c.stddev);
  for (const SweepPoint& p : rep.curve)
    for (const CellStats& c : p.cells)
      std::printf("x=%-8.3g %-16s mean=%.4f stddev=%.4f frac_le2=%.4f\n", p.x, c.features.c_str(),
                  c.mean, c.stddev, p.frac_le2);
  for (const SeedFailure& f : rep.failures)
    std::printf("seed %llu FAILED: %s\n", static_cast<unsigned long long>(f.seed), f.error.c_str());
}

int finish_report(const Report& rep, const std::string& out_path, const std::string& csv_path) {
  write_report_json(out_path, rep);
  std::cout << "report: " << out_path << "\n";
  if (!csv_path.empty()) {
    write_report_csv(csv_path, rep);
    std::cout << "csv: " << csv_path << "\n";
  }
  print_cells(rep);
  std::printf("runtime_sec=%.1f\n", rep.runtime_sec);
  return rep.failures.empty() ? 0 : 3;
}

int cmd_dg(const std::string& config_path, const std::string& out_path, const std::string& csv_path) {
  const ExperimentConfig cfg = load_experiment_config(config_path);
  echo_config(experiment_config_json(cfg));
  return finish_report(run_dg_experiment(cfg), out_path, csv_path);
}

int cmd_sweep(const std::string& kind, const std::string& config_path, const std::string& out_path,
              const std::string& csv_path) {
  const ExperimentConfig cfg = load_experiment_config(config_path);
  echo_config(experiment_config_json(cfg));
  if (kind == "sparsity") return finish_report(run_sparsity_sweep(cfg), out_path, csv_path);
  if (kind == "voxel") return finish_report(run_voxel_sweep(cfg), out_path, csv_path);
  throw InvalidArgument("unknown sweep kind '" + kind + "' (expected sparsity|voxel)");
}

int cmd_bench(const std::string& input, std::size_t points, uint64_t seed, int threads, int repeat,
              const GridFlags& grid_flags) {
  const GridSpec grid = grid_flags.resolve();
  const int n_threads = resolve_threads(threads);

  json cfg;
  cfg["input"] = input;
  cfg["points"] = points;
  cfg["seed"] = seed;
  cfg["threads"] = n_threads;
  cfg["repeat"] = repeat;
  cfg["grid"] = grid_spec_json(grid);
  echo_config(cfg);

  if (repeat < 1) throw InvalidArgument("--repeat must be >= 1");
  const PointCloud cloud = input.empty() ? benchmark_cloud(points, seed) : load_cloud(input, "auto");
  const EncoderSpec enc = EncoderSpec::parse("gblobs", DMode::padded);

  auto run_once = [&](int t) {
    const VoxelSet vs = voxelize(cloud, grid, t);
    return encode_voxels(cloud, vs, enc, t);
  };
  auto measure = [&](int t) {
    double best = 1e300;
    for (int r = 0; r < repeat; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      const FeatureSet fs = run_once(t);
      const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      (void)fs;
      if (sec < best) best = sec;
    }
    return best;
  };

  const FeatureSet fs1 = run_once(1);
  const FeatureSet fsN = run_once(n_threads);
  const bool identical = fs1.width == fsN.width && fs1.coords == fsN.coords &&
                         fs1.values.size() == fsN.values.size() &&
                         std::memcmp(fs1.values.data(), fsN.values.data(),
                                     fs1.values.size() * sizeof(float)) == 0;

  const double t1 = measure(1);
  const double tN = measure(n_threads);
  const double pps1 = static_cast<double>(cloud.size()) / t1;
  const double ppsN = static_cast<double>(cloud.size()) / tN;
  std::printf("points=%zu voxels=%zu\n", cloud.size(), fs1.rows());
  std::printf("threads=1: %.1f ms, %.0f points/sec\n", t1 * 1e3, pps1);
  std::printf("threads=%d: %.1f ms, %.0f points/sec\n", n_threads, tN * 1e3, ppsN);
  std::printf("speedup=%.2fx identical_output=%s\n", t1 / tN, identical ? "yes" : "no");
  return identical ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gblobs: per-voxel Gaussian-blob descriptors and a synthetic generalization benchmark"};
  app.require_subcommand(1);

  // encode
  auto* encode = app.add_subcommand("encode", "voxelize a cloud and write per-voxel features");
  std::string enc_input, enc_format = "auto", enc_encoder = "gblobs", enc_dmode = "padded";
  std::string enc_out, enc_csv;
  bool enc_intensity = false;
  int enc_threads = 1;
  GridFlags enc_grid;
  encode->add_option("--input", enc_input, "point cloud file")->required();
  encode->add_option("--format", enc_format, "kitti_bin|csv|auto (default: by extension)");
  enc_grid.attach(encode);
  encode->add_option("--encoder", enc_encoder, "feature blocks, e.g. gblobs or global+sigma");
  encode->add_option("--d-mode", enc_dmode, "literal|padded|voxel_center");
  encode->add_flag("--intensity", enc_intensity, "use the intensity channel (4-channel features)");
  encode->add_option("--out", enc_out, "output container path (default: input stem + .gbf)");
  encode->add_option("--csv", enc_csv, "also export features as CSV");
  encode->add_option("--threads", enc_threads, "worker threads (0 = hardware)");

  // stats
  auto* stats = app.add_subcommand("stats", "voxel occupancy statistics of a cloud");
  std::string st_input, st_format = "auto", st_csv;
  int st_threads = 1;
  GridFlags st_grid;
  stats->add_option("--input", st_input, "point cloud file")->required();
  stats->add_option("--format", st_format, "kitti_bin|csv|auto");
  st_grid.attach(stats);
  stats->add_option("--csv", st_csv, "write the histogram as CSV");
  stats->add_option("--threads", st_threads, "worker threads (0 = hardware)");

  // synth
  auto* synth = app.add_subcommand("synth", "generate a labeled synthetic dataset");
  std::string sy_scene, sy_domain, sy_out, sy_name = "synthetic";
  uint64_t sy_seed = 0;
  int sy_scenes = 1;
  synth->add_option("--scene", sy_scene, "scene spec JSON (defaults when omitted)");
  synth->add_option("--domain", sy_domain, "domain preset name or JSON path");
  synth->add_option("--seed", sy_seed, "base seed");
  synth->add_option("--scenes", sy_scenes, "number of scenes");
  synth->add_option("--out-dir", sy_out, "output directory")->required();
  synth->add_option("--name", sy_name, "dataset name in the manifest");

  // dg
  auto* dg = app.add_subcommand("dg", "run the domain-generalization experiment");
  std::string dg_config, dg_out = "dg_report.json", dg_csv;
  dg->add_option("--config", dg_config, "experiment config JSON")->required();
  dg->add_option("--out", dg_out, "report JSON path");
  dg->add_option("--csv", dg_csv, "also write a CSV summary");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "run a sparsity or voxel-size sweep");
  std::string sw_kind, sw_config, sw_out = "sweep_report.json", sw_csv;
  sweep->add_option("--kind", sw_kind, "sparsity|voxel")->required();
  sweep->add_option("--config", sw_config, "experiment config JSON")->required();
  sweep->add_option("--out", sw_out, "report JSON path");
  sweep->add_option("--csv", sw_csv, "also write a CSV summary");

  // bench
  auto* bench = app.add_subcommand("bench", "voxelize+encode throughput");
  std::string be_input;
  std::size_t be_points = 160000;
  uint64_t be_seed = 7;
  int be_threads = 0, be_repeat = 3;
  GridFlags be_grid;
  be_grid.preset = "waymo-voxel";
  bench->add_option("--input", be_input, "cloud file (default: generated benchmark cloud)");
  bench->add_option("--points", be_points, "generated cloud size (default 160000)");
  bench->add_option("--seed", be_seed, "benchmark cloud seed");
  bench->add_option("--threads", be_threads, "thread count to compare against 1 (0 = hardware)");
  bench->add_option("--repeat", be_repeat, "timing repetitions (best-of)");
  be_grid.attach(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (encode->parsed())
    return run_guarded([&] {
      return cmd_encode(enc_input, enc_format, enc_grid, enc_encoder, enc_dmode, enc_intensity, enc_out,
                        enc_csv, enc_threads);
    });
  if (stats->parsed())
    return run_guarded([&] { return cmd_stats(st_input, st_format, st_grid, st_csv, st_threads); });
  if (synth->parsed())
    return run_guarded([&] { return cmd_synth(sy_scene, sy_domain, sy_seed, sy_scenes, sy_out, sy_name); });
  if (dg->parsed()) return run_guarded([&] { return cmd_dg(dg_config, dg_out, dg_csv); });
  if (sweep->parsed())
    return run_guarded([&] { return cmd_sweep(sw_kind, sw_config, sw_out, sw_csv); });
  if (bench->parsed())
    return run_guarded(
        [&] { return cmd_bench(be_input, be_points, be_seed, be_threads, be_repeat, be_grid); });
  return 1;
}
