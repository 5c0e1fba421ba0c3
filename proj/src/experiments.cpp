#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <set>

#include "gblobs/config_json.hpp"
#include "gblobs/genbench.hpp"
#include "gblobs/rng.hpp"

namespace gblobs {

namespace {

// Stream salts for experiment reproducibility. The test-domain salt is shared
// by every evaluation domain so their stochastic steps are paired per scene.
constexpr uint64_t kTrainSceneSalt = 101;
constexpr uint64_t kTrainDomainSalt = 102;
constexpr uint64_t kTestSceneSalt = 103;
constexpr uint64_t kTestDomainSalt = 104;
constexpr uint64_t kClassifierSalt = 105;

using ColumnRanges = std::vector<std::pair<std::size_t, std::size_t>>;

// Scenes are encoded once with a master encoder holding the union of all
// requested atomic feature blocks; each requested set is a column slice.
// Pooling is componentwise, so pooling the master matrix and slicing after
// is exact.
struct MasterPlan {
  EncoderSpec master;
  std::vector<std::string> set_names;
  std::vector<EncoderSpec> sets;
  std::vector<ColumnRanges> columns;
};

MasterPlan build_plan(const std::vector<std::string>& set_names, DMode d_mode) {
  MasterPlan plan;
  plan.set_names = set_names;
  std::set<FeatureKind> needed;
  for (const std::string& name : set_names) {
    EncoderSpec set = EncoderSpec::parse(name, d_mode);
    for (FeatureKind k : set.kinds) {
      if (k == FeatureKind::gblobs) {
        needed.insert(FeatureKind::gblobs_d);
        needed.insert(FeatureKind::gblobs_sigma);
      } else {
        needed.insert(k);
      }
    }
    plan.sets.push_back(std::move(set));
  }

  plan.master.kinds.clear();
  plan.master.d_mode = d_mode;
  for (FeatureKind k : {FeatureKind::global_mean, FeatureKind::rel_distance, FeatureKind::surface_normal,
                        FeatureKind::gblobs_d, FeatureKind::gblobs_sigma})
    if (needed.count(k)) plan.master.kinds.push_back(k);

  for (const EncoderSpec& set : plan.sets) {
    ColumnRanges cols;
    for (FeatureKind k : set.kinds) {
      if (k == FeatureKind::gblobs) {
        cols.push_back(feature_columns(plan.master, FeatureKind::gblobs_d));
        cols.push_back(feature_columns(plan.master, FeatureKind::gblobs_sigma));
      } else {
        cols.push_back(feature_columns(plan.master, k));
      }
    }
    plan.columns.push_back(std::move(cols));
  }
  return plan;
}

// Voxelize + encode + pool one scene into dm; optionally merge the voxel
// occupancy histogram.
void accumulate_scene(DesignMatrix& dm, const LabeledCloud& lc, const GridSpec& grid,
                      const EncoderSpec& enc, Pooling pooling, int threads,
                      std::map<uint32_t, uint64_t>* hist = nullptr) {
  const VoxelSet vs = voxelize(lc.cloud, grid, threads);
  const FeatureSet fs = encode_voxels(lc.cloud, vs, enc, threads);
  pool_object_features(dm, fs, vs, lc, pooling);
  if (hist)
    for (const auto& [occ, count] : occupancy_histogram(vs)) (*hist)[occ] += count;
}

struct CellAcc {
  std::vector<double> per_seed;
  uint64_t rows = 0;
  uint64_t skipped = 0;
};

CellStats finalize_cell(std::string domain, std::string features, std::size_t width, const CellAcc& acc) {
  CellStats cell;
  cell.domain = std::move(domain);
  cell.features = std::move(features);
  cell.width = width;
  cell.per_seed = acc.per_seed;
  cell.rows = acc.rows;
  cell.skipped_objects = acc.skipped;
  const std::size_t n = acc.per_seed.size();
  if (n > 0) {
    double sum = 0.0;
    for (double v : acc.per_seed) sum += v;
    cell.mean = sum / static_cast<double>(n);
    if (n > 1) {
      double ss = 0.0;
      for (double v : acc.per_seed) ss += (v - cell.mean) * (v - cell.mean);
      cell.stddev = std::sqrt(ss / static_cast<double>(n - 1));
    }
  }
  return cell;
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

DesignMatrix build_train_matrix(const ExperimentConfig& cfg, const MasterPlan& plan, uint64_t seed,
                                const GridSpec& grid) {
  DesignMatrix dm;
  for (int s = 0; s < cfg.train_scenes; ++s) {
    const LabeledCloud lc = generate_scene(cfg.scene, derive_stream(seed, kTrainSceneSalt, s));
    if (cfg.train_domain.is_identity()) {
      accumulate_scene(dm, lc, grid, plan.master, cfg.pooling, cfg.threads);
    } else {
      const LabeledCloud shifted =
          apply_domain(lc, cfg.train_domain, derive_stream(seed, kTrainDomainSalt, s));
      accumulate_scene(dm, shifted, grid, plan.master, cfg.pooling, cfg.threads);
    }
  }
  return dm;
}

std::string format_keep(double f) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "keep=%.2f", f);
  return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw InvalidArgument("experiment needs at least one seed");
  if (train_scenes < 1 || test_scenes < 1)
    throw InvalidArgument("train_scenes and test_scenes must be >= 1");
  if (feature_sets.empty()) throw InvalidArgument("experiment needs at least one feature set");
  for (const std::string& fs : feature_sets) EncoderSpec::parse(fs, d_mode);
  scene.validate();
  grid.validate();
  train_domain.validate();
  for (const DomainEntry& d : test_domains) {
    if (d.name.empty()) throw InvalidArgument("test domain needs a name");
    d.domain.validate();
  }
  if (keep_fractions.empty()) throw InvalidArgument("sparsity sweep needs keep fractions");
  for (double f : keep_fractions)
    if (!(f > 0.0 && f <= 1.0)) throw InvalidArgument("keep fractions must be in (0, 1]");
  if (voxel_sizes.empty()) throw InvalidArgument("voxel sweep needs voxel sizes");
  for (double v : voxel_sizes)
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("voxel sizes must be positive");
  if (sweep_encoders.empty()) throw InvalidArgument("voxel sweep needs encoders");
  for (const std::string& enc : sweep_encoders) EncoderSpec::parse(enc, d_mode);
  if (threads < 0) throw InvalidArgument("threads must be >= 0");
}

const CellStats& Report::cell(const std::string& domain, const std::string& features) const {
  for (const CellStats& c : cells)
    if (c.domain == domain && c.features == features) return c;
  throw InvalidArgument("report has no cell (" + domain + ", " + features + ")");
}

Report run_dg_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();

  Report rep;
  rep.experiment = cfg.name;
  rep.kind = "dg";
  rep.config_hash = experiment_config_hash(cfg);
  rep.seeds = cfg.seeds;

  const MasterPlan plan = build_plan(cfg.feature_sets, cfg.d_mode);
  std::vector<DomainEntry> domains;
  domains.push_back({"in_domain", cfg.train_domain});
  for (const DomainEntry& d : cfg.test_domains) domains.push_back(d);

  std::vector<std::vector<CellAcc>> acc(domains.size(), std::vector<CellAcc>(plan.sets.size()));

  for (uint64_t seed : cfg.seeds) {
    try {
      const DesignMatrix train_dm = build_train_matrix(cfg, plan, seed, cfg.grid);

      std::vector<DesignMatrix> test_dms(domains.size());
      for (int t = 0; t < cfg.test_scenes; ++t) {
        const LabeledCloud base = generate_scene(cfg.scene, derive_stream(seed, kTestSceneSalt, t));
        const uint64_t dom_seed = derive_stream(seed, kTestDomainSalt, t);
        for (std::size_t di = 0; di < domains.size(); ++di) {
          if (domains[di].domain.is_identity()) {
            accumulate_scene(test_dms[di], base, cfg.grid, plan.master, cfg.pooling, cfg.threads);
          } else {
            const LabeledCloud shifted = apply_domain(base, domains[di].domain, dom_seed);
            accumulate_scene(test_dms[di], shifted, cfg.grid, plan.master, cfg.pooling, cfg.threads);
          }
        }
      }

      for (std::size_t si = 0; si < plan.sets.size(); ++si) {
        const DesignMatrix train_slice = slice_columns(train_dm, plan.columns[si]);
        TrainConfig tc = cfg.train;
        tc.seed = derive_stream(seed, kClassifierSalt, si);
        const LinearClassifier clf = train_classifier(train_slice, kNumClasses, tc);
        for (std::size_t di = 0; di < domains.size(); ++di) {
          const EvalResult eval = evaluate(clf, slice_columns(test_dms[di], plan.columns[si]));
          acc[di][si].per_seed.push_back(eval.accuracy);
          acc[di][si].rows += eval.count;
          acc[di][si].skipped += test_dms[di].skipped_objects;
        }
      }
    } catch (const std::exception& e) {
      rep.failures.push_back({seed, e.what()});
    }
  }

  for (std::size_t di = 0; di < domains.size(); ++di)
    for (std::size_t si = 0; si < plan.sets.size(); ++si)
      rep.cells.push_back(
          finalize_cell(domains[di].name, plan.set_names[si], plan.sets[si].width(), acc[di][si]));

  rep.runtime_sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rep.created_utc = utc_now();
  return rep;
}

Report run_sparsity_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();

  Report rep;
  rep.experiment = cfg.name;
  rep.kind = "sparsity";
  rep.config_hash = experiment_config_hash(cfg);
  rep.seeds = cfg.seeds;

  const MasterPlan plan = build_plan(cfg.feature_sets, cfg.d_mode);
  const std::size_t nf = cfg.keep_fractions.size();

  std::vector<std::vector<CellAcc>> acc(nf, std::vector<CellAcc>(plan.sets.size()));
  std::vector<std::map<uint32_t, uint64_t>> hists(nf);

  for (uint64_t seed : cfg.seeds) {
    try {
      const DesignMatrix train_dm = build_train_matrix(cfg, plan, seed, cfg.grid);

      std::vector<DesignMatrix> test_dms(nf);
      for (int t = 0; t < cfg.test_scenes; ++t) {
        const LabeledCloud base = generate_scene(cfg.scene, derive_stream(seed, kTestSceneSalt, t));
        const uint64_t dom_seed = derive_stream(seed, kTestDomainSalt, t);
        for (std::size_t fi = 0; fi < nf; ++fi) {
          DomainSpec dom = cfg.train_domain;
          dom.keep_fraction = cfg.keep_fractions[fi];
          if (dom.is_identity()) {
            accumulate_scene(test_dms[fi], base, cfg.grid, plan.master, cfg.pooling, cfg.threads,
                             &hists[fi]);
          } else {
            const LabeledCloud sparse = apply_domain(base, dom, dom_seed);
            accumulate_scene(test_dms[fi], sparse, cfg.grid, plan.master, cfg.pooling, cfg.threads,
                             &hists[fi]);
          }
        }
      }

      for (std::size_t si = 0; si < plan.sets.size(); ++si) {
        const DesignMatrix train_slice = slice_columns(train_dm, plan.columns[si]);
        TrainConfig tc = cfg.train;
        tc.seed = derive_stream(seed, kClassifierSalt, si);
        const LinearClassifier clf = train_classifier(train_slice, kNumClasses, tc);
        for (std::size_t fi = 0; fi < nf; ++fi) {
          const EvalResult eval = evaluate(clf, slice_columns(test_dms[fi], plan.columns[si]));
          acc[fi][si].per_seed.push_back(eval.accuracy);
          acc[fi][si].rows += eval.count;
          acc[fi][si].skipped += test_dms[fi].skipped_objects;
        }
      }
    } catch (const std::exception& e) {
      rep.failures.push_back({seed, e.what()});
    }
  }

  for (std::size_t fi = 0; fi < nf; ++fi) {
    SweepPoint point;
    point.x = cfg.keep_fractions[fi];
    for (std::size_t si = 0; si < plan.sets.size(); ++si)
      point.cells.push_back(finalize_cell(format_keep(cfg.keep_fractions[fi]), plan.set_names[si],
                                          plan.sets[si].width(), acc[fi][si]));
    point.occupancy = hists[fi];
    for (const auto& [occ, count] : hists[fi]) {
      point.total_voxels += count;
      if (occ <= 2) point.frac_le2 += static_cast<double>(count);
    }
    if (point.total_voxels > 0) point.frac_le2 /= static_cast<double>(point.total_voxels);
    rep.curve.push_back(std::move(point));
  }

  rep.runtime_sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rep.created_utc = utc_now();
  return rep;
}

Report run_voxel_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();

  Report rep;
  rep.experiment = cfg.name;
  rep.kind = "voxel";
  rep.config_hash = experiment_config_hash(cfg);
  rep.seeds = cfg.seeds;

  const MasterPlan plan = build_plan(cfg.sweep_encoders, cfg.d_mode);
  const std::size_t nv = cfg.voxel_sizes.size();

  std::vector<std::vector<CellAcc>> acc(nv, std::vector<CellAcc>(plan.sets.size()));
  std::vector<std::map<uint32_t, uint64_t>> hists(nv);

  for (std::size_t vi = 0; vi < nv; ++vi) {
    GridSpec grid = cfg.grid;
    grid.voxel_size = {cfg.voxel_sizes[vi], cfg.voxel_sizes[vi], cfg.voxel_sizes[vi]};
    grid.validate();

    for (uint64_t seed : cfg.seeds) {
      try {
        const DesignMatrix train_dm = build_train_matrix(cfg, plan, seed, grid);

        DesignMatrix test_dm;
        for (int t = 0; t < cfg.test_scenes; ++t) {
          const LabeledCloud base = generate_scene(cfg.scene, derive_stream(seed, kTestSceneSalt, t));
          if (cfg.train_domain.is_identity()) {
            accumulate_scene(test_dm, base, grid, plan.master, cfg.pooling, cfg.threads, &hists[vi]);
          } else {
            const LabeledCloud shifted =
                apply_domain(base, cfg.train_domain, derive_stream(seed, kTestDomainSalt, t));
            accumulate_scene(test_dm, shifted, grid, plan.master, cfg.pooling, cfg.threads, &hists[vi]);
          }
        }

        for (std::size_t si = 0; si < plan.sets.size(); ++si) {
          const DesignMatrix train_slice = slice_columns(train_dm, plan.columns[si]);
          TrainConfig tc = cfg.train;
          tc.seed = derive_stream(seed, kClassifierSalt, si);
          const LinearClassifier clf = train_classifier(train_slice, kNumClasses, tc);
          const EvalResult eval = evaluate(clf, slice_columns(test_dm, plan.columns[si]));
          acc[vi][si].per_seed.push_back(eval.accuracy);
          acc[vi][si].rows += eval.count;
          acc[vi][si].skipped += test_dm.skipped_objects;
        }
      } catch (const std::exception& e) {
        rep.failures.push_back({seed, e.what()});
      }
    }
  }

  for (std::size_t vi = 0; vi < nv; ++vi) {
    SweepPoint point;
    point.x = cfg.voxel_sizes[vi];
    char label[32];
    std::snprintf(label, sizeof(label), "voxel=%.2f", cfg.voxel_sizes[vi]);
    for (std::size_t si = 0; si < plan.sets.size(); ++si)
      point.cells.push_back(finalize_cell(label, plan.set_names[si], plan.sets[si].width(), acc[vi][si]));
    point.occupancy = hists[vi];
    for (const auto& [occ, count] : hists[vi]) {
      point.total_voxels += count;
      if (occ <= 2) point.frac_le2 += static_cast<double>(count);
    }
    if (point.total_voxels > 0) point.frac_le2 /= static_cast<double>(point.total_voxels);
    rep.curve.push_back(std::move(point));
  }

  rep.runtime_sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rep.created_utc = utc_now();
  return rep;
}

}  // namespace gblobs
