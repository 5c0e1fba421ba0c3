#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gblobs/descriptors.hpp"
#include "gblobs/synthetic.hpp"
#include "gblobs/voxel_grid.hpp"

namespace gblobs {

enum class Pooling { mean, max };
const char* pooling_name(Pooling p);
Pooling parse_pooling(const std::string& name);  // throws InvalidArgument

/// Object-level feature matrix: one pooled row per labeled object.
struct DesignMatrix {
  std::size_t width = 0;
  std::vector<double> values;  // rows() * width, row-major
  std::vector<int> labels;     // class index per row
  uint64_t skipped_objects = 0;

  std::size_t rows() const { return labels.size(); }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * width, width}; }
};

/// Assigns each voxel to an object by majority vote over its member points'
/// object ids (ties go to the smaller id, so ground at -1 wins any tie it is
/// part of), discards ground voxels, then pools each object's voxel rows
/// componentwise (mean or max) into one row appended to `out`. Objects that
/// received no voxel are counted in skipped_objects instead of emitting a
/// row. fs must come from vs, and vs from lc's cloud.
void pool_object_features(DesignMatrix& out, const FeatureSet& fs, const VoxelSet& vs,
                          const LabeledCloud& lc, Pooling pooling);
DesignMatrix pool_object_features(const FeatureSet& fs, const VoxelSet& vs, const LabeledCloud& lc,
                                  Pooling pooling);

/// Keeps the listed column ranges (in order) of every row.
DesignMatrix slice_columns(const DesignMatrix& dm,
                           const std::vector<std::pair<std::size_t, std::size_t>>& ranges);

struct TrainConfig {
  double learning_rate = 0.3;
  int epochs = 400;
  double l2 = 1e-3;
  double init_scale = 0.01;
  uint64_t seed = 0;
};

/// Multinomial logistic regression trained by full-batch gradient descent.
/// Features are z-scored with statistics estimated on the training set and
/// stored in the model, so evaluation applies the training-time scaling.
struct LinearClassifier {
  std::size_t width = 0;
  int n_classes = 0;
  std::vector<double> weights;     // (width + 1) x n_classes, row 0 is the bias
  std::vector<double> feat_mean;   // width
  std::vector<double> feat_scale;  // width, stddev floored at 1e-12
  std::vector<double> loss_log;    // training loss per epoch (pre-update)

  /// Class logits for one raw (unstandardized) feature row.
  void logits(std::span<const double> features, std::span<double> out) const;
  /// Argmax class; exact logit ties resolve to the lowest class index.
  int predict(std::span<const double> features) const;
};

/// Mean cross-entropy plus (l2/2)*||W||^2 over the non-bias rows, evaluated
/// on pre-standardized rows xb (n x width1, column 0 = 1). Fills *grad
/// (same layout as weights) when non-null. Exposed so the analytic gradient
/// can be checked against finite differences of this same loss.
double softmax_loss(const std::vector<double>& xb, std::size_t n, std::size_t width1,
                    const std::vector<int>& labels, int n_classes, const std::vector<double>& weights,
                    double l2, std::vector<double>* grad);

/// Trains on dm. Throws InvalidArgument for an empty matrix or labels outside
/// [0, n_classes), TrainingFailure if the loss turns non-finite.
LinearClassifier train_classifier(const DesignMatrix& dm, int n_classes, const TrainConfig& cfg);

struct EvalResult {
  double accuracy = 0.0;
  uint64_t count = 0;
  int n_classes = 0;
  std::vector<uint64_t> confusion;  // n_classes x n_classes, row = true class

  uint64_t at(int truth, int predicted) const {
    return confusion[static_cast<std::size_t>(truth) * n_classes + predicted];
  }
};

/// Accuracy and confusion matrix of clf on dm (width must match).
EvalResult evaluate(const LinearClassifier& clf, const DesignMatrix& dm);

/// A named domain to evaluate against.
struct DomainEntry {
  std::string name;
  DomainSpec domain;
};

/// Full experiment recipe shared by the generalization run and the sweeps.
struct ExperimentConfig {
  std::string name = "dg";
  std::vector<uint64_t> seeds = {1, 2, 3, 4, 5};
  int train_scenes = 300;
  int test_scenes = 100;
  SceneSpec scene;
  GridSpec grid;
  DomainSpec train_domain;                // applied to training scenes
  std::vector<DomainEntry> test_domains;  // evaluated in addition to in_domain
  std::vector<std::string> feature_sets = {"global", "global+sigma", "d", "sigma", "d+sigma"};
  DMode d_mode = DMode::padded;
  Pooling pooling = Pooling::mean;
  TrainConfig train;
  std::vector<double> keep_fractions = {1.0, 0.75, 0.5, 0.25, 0.1};  // sparsity sweep
  std::vector<double> voxel_sizes = {0.1, 0.2, 0.4};                 // voxel sweep
  std::vector<std::string> sweep_encoders = {"global", "d+sigma"};   // voxel sweep
  int threads = 1;

  void validate() const;  // throws InvalidArgument (e.g. no seeds, no scenes)
};

/// One (domain x feature set) result aggregated over seeds. stddev is the
/// sample standard deviation (n - 1) of the per-seed accuracies.
struct CellStats {
  std::string domain;
  std::string features;
  std::size_t width = 0;
  std::vector<double> per_seed;
  double mean = 0.0;
  double stddev = 0.0;
  uint64_t rows = 0;             // evaluated object rows, summed over seeds
  uint64_t skipped_objects = 0;  // pooled-away objects, summed over seeds
};

/// One sweep sample: x is the swept parameter (keep fraction or voxel edge).
struct SweepPoint {
  double x = 0.0;
  std::vector<CellStats> cells;
  std::map<uint32_t, uint64_t> occupancy;  // test-voxel occupancy histogram
  double frac_le2 = 0.0;                   // fraction of voxels with <= 2 points
  uint64_t total_voxels = 0;
};

struct SeedFailure {
  uint64_t seed = 0;
  std::string error;
};

/// Experiment output. The results part is a pure function of the config (and
/// thread-count independent); runtime and timestamp are kept apart as meta.
struct Report {
  std::string experiment;
  std::string kind;  // "dg" | "sparsity" | "voxel"
  uint64_t config_hash = 0;
  std::vector<uint64_t> seeds;
  std::vector<CellStats> cells;   // dg table (in_domain + test domains)
  std::vector<SweepPoint> curve;  // sweep kinds
  std::vector<SeedFailure> failures;
  double runtime_sec = 0.0;
  std::string created_utc;

  const CellStats& cell(const std::string& domain, const std::string& features) const;
};

/// Trains per feature set on train_domain scenes, evaluates on a paired set
/// of base test scenes under in_domain plus every configured test domain.
/// Test scenes are generated once per seed and re-used across domains, and a
/// domain's stochastic steps draw from per-(seed, scene) streams shared by
/// all domains, so domain columns differ only by the domain itself.
/// A seed that throws is recorded in failures; the others still report.
Report run_dg_experiment(const ExperimentConfig& cfg);

/// Trains on full-density scenes, evaluates at each test-time keep fraction.
/// Shared subsample streams make sparser test sets strict subsets of denser
/// ones. Also aggregates the test voxel occupancy histogram per fraction.
Report run_sparsity_sweep(const ExperimentConfig& cfg);

/// Re-runs train + in-domain eval at each cubic voxel size for each sweep
/// encoder, recording accuracy and the number of occupied test voxels.
Report run_voxel_sweep(const ExperimentConfig& cfg);

/// Serializes the report: {"results": <deterministic>, "meta": {...}}.
void write_report_json(const std::string& path, const Report& report);
std::string report_json_string(const Report& report);

/// Flat CSV: dg reports emit domain rows, sweep reports emit curve rows.
void write_report_csv(const std::string& path, const Report& report);

}  // namespace gblobs
