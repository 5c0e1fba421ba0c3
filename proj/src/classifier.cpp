#include <algorithm>
#include <cmath>

#include "gblobs/genbench.hpp"
#include "gblobs/rng.hpp"

namespace gblobs {

double softmax_loss(const std::vector<double>& xb, std::size_t n, std::size_t width1,
                    const std::vector<int>& labels, int n_classes, const std::vector<double>& weights,
                    double l2, std::vector<double>* grad) {
  const std::size_t c_count = static_cast<std::size_t>(n_classes);
  if (grad) grad->assign(width1 * c_count, 0.0);

  double loss = 0.0;
  std::vector<double> z(c_count), p(c_count);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = xb.data() + i * width1;
    for (std::size_t c = 0; c < c_count; ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < width1; ++j) s += row[j] * weights[j * c_count + c];
      z[c] = s;
    }
    const double m = *std::max_element(z.begin(), z.end());
    double denom = 0.0;
    for (std::size_t c = 0; c < c_count; ++c) {
      p[c] = std::exp(z[c] - m);
      denom += p[c];
    }
    const std::size_t y = static_cast<std::size_t>(labels[i]);
    loss -= std::log(p[y] / denom);
    if (grad) {
      for (std::size_t c = 0; c < c_count; ++c) {
        const double err = p[c] / denom - (c == y ? 1.0 : 0.0);
        for (std::size_t j = 0; j < width1; ++j) (*grad)[j * c_count + c] += row[j] * err;
      }
    }
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  loss *= inv_n;
  if (grad)
    for (double& g : *grad) g *= inv_n;

  // L2 penalty on every row except the bias (row 0).
  for (std::size_t j = 1; j < width1; ++j)
    for (std::size_t c = 0; c < c_count; ++c) {
      const double w = weights[j * c_count + c];
      loss += 0.5 * l2 * w * w;
      if (grad) (*grad)[j * c_count + c] += l2 * w;
    }
  return loss;
}

LinearClassifier train_classifier(const DesignMatrix& dm, int n_classes, const TrainConfig& cfg) {
  if (dm.rows() == 0) throw InvalidArgument("cannot train on an empty design matrix");
  if (dm.width == 0) throw InvalidArgument("cannot train on zero-width features");
  if (n_classes < 2) throw InvalidArgument("need at least two classes");
  for (int y : dm.labels)
    if (y < 0 || y >= n_classes) throw InvalidArgument("label outside [0, n_classes)");
  if (!(cfg.learning_rate > 0.0)) throw InvalidArgument("learning_rate must be positive");
  if (cfg.epochs < 1) throw InvalidArgument("epochs must be >= 1");
  if (cfg.l2 < 0.0) throw InvalidArgument("l2 must be non-negative");

  const std::size_t n = dm.rows();
  const std::size_t w = dm.width;
  LinearClassifier clf;
  clf.width = w;
  clf.n_classes = n_classes;

  // Standardization statistics from the training set only; the model carries
  // them so evaluation uses the training-time scaling.
  clf.feat_mean.assign(w, 0.0);
  clf.feat_scale.assign(w, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = dm.values.data() + i * w;
    for (std::size_t f = 0; f < w; ++f) clf.feat_mean[f] += row[f];
  }
  for (double& m : clf.feat_mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = dm.values.data() + i * w;
    for (std::size_t f = 0; f < w; ++f) {
      const double q = row[f] - clf.feat_mean[f];
      clf.feat_scale[f] += q * q;
    }
  }
  for (double& s : clf.feat_scale) s = std::max(std::sqrt(s / static_cast<double>(n)), 1e-12);

  const std::size_t width1 = w + 1;
  std::vector<double> xb(n * width1);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = xb.data() + i * width1;
    const double* src = dm.values.data() + i * w;
    row[0] = 1.0;
    for (std::size_t f = 0; f < w; ++f) row[1 + f] = (src[f] - clf.feat_mean[f]) / clf.feat_scale[f];
  }

  const std::size_t c_count = static_cast<std::size_t>(n_classes);
  clf.weights.assign(width1 * c_count, 0.0);
  Rng rng(cfg.seed);
  for (std::size_t j = 1; j < width1; ++j)
    for (std::size_t c = 0; c < c_count; ++c) clf.weights[j * c_count + c] = cfg.init_scale * rng.normal();

  clf.loss_log.reserve(static_cast<std::size_t>(cfg.epochs));
  std::vector<double> grad;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double loss = softmax_loss(xb, n, width1, dm.labels, n_classes, clf.weights, cfg.l2, &grad);
    if (!std::isfinite(loss))
      throw TrainingFailure("training loss became non-finite at epoch " + std::to_string(epoch));
    clf.loss_log.push_back(loss);
    for (std::size_t k = 0; k < clf.weights.size(); ++k) clf.weights[k] -= cfg.learning_rate * grad[k];
  }
  return clf;
}

void LinearClassifier::logits(std::span<const double> features, std::span<double> out) const {
  const std::size_t c_count = static_cast<std::size_t>(n_classes);
  for (std::size_t c = 0; c < c_count; ++c) out[c] = weights[c];  // bias row
  for (std::size_t f = 0; f < width; ++f) {
    const double x = (features[f] - feat_mean[f]) / feat_scale[f];
    for (std::size_t c = 0; c < c_count; ++c) out[c] += x * weights[(1 + f) * c_count + c];
  }
}

int LinearClassifier::predict(std::span<const double> features) const {
  std::vector<double> z(static_cast<std::size_t>(n_classes));
  logits(features, z);
  int best = 0;
  for (int c = 1; c < n_classes; ++c)
    if (z[static_cast<std::size_t>(c)] > z[static_cast<std::size_t>(best)]) best = c;
  return best;
}

EvalResult evaluate(const LinearClassifier& clf, const DesignMatrix& dm) {
  if (dm.width != clf.width) throw InvalidArgument("evaluation width does not match the model");
  EvalResult res;
  res.n_classes = clf.n_classes;
  res.confusion.assign(static_cast<std::size_t>(clf.n_classes) * clf.n_classes, 0);
  uint64_t correct = 0;
  for (std::size_t i = 0; i < dm.rows(); ++i) {
    const int truth = dm.labels[i];
    const int pred = clf.predict(dm.row(i));
    ++res.confusion[static_cast<std::size_t>(truth) * clf.n_classes + pred];
    if (pred == truth) ++correct;
  }
  res.count = dm.rows();
  res.accuracy = dm.rows() == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(dm.rows());
  return res;
}

}  // namespace gblobs
