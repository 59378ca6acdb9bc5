#pragma once

#include "eegfs/error.hpp"
#include "eegfs/features.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace eegfs {

/// Feature rows with one class index per row. `classes` is sorted, so class
/// indices are stable for a given label set.
struct LabeledData {
  Eigen::MatrixXd features;
  std::vector<int> labels;
  std::vector<std::string> classes;

  static LabeledData from_matrix(const FeatureMatrix& fm);

  Eigen::Index row_count() const { return features.rows(); }
  Eigen::Index column_count() const { return features.cols(); }
  int class_count() const { return static_cast<int>(classes.size()); }
  /// Rows per class.
  std::vector<int> class_sizes() const;

  LabeledData masked(const std::vector<bool>& mask) const;
  void validate(bool supervised) const;
};

/// L1 distance.
template <typename A, typename B>
typename A::Scalar cityblock(const Eigen::MatrixBase<A>& a, const Eigen::MatrixBase<B>& b) {
  return (a - b).cwiseAbs().sum();
}

// ---------------------------------------------------------------------------
// Linear SVM.

struct SvmOptions {
  double c = 1.0;
  int max_iterations = 10000;
  double tolerance = 1e-4;
};

/// decision(x) = w.x + bias; positive side is the first class of the pair.
struct LinearSvm {
  Eigen::VectorXd weights;
  double bias = 0.0;
  int iterations = 0;

  double decision(const Eigen::Ref<const Eigen::RowVectorXd>& x) const { return x.dot(weights) + bias; }
};

/// Soft-margin hinge-loss SVM by dual coordinate descent. `y` holds +1/-1.
/// The bias is learned as the weight of a constant unit feature.
LinearSvm train_linear_svm(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const SvmOptions& opt,
                           std::uint64_t seed);

/// One-vs-one ensemble; a two-class problem is a single machine.
struct SvmClassifier {
  int class_count = 0;
  struct Pair {
    int positive, negative;
    LinearSvm machine;
  };
  std::vector<Pair> pairs;

  /// Majority vote; ties go to the larger summed signed margin, then lower index.
  int predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
};

SvmClassifier train_svm(const Eigen::MatrixXd& x, const std::vector<int>& labels, int class_count,
                        const SvmOptions& opt, std::uint64_t seed);

/// Stratified fold index per row.
std::vector<int> stratified_folds(const std::vector<int>& labels, int class_count, int folds, std::uint64_t seed);

struct CvResult {
  double accuracy = 0.0;
  int folds = 0;
  bool folds_reduced = false;  // some class had fewer rows than requested folds
  std::vector<int> predictions;  // out-of-fold prediction per row
};

CvResult svm_cross_validate(const LabeledData& data, int folds, std::uint64_t seed, const SvmOptions& opt = {});

/// Pooled out-of-fold accuracy.
double svm_cv_accuracy(const LabeledData& data, int folds, std::uint64_t seed, const SvmOptions& opt = {});

// ---------------------------------------------------------------------------
// K-means under the city-block metric.

struct KMeansOptions {
  int max_iterations = 300;
  int restarts = 5;
};

struct ClusterResult {
  std::vector<int> assignments;
  Eigen::MatrixXd centroids;  // k x d
  double cost = 0.0;          // total within-cluster L1 distance
  double avg_silhouette = 0.0;
  int iterations = 0;
  std::vector<double> iteration_costs;  // cost after each update step, winning restart
};

/// A single seeded run, without restarts or silhouette.
ClusterResult kmeans_once(const Eigen::MatrixXd& data, int k, std::uint64_t seed, int max_iterations = 300);

/// Best of `restarts` runs seeded seed, seed + 1, ... by lowest cost.
ClusterResult kmeans(const Eigen::MatrixXd& data, int k, std::uint64_t seed, const KMeansOptions& opt = {});

/// Per-element silhouette with city-block dissimilarity. Singletons score 0,
/// as does an element with a = b = 0.
template <typename Derived>
Eigen::VectorXd silhouette_values(const Eigen::MatrixBase<Derived>& data, const std::vector<int>& assignments) {
  const Eigen::Index n = data.rows();
  if (static_cast<std::size_t>(n) != assignments.size())
    throw ConfigError("silhouette: one assignment per row required");
  int k = 0;
  for (int a : assignments) {
    if (a < 0) throw ConfigError("silhouette: negative cluster index");
    k = std::max(k, a + 1);
  }
  std::vector<int> sizes(static_cast<std::size_t>(k), 0);
  for (int a : assignments) ++sizes[static_cast<std::size_t>(a)];
  int populated = 0;
  for (int s : sizes) populated += s > 0;
  if (populated < 2) throw ConfigError("silhouette: need at least 2 non-empty clusters");

  Eigen::VectorXd out(n);
  std::vector<double> sums(static_cast<std::size_t>(k));
  for (Eigen::Index e = 0; e < n; ++e) {
    std::fill(sums.begin(), sums.end(), 0.0);
    for (Eigen::Index o = 0; o < n; ++o)
      if (o != e) sums[static_cast<std::size_t>(assignments[o])] += cityblock(data.row(e), data.row(o));
    const auto own = static_cast<std::size_t>(assignments[e]);
    if (sizes[own] == 1) {
      out(e) = 0.0;
      continue;
    }
    const double a = sums[own] / (sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < sums.size(); ++c)
      if (c != own && sizes[c] > 0) b = std::min(b, sums[c] / sizes[c]);
    const double denom = std::max(a, b);
    out(e) = denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return out;
}

/// Unweighted mean of silhouette_values.
template <typename Derived>
double silhouette(const Eigen::MatrixBase<Derived>& data, const std::vector<int>& assignments) {
  return silhouette_values(data, assignments).mean();
}

struct SweepResult {
  std::vector<std::pair<int, double>> entries;  // (k, average silhouette)
  int best_k = 0;
};

/// kmeans + silhouette for every k in [k_min, k_max]; best_k maximises the
/// silhouette (smallest k on ties).
SweepResult cluster_evaluator_sweep(const Eigen::MatrixXd& data, int k_min, int k_max, std::uint64_t seed,
                                    const KMeansOptions& opt = {});

// ---------------------------------------------------------------------------
// PCA.

struct PcaResult {
  FeatureMatrix scores;
  Eigen::RowVectorXd mean;
  Eigen::MatrixXd components;           // d x retained, unit columns
  Eigen::VectorXd explained_variance;   // all eigenvalues, descending
  int retained = 0;
};

/// Keeps the fewest leading components whose cumulative explained variance
/// reaches `variance_threshold` of the total.
PcaResult pca(const FeatureMatrix& matrix, double variance_threshold = 0.95);
FeatureMatrix pca_reduce(const FeatureMatrix& matrix, double variance_threshold = 0.95);

// ---------------------------------------------------------------------------
// Classification metrics.

struct ClassMetrics {
  std::vector<std::string> classes;
  std::map<std::string, double> per_class_accuracy;  // recall
  double global_accuracy = 0.0;
  double weighted_f1 = 0.0;
  Eigen::MatrixXi confusion;  // rows true, columns predicted
};

ClassMetrics metrics_from_confusion(const Eigen::MatrixXi& confusion, const std::vector<std::string>& classes);
ClassMetrics metrics_from_predictions(const std::vector<int>& truth, const std::vector<int>& predicted,
                                      const std::vector<std::string>& classes);

/// Cross-validated SVM with the out-of-fold predictions pooled into one confusion matrix.
ClassMetrics classification_report(const LabeledData& data, int folds, std::uint64_t seed,
                                   const SvmOptions& opt = {});

}  // namespace eegfs
