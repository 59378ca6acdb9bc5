#include "eegfs/learners.hpp"

#include "eegfs/random.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

namespace eegfs {

LabeledData LabeledData::from_matrix(const FeatureMatrix& fm) {
  LabeledData out;
  out.features = fm.values;
  std::set<std::string> labels;
  for (const auto& r : fm.rows) labels.insert(r.condition);
  out.classes.assign(labels.begin(), labels.end());
  for (const auto& r : fm.rows)
    out.labels.push_back(static_cast<int>(
        std::lower_bound(out.classes.begin(), out.classes.end(), r.condition) - out.classes.begin()));
  return out;
}

std::vector<int> LabeledData::class_sizes() const {
  std::vector<int> sizes(classes.size(), 0);
  for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
  return sizes;
}

LabeledData LabeledData::masked(const std::vector<bool>& mask) const {
  if (mask.size() != static_cast<std::size_t>(features.cols()))
    throw ConfigError("mask length " + std::to_string(mask.size()) + " does not match " +
                      std::to_string(features.cols()) + " columns");
  std::vector<Eigen::Index> keep;
  for (std::size_t j = 0; j < mask.size(); ++j)
    if (mask[j]) keep.push_back(static_cast<Eigen::Index>(j));
  LabeledData out;
  out.features = features(Eigen::all, keep);
  out.labels = labels;
  out.classes = classes;
  return out;
}

void LabeledData::validate(bool supervised) const {
  if (static_cast<std::size_t>(features.rows()) != labels.size())
    throw IntegrityError("labeled data: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(features.rows()) + " rows");
  if (features.cols() == 0) throw ConfigError("labeled data: no feature columns selected");
  for (int l : labels)
    if (l < 0 || l >= class_count()) throw IntegrityError("labeled data: class index out of range");
  if (supervised) {
    int present = 0;
    for (int s : class_sizes()) present += s > 0;
    if (present < 2) throw ConfigError("supervised learning needs at least 2 classes");
  }
}

LinearSvm train_linear_svm(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const SvmOptions& opt,
                           std::uint64_t seed) {
  const Eigen::Index n = x.rows();
  if (n == 0 || y.size() != n) throw ConfigError("svm: empty or mismatched training set");
  LinearSvm m;
  m.weights = Eigen::VectorXd::Zero(x.cols());
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd q = x.rowwise().squaredNorm().array() + 1.0;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);

  for (m.iterations = 0; m.iterations < opt.max_iterations; ++m.iterations) {
    std::shuffle(order.begin(), order.end(), rng);
    double pg_max = -std::numeric_limits<double>::infinity();
    double pg_min = std::numeric_limits<double>::infinity();
    for (Eigen::Index i : order) {
      const double g = y(i) * (x.row(i).dot(m.weights) + m.bias) - 1.0;
      double pg = 0.0;
      if (alpha(i) == 0.0) {
        pg = std::min(g, 0.0);
      } else if (alpha(i) == opt.c) {
        pg = std::max(g, 0.0);
      } else {
        pg = g;
      }
      pg_max = std::max(pg_max, pg);
      pg_min = std::min(pg_min, pg);
      if (std::abs(pg) > 1e-12) {
        const double old = alpha(i);
        alpha(i) = std::clamp(old - g / q(i), 0.0, opt.c);
        const double step = (alpha(i) - old) * y(i);
        m.weights += step * x.row(i).transpose();
        m.bias += step;
      }
    }
    if (pg_max - pg_min < opt.tolerance) {
      ++m.iterations;
      break;
    }
  }
  return m;
}

int SvmClassifier::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  std::vector<int> votes(static_cast<std::size_t>(class_count), 0);
  std::vector<double> margin(static_cast<std::size_t>(class_count), 0.0);
  for (const auto& p : pairs) {
    const double d = p.machine.decision(x);
    const int winner = d >= 0.0 ? p.positive : p.negative;
    ++votes[static_cast<std::size_t>(winner)];
    margin[static_cast<std::size_t>(p.positive)] += d;
    margin[static_cast<std::size_t>(p.negative)] -= d;
  }
  int best = 0;
  for (int c = 1; c < class_count; ++c) {
    const auto cu = static_cast<std::size_t>(c);
    const auto bu = static_cast<std::size_t>(best);
    if (votes[cu] > votes[bu] || (votes[cu] == votes[bu] && margin[cu] > margin[bu])) best = c;
  }
  return best;
}

SvmClassifier train_svm(const Eigen::MatrixXd& x, const std::vector<int>& labels, int class_count,
                        const SvmOptions& opt, std::uint64_t seed) {
  SvmClassifier clf;
  clf.class_count = class_count;
  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(class_count));
  for (std::size_t i = 0; i < labels.size(); ++i)
    members[static_cast<std::size_t>(labels[i])].push_back(static_cast<Eigen::Index>(i));
  for (int a = 0; a < class_count; ++a)
    for (int b = a + 1; b < class_count; ++b) {
      const auto& ma = members[static_cast<std::size_t>(a)];
      const auto& mb = members[static_cast<std::size_t>(b)];
      if (ma.empty() || mb.empty()) continue;
      std::vector<Eigen::Index> rows(ma);
      rows.insert(rows.end(), mb.begin(), mb.end());
      std::sort(rows.begin(), rows.end());
      Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
      for (std::size_t i = 0; i < rows.size(); ++i)
        y(static_cast<Eigen::Index>(i)) = labels[static_cast<std::size_t>(rows[i])] == a ? 1.0 : -1.0;
      const Eigen::MatrixXd sub = x(rows, Eigen::all);
      clf.pairs.push_back({a, b, train_linear_svm(sub, y, opt, derive_seed({seed, std::uint64_t(a), std::uint64_t(b)}))});
    }
  if (clf.pairs.empty()) throw ConfigError("svm: training data holds a single class");
  return clf;
}

std::vector<int> stratified_folds(const std::vector<int>& labels, int class_count, int folds, std::uint64_t seed) {
  std::vector<std::vector<int>> members(static_cast<std::size_t>(class_count));
  for (std::size_t i = 0; i < labels.size(); ++i) members[static_cast<std::size_t>(labels[i])].push_back(static_cast<int>(i));
  std::mt19937_64 rng(seed);
  std::vector<int> fold(labels.size(), 0);
  int next = 0;
  for (auto& m : members) {
    std::shuffle(m.begin(), m.end(), rng);
    for (int idx : m) {
      fold[static_cast<std::size_t>(idx)] = next;
      next = (next + 1) % folds;
    }
  }
  return fold;
}

CvResult svm_cross_validate(const LabeledData& data, int folds, std::uint64_t seed, const SvmOptions& opt) {
  data.validate(true);
  if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
  CvResult out;
  int smallest = std::numeric_limits<int>::max();
  for (int s : data.class_sizes())
    if (s > 0) smallest = std::min(smallest, s);
  out.folds = folds;
  if (smallest < folds) {
    if (smallest < 2) throw ConfigError("cross-validation: a class has fewer than 2 instances");
    out.folds = smallest;
    out.folds_reduced = true;
  }

  const auto fold = stratified_folds(data.labels, data.class_count(), out.folds, seed);
  out.predictions.assign(data.labels.size(), -1);
  std::size_t correct = 0;
  for (int f = 0; f < out.folds; ++f) {
    std::vector<Eigen::Index> train, test;
    std::vector<int> train_labels;
    for (std::size_t i = 0; i < fold.size(); ++i) {
      if (fold[i] == f) {
        test.push_back(static_cast<Eigen::Index>(i));
      } else {
        train.push_back(static_cast<Eigen::Index>(i));
        train_labels.push_back(data.labels[i]);
      }
    }
    const Eigen::MatrixXd xtrain = data.features(train, Eigen::all);
    const auto clf = train_svm(xtrain, train_labels, data.class_count(), opt, derive_seed({seed, std::uint64_t(f)}));
    for (Eigen::Index i : test) {
      const int p = clf.predict(data.features.row(i));
      out.predictions[static_cast<std::size_t>(i)] = p;
      correct += p == data.labels[static_cast<std::size_t>(i)];
    }
  }
  out.accuracy = static_cast<double>(correct) / static_cast<double>(data.labels.size());
  return out;
}

double svm_cv_accuracy(const LabeledData& data, int folds, std::uint64_t seed, const SvmOptions& opt) {
  return svm_cross_validate(data, folds, seed, opt).accuracy;
}

}  // namespace eegfs
