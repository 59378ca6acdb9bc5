#include "eegfs/learners.hpp"

namespace eegfs {

ClassMetrics metrics_from_confusion(const Eigen::MatrixXi& confusion, const std::vector<std::string>& classes) {
  const auto k = static_cast<Eigen::Index>(classes.size());
  if (confusion.rows() != k || confusion.cols() != k)
    throw ConfigError("metrics: confusion matrix must be square with one row per class");
  const double total = confusion.sum();
  if (!(total > 0)) throw InputError("metrics: empty confusion matrix");

  ClassMetrics m;
  m.classes = classes;
  m.confusion = confusion;
  m.global_accuracy = confusion.trace() / total;
  for (Eigen::Index c = 0; c < k; ++c) {
    const double tp = confusion(c, c);
    const double support = confusion.row(c).sum();
    const double predicted = confusion.col(c).sum();
    const double recall = support > 0 ? tp / support : 0.0;
    const double precision = predicted > 0 ? tp / predicted : 0.0;
    const double f1 = precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    m.per_class_accuracy[classes[static_cast<std::size_t>(c)]] = recall;
    m.weighted_f1 += support / total * f1;
  }
  return m;
}

ClassMetrics metrics_from_predictions(const std::vector<int>& truth, const std::vector<int>& predicted,
                                      const std::vector<std::string>& classes) {
  if (truth.size() != predicted.size()) throw ConfigError("metrics: prediction count mismatch");
  const auto k = static_cast<Eigen::Index>(classes.size());
  Eigen::MatrixXi confusion = Eigen::MatrixXi::Zero(k, k);
  for (std::size_t i = 0; i < truth.size(); ++i) ++confusion(truth[i], predicted[i]);
  return metrics_from_confusion(confusion, classes);
}

ClassMetrics classification_report(const LabeledData& data, int folds, std::uint64_t seed, const SvmOptions& opt) {
  const CvResult cv = svm_cross_validate(data, folds, seed, opt);
  return metrics_from_predictions(data.labels, cv.predictions, data.classes);
}

}  // namespace eegfs
