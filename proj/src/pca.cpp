#include "eegfs/learners.hpp"

namespace eegfs {

PcaResult pca(const FeatureMatrix& matrix, double variance_threshold) {
  const Eigen::Index n = matrix.row_count();
  const Eigen::Index d = matrix.column_count();
  if (n < 2) throw InputError("pca: need at least 2 rows");
  if (d < 1) throw InputError("pca: no columns");
  if (!(variance_threshold > 0.0 && variance_threshold <= 1.0))
    throw ConfigError("pca: variance threshold must lie in (0, 1]");

  PcaResult out;
  out.mean = matrix.values.colwise().mean();
  const Eigen::MatrixXd centered = matrix.values.rowwise() - out.mean;
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
  const double total = cov.trace();
  if (!(total > 0.0)) throw DegenerateError("pca: the matrix has zero variance");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw RuntimeAbort("pca: eigen-decomposition failed");
  out.explained_variance = solver.eigenvalues().reverse().cwiseMax(0.0);
  const Eigen::MatrixXd vectors = solver.eigenvectors().rowwise().reverse();

  const double target = variance_threshold * out.explained_variance.sum() * (1.0 - 1e-12);
  double cumulative = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    cumulative += out.explained_variance(j);
    out.retained = static_cast<int>(j + 1);
    if (cumulative >= target) break;
  }

  out.components = vectors.leftCols(out.retained);
  for (int j = 0; j < out.retained; ++j) {
    Eigen::Index lead = 0;
    out.components.col(j).cwiseAbs().maxCoeff(&lead);
    if (out.components(lead, j) < 0.0) out.components.col(j) *= -1.0;
  }

  out.scores.values = centered * out.components;
  out.scores.rows = matrix.rows;
  for (int j = 0; j < out.retained; ++j)
    out.scores.columns.push_back({"PC" + std::to_string(j + 1), "", FeatureKind::component, std::nullopt});
  return out;
}

FeatureMatrix pca_reduce(const FeatureMatrix& matrix, double variance_threshold) {
  return pca(matrix, variance_threshold).scores;
}

}  // namespace eegfs
