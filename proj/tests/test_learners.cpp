#include "support.hpp"

#include "eegfs/error.hpp"
#include "eegfs/learners.hpp"

#include <doctest.h>

#include <numeric>

using namespace eegfs;

namespace {

LabeledData labeled(const Eigen::MatrixXd& x, const std::vector<int>& labels, int classes) {
  LabeledData d;
  d.features = x;
  d.labels = labels;
  for (int c = 0; c < classes; ++c) d.classes.push_back("c" + std::to_string(c));
  return d;
}

LabeledData two_blobs(double separation_sd, int per_class, std::uint64_t seed) {
  Eigen::MatrixXd centers(2, 2);
  centers << 0.0, 0.0, separation_sd / std::sqrt(2.0), separation_sd / std::sqrt(2.0);
  std::vector<int> labels;
  const Eigen::MatrixXd x = support::blobs(centers, per_class, 1.0, seed, &labels);
  return labeled(x, labels, 2);
}

// Exhaustive search over directions and thresholds on a grid; true when some
// line misclassifies at most `errors` points.
bool linearly_separable(const LabeledData& d, int errors) {
  for (int a = 0; a < 360; ++a) {
    const double th = a * support::pi / 180.0;
    Eigen::VectorXd proj = d.features * Eigen::Vector2d(std::cos(th), std::sin(th));
    std::vector<double> cuts(proj.data(), proj.data() + proj.size());
    for (double cut : cuts) {
      int wrong = 0;
      for (Eigen::Index i = 0; i < proj.size(); ++i) wrong += (proj(i) > cut) != (d.labels[static_cast<std::size_t>(i)] == 1);
      if (wrong <= errors) return true;
    }
  }
  return false;
}

// Optimal L1 2-partition by enumeration; centroid = component-wise median.
double best_two_partition_cost(const Eigen::MatrixXd& x) {
  const auto n = static_cast<int>(x.rows());
  double best = std::numeric_limits<double>::infinity();
  for (int mask = 1; mask < (1 << n) - 1; ++mask) {
    double cost = 0.0;
    for (int side = 0; side < 2; ++side) {
      std::vector<Eigen::Index> idx;
      for (int i = 0; i < n; ++i)
        if (((mask >> i) & 1) == side) idx.push_back(i);
      for (Eigen::Index c = 0; c < x.cols(); ++c) {
        std::vector<double> v;
        for (auto i : idx) v.push_back(x(i, c));
        std::sort(v.begin(), v.end());
        const double med = v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
        for (double e : v) cost += std::fabs(e - med);
      }
    }
    best = std::min(best, cost);
  }
  return best;
}

}  // namespace

TEST_CASE("SVM on separable blobs") {
  const LabeledData d = two_blobs(8.0, 50, 3);
  REQUIRE(linearly_separable(d, 1));
  CHECK(svm_cv_accuracy(d, 10, 1) >= 0.98);
  CHECK(svm_cv_accuracy(d, 10, 1) == svm_cv_accuracy(d, 10, 1));
}

TEST_CASE("SVM at chance on permuted labels") {
  LabeledData d = two_blobs(5.0, 50, 4);
  std::mt19937_64 rng(99);
  std::shuffle(d.labels.begin(), d.labels.end(), rng);
  // For 100 guesses at p = 0.5 the accuracy sd is 0.05; [0.3, 0.7] is a 4-sigma band.
  const double acc = svm_cv_accuracy(d, 10, 2);
  CHECK(acc >= 0.3);
  CHECK(acc <= 0.7);
}

TEST_CASE("SVM with a duplicated column") {
  Eigen::MatrixXd centers(2, 1);
  centers << 0.0, 2.5;
  std::vector<int> labels;
  const Eigen::MatrixXd x = support::blobs(centers, 40, 1.0, 5, &labels);
  Eigen::MatrixXd xx(x.rows(), 2);
  xx << x, x;
  CHECK(svm_cv_accuracy(labeled(xx, labels, 2), 10, 7) == doctest::Approx(svm_cv_accuracy(labeled(x, labels, 2), 10, 7)).epsilon(0.03));
}

TEST_CASE("SVM errors and fold reduction") {
  const LabeledData d = two_blobs(5.0, 20, 6);
  LabeledData one = d;
  std::fill(one.labels.begin(), one.labels.end(), 0);
  CHECK_THROWS_AS(svm_cv_accuracy(one, 10, 1), ConfigError);
  CHECK_THROWS_AS(svm_cv_accuracy(d.masked(std::vector<bool>(2, false)), 10, 1), ConfigError);

  LabeledData small = labeled(d.features.topRows(12), std::vector<int>(d.labels.begin(), d.labels.begin() + 12), 2);
  const CvResult r = svm_cross_validate(small, 10, 1);
  CHECK(r.folds_reduced);
  CHECK(r.folds == 6);
  CHECK(svm_cross_validate(d, 10, 1).folds_reduced == false);
}

TEST_CASE("stratified folds") {
  std::vector<int> labels(30, 0);
  std::fill(labels.begin() + 20, labels.end(), 1);
  const auto folds = stratified_folds(labels, 2, 5, 3);
  for (int f = 0; f < 5; ++f) {
    int a = 0, b = 0;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (folds[i] == f) (labels[i] ? b : a)++;
    CHECK(a == 4);
    CHECK(b == 2);
  }
  CHECK(stratified_folds(labels, 2, 5, 3) == folds);
}

TEST_CASE("SVM one-vs-one on three classes") {
  Eigen::MatrixXd centers(3, 2);
  centers << 0, 0, 8, 0, 0, 8;
  std::vector<int> labels;
  const Eigen::MatrixXd x = support::blobs(centers, 30, 1.0, 8, &labels);
  const LabeledData d = labeled(x, labels, 3);
  CHECK(train_svm(x, labels, 3, {}, 1).pairs.size() == 3);
  CHECK(svm_cv_accuracy(d, 10, 4) >= 0.97);
}

TEST_CASE("SVM is invariant to row order once rows are canonically sorted") {
  const LabeledData d = two_blobs(2.0, 30, 9);
  auto canonical = [](const LabeledData& in) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(in.row_count()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) {
      for (Eigen::Index c = 0; c < in.features.cols(); ++c)
        if (in.features(a, c) != in.features(b, c)) return in.features(a, c) < in.features(b, c);
      return in.labels[a] < in.labels[b];
    });
    LabeledData out = in;
    out.features = in.features(order, Eigen::all);
    for (std::size_t i = 0; i < order.size(); ++i) out.labels[i] = in.labels[static_cast<std::size_t>(order[i])];
    return out;
  };
  LabeledData shuffled = d;
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(d.row_count()));
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(1);
  std::shuffle(perm.begin(), perm.end(), rng);
  shuffled.features = d.features(perm, Eigen::all);
  for (std::size_t i = 0; i < perm.size(); ++i) shuffled.labels[i] = d.labels[static_cast<std::size_t>(perm[i])];
  CHECK(svm_cv_accuracy(canonical(d), 10, 5) == svm_cv_accuracy(canonical(shuffled), 10, 5));
}

TEST_CASE("k-means") {
  SUBCASE("two clouds are separated, matching the optimal partition") {
    Eigen::MatrixXd centers(2, 2);
    centers << 0, 0, 10, 10;
    std::vector<int> labels;
    const Eigen::MatrixXd x = support::blobs(centers, 6, 0.7, 2, &labels);
    const ClusterResult r = kmeans(x, 2, 1);
    for (std::size_t i = 0; i < labels.size(); ++i)
      CHECK((r.assignments[i] == r.assignments[0]) == (labels[i] == labels[0]));
    CHECK(r.cost == doctest::Approx(best_two_partition_cost(x)).epsilon(1e-12));
  }
  SUBCASE("k equal to the row count") {
    const Eigen::MatrixXd x = support::blobs(Eigen::MatrixXd::Zero(1, 3), 7, 1.0, 4);
    const ClusterResult r = kmeans(x, 7, 2);
    CHECK(r.cost == 0.0);
    std::vector<int> a = r.assignments;
    std::sort(a.begin(), a.end());
    CHECK(std::adjacent_find(a.begin(), a.end()) == a.end());
  }
  SUBCASE("duplicating every row keeps the centroids") {
    Eigen::MatrixXd centers(2, 2);
    centers << 0, 0, 6, 6;
    const Eigen::MatrixXd x = support::blobs(centers, 5, 0.5, 6);
    Eigen::MatrixXd xx(2 * x.rows(), 2);
    for (Eigen::Index i = 0; i < x.rows(); ++i) xx.row(2 * i) = xx.row(2 * i + 1) = x.row(i);
    auto sorted = [](Eigen::MatrixXd c) {
      if (c(0, 0) > c(1, 0)) c.row(0).swap(c.row(1));
      return c;
    };
    CHECK((sorted(kmeans(x, 2, 3).centroids) - sorted(kmeans(xx, 2, 3).centroids)).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("errors") {
    const Eigen::MatrixXd x = Eigen::MatrixXd::Random(4, 2);
    CHECK_THROWS_AS(kmeans(x, 5, 0), ConfigError);
    CHECK_THROWS_AS(kmeans(x, 1, 0), ConfigError);
  }
  SUBCASE("cost never increases across iterations") {
    for (std::uint64_t s = 0; s < 30; ++s) {
      const Eigen::MatrixXd x = support::blobs(Eigen::MatrixXd::Random(4, 3) * 5.0, 10, 1.5, s);
      const ClusterResult r = kmeans_once(x, 3 + static_cast<int>(s % 3), s);
      for (std::size_t i = 1; i < r.iteration_costs.size(); ++i)
        REQUIRE(r.iteration_costs[i] <= r.iteration_costs[i - 1] + 1e-9);
    }
  }
  SUBCASE("deterministic per seed") {
    const Eigen::MatrixXd x = support::blobs(Eigen::MatrixXd::Random(3, 2) * 4.0, 10, 1.0, 1);
    CHECK(kmeans(x, 3, 5).assignments == kmeans(x, 3, 5).assignments);
  }
}

TEST_CASE("silhouette") {
  SUBCASE("tight far-apart clusters") {
    Eigen::MatrixXd x(4, 1);
    x << 0, 0, 10, 10;
    CHECK(silhouette(x, {0, 0, 1, 1}) == 1.0);
  }
  SUBCASE("identical points") {
    const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(5, 2);
    CHECK(silhouette(x, {0, 1, 0, 1, 1}) == 0.0);
  }
  SUBCASE("hand-placed 1-D points") {
    Eigen::MatrixXd x(6, 1);
    x << 0, 1, 2, 10, 11, 12;
    // a(0) = 1.5, b(0) = 11; a(1) = 1, b(1) = 10; point 2 mirrors point 0 with b = 9.
    const double s0 = (11.0 - 1.5) / 11.0, s1 = (10.0 - 1.0) / 10.0, s2 = (9.0 - 1.5) / 9.0;
    const double expected = (2.0 * (s0 + s1 + s2)) / 6.0;
    CHECK(silhouette(x, {0, 0, 0, 1, 1, 1}) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(silhouette(x, {0, 0, 0, 1, 1, 1}) == doctest::Approx(support::brute_silhouette(support::rows_of(x), {0, 0, 0, 1, 1, 1})).epsilon(1e-14));
  }
  SUBCASE("singletons score zero") {
    Eigen::MatrixXd x(3, 1);
    x << 0, 1, 5;
    const Eigen::VectorXd v = silhouette_values(x, {0, 0, 1});
    CHECK(v(2) == 0.0);
  }
  SUBCASE("one cluster is an error") {
    CHECK_THROWS_AS(silhouette(Eigen::MatrixXd::Ones(3, 1), {0, 0, 0}), ConfigError);
  }
  SUBCASE("random cases against the reference, bounds, relabelling") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 200; ++trial) {
      const int n = 2 + static_cast<int>(rng() % 11);
      const int d = 1 + static_cast<int>(rng() % 3);
      const int k = 2 + static_cast<int>(rng() % static_cast<unsigned>(std::min(n - 1, 4)));
      Eigen::MatrixXd x(n, d);
      std::uniform_real_distribution<double> u(-3.0, 3.0);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) x(i, j) = std::round(u(rng) * 2.0) / 2.0;  // ties on purpose
      std::vector<int> a(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i)] = i < 2 ? i : static_cast<int>(rng() % static_cast<unsigned>(k));
      const Eigen::VectorXd v = silhouette_values(x, a);
      REQUIRE(v.minCoeff() >= -1.0);
      REQUIRE(v.maxCoeff() <= 1.0);
      REQUIRE(std::fabs(v.mean() - support::brute_silhouette(support::rows_of(x), a)) <= 1e-12);
      std::vector<int> relabeled = a;
      for (auto& l : relabeled) l = k - 1 - l;
      REQUIRE(std::fabs(silhouette(x, relabeled) - v.mean()) <= 1e-12);
    }
  }
}

TEST_CASE("evaluator sweep") {
  SUBCASE("two blobs") {
    Eigen::MatrixXd c(2, 2);
    c << 0, 0, 12, 0;
    const SweepResult s = cluster_evaluator_sweep(support::blobs(c, 15, 1.0, 1), 2, 4, 3);
    CHECK(s.entries.size() == 3);
    CHECK(s.best_k == 2);
  }
  SUBCASE("three blobs") {
    Eigen::MatrixXd c(3, 2);
    c << 0, 0, 12, 0, 6, 10;
    const Eigen::MatrixXd x = support::blobs(c, 15, 1.0, 2);
    const SweepResult s = cluster_evaluator_sweep(x, 2, 4, 3);
    CHECK(s.best_k == 3);
    // Same argmax as a reference silhouette over the same assignments.
    double best = -2.0;
    int arg = 0;
    for (int k = 2; k <= 4; ++k) {
      const double v = support::brute_silhouette(support::rows_of(x), kmeans(x, k, 3).assignments);
      if (v > best) {
        best = v;
        arg = k;
      }
    }
    CHECK(arg == 3);
  }
  SUBCASE("single entry") {
    const SweepResult s = cluster_evaluator_sweep(Eigen::MatrixXd::Random(10, 2), 2, 2, 1);
    CHECK(s.entries.size() == 1);
    CHECK(s.best_k == 2);
  }
  SUBCASE("k_max above the row count") {
    CHECK_THROWS_AS(cluster_evaluator_sweep(Eigen::MatrixXd::Random(3, 2), 2, 4, 1), ConfigError);
  }
}

namespace {

FeatureMatrix matrix_of(const Eigen::MatrixXd& x) {
  FeatureMatrix fm;
  fm.values = x;
  for (Eigen::Index c = 0; c < x.cols(); ++c)
    fm.columns.push_back({"f" + std::to_string(c), "E", FeatureKind::activity, std::nullopt});
  for (Eigen::Index r = 0; r < x.rows(); ++r) fm.rows.push_back({"S", r % 2 ? "A" : "B"});
  return fm;
}

}  // namespace

TEST_CASE("PCA") {
  SUBCASE("rank one") {
    Eigen::VectorXd dir(5);
    dir << 1, -2, 0.5, 3, 1;
    Eigen::RowVectorXd offset(5);
    offset << 4, 4, 4, 4, 4;
    Eigen::MatrixXd x(20, 5);
    for (int i = 0; i < 20; ++i) x.row(i) = offset + (i - 7.3) * dir.transpose();
    const PcaResult p = pca(matrix_of(x), 0.95);
    CHECK(p.retained == 1);
    CHECK(p.scores.column_count() == 1);
    CHECK(p.scores.columns[0].kind == FeatureKind::component);
    const Eigen::MatrixXd recon = (p.scores.values * p.components.transpose()).rowwise() + p.mean;
    CHECK((recon - x).cwiseAbs().maxCoeff() < 1e-9);
  }
  SUBCASE("isotropic Gaussian keeps nearly every component") {
    Eigen::MatrixXd x(10000, 10);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
    CHECK(pca(matrix_of(x), 0.95).retained >= 9);
  }
  SUBCASE("full retention preserves the total variance; scores are orthogonal") {
    const Eigen::MatrixXd x = support::blobs(Eigen::MatrixXd::Random(3, 4) * 3.0, 10, 1.0, 4);
    const PcaResult p = pca(matrix_of(x), 1.0);
    const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
    const double original = centered.squaredNorm() / (x.rows() - 1);
    const Eigen::MatrixXd s = p.scores.values;
    CHECK(s.squaredNorm() / (x.rows() - 1) == doctest::Approx(original).epsilon(1e-9));
    const Eigen::MatrixXd gram = s.transpose() * s;
    for (Eigen::Index i = 0; i < gram.rows(); ++i)
      for (Eigen::Index j = 0; j < gram.cols(); ++j)
        if (i != j) CHECK(std::fabs(gram(i, j)) < 1e-6 * gram.diagonal().maxCoeff());
  }
  SUBCASE("zero variance") { CHECK_THROWS_AS(pca(matrix_of(Eigen::MatrixXd::Ones(5, 3)), 0.95), DegenerateError); }
  SUBCASE("rows preserved") {
    const FeatureMatrix fm = matrix_of(Eigen::MatrixXd::Random(6, 3));
    CHECK(pca_reduce(fm, 0.9).rows[3].condition == fm.rows[3].condition);
  }
}

TEST_CASE("classification metrics") {
  const std::vector<std::string> classes = {"A", "B"};
  SUBCASE("perfect") {
    const ClassMetrics m = metrics_from_predictions({0, 1, 1, 0}, {0, 1, 1, 0}, classes);
    CHECK(m.global_accuracy == 1.0);
    CHECK(m.weighted_f1 == 1.0);
    CHECK(m.per_class_accuracy.at("A") == 1.0);
    CHECK(m.per_class_accuracy.at("B") == 1.0);
  }
  SUBCASE("[[9,1],[1,9]]") {
    Eigen::MatrixXi c(2, 2);
    c << 9, 1, 1, 9;
    const ClassMetrics m = metrics_from_confusion(c, classes);
    CHECK(m.global_accuracy == doctest::Approx(0.9));
    CHECK(m.weighted_f1 == doctest::Approx(0.9));
  }
  SUBCASE("everything predicted as one class") {
    const ClassMetrics m = metrics_from_predictions({0, 0, 1, 1}, {0, 0, 0, 0}, classes);
    CHECK(m.global_accuracy == doctest::Approx(0.5));
    CHECK(m.weighted_f1 == doctest::Approx(1.0 / 3.0));
    CHECK(m.per_class_accuracy.at("B") == 0.0);
    CHECK(m.confusion(1, 0) == 2);
  }
  SUBCASE("unbalanced three-class hand example") {
    Eigen::MatrixXi c(3, 3);
    c << 5, 1, 0, 2, 3, 1, 0, 0, 4;
    const ClassMetrics m = metrics_from_confusion(c, {"x", "y", "z"});
    // precision 5/7, 3/4, 4/5; recall 5/6, 1/2, 1
    auto f1 = [](double p, double r) { return 2 * p * r / (p + r); };
    const double expected = (6 * f1(5.0 / 7, 5.0 / 6) + 6 * f1(0.75, 0.5) + 4 * f1(0.8, 1.0)) / 16.0;
    CHECK(m.weighted_f1 == doctest::Approx(expected).epsilon(1e-12));
    CHECK(m.global_accuracy == doctest::Approx(12.0 / 16.0));
    CHECK(m.per_class_accuracy.at("y") == doctest::Approx(0.5));
  }
  SUBCASE("classification_report pools the out-of-fold predictions") {
    const LabeledData d = two_blobs(3.0, 30, 11);
    const ClassMetrics m = classification_report(d, 5, 2);
    const CvResult cv = svm_cross_validate(d, 5, 2);
    CHECK(m.global_accuracy == cv.accuracy);
    CHECK(m.confusion.sum() == 60);
    CHECK(m.confusion.row(0).sum() == 30);
  }
}

TEST_CASE("the full mask equals the unmasked call") {
  const LabeledData d = two_blobs(2.0, 20, 13);
  const LabeledData full = d.masked({true, true});
  CHECK(full.features == d.features);
  CHECK(svm_cv_accuracy(full, 5, 3) == svm_cv_accuracy(d, 5, 3));
  CHECK(kmeans(full.features, 2, 3).cost == kmeans(d.features, 2, 3).cost);
}
