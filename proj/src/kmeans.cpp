#include "eegfs/learners.hpp"

#include <random>

namespace eegfs {

namespace {

double total_cost(const Eigen::MatrixXd& data, const Eigen::MatrixXd& centroids, const std::vector<int>& assign) {
  double cost = 0.0;
  for (Eigen::Index i = 0; i < data.rows(); ++i)
    cost += cityblock(data.row(i), centroids.row(assign[static_cast<std::size_t>(i)]));
  return cost;
}

double median(std::vector<double>& v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// Distance-proportional seeding under L1.
Eigen::MatrixXd seed_centroids(const Eigen::MatrixXd& data, int k, std::mt19937_64& rng) {
  const Eigen::Index n = data.rows();
  Eigen::MatrixXd centroids(k, data.cols());
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  centroids.row(0) = data.row(pick(rng));
  Eigen::VectorXd nearest(n);
  for (Eigen::Index i = 0; i < n; ++i) nearest(i) = cityblock(data.row(i), centroids.row(0));
  for (int c = 1; c < k; ++c) {
    const double total = nearest.sum();
    Eigen::Index chosen = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double r = u(rng);
      chosen = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (nearest(i) <= 0.0) continue;
        r -= nearest(i);
        if (r < 0.0) {
          chosen = i;
          break;
        }
      }
      while (nearest(chosen) <= 0.0) --chosen;
    } else {
      chosen = pick(rng);
    }
    centroids.row(c) = data.row(chosen);
    for (Eigen::Index i = 0; i < n; ++i)
      nearest(i) = std::min(nearest(i), cityblock(data.row(i), centroids.row(c)));
  }
  return centroids;
}

}  // namespace

ClusterResult kmeans_once(const Eigen::MatrixXd& data, int k, std::uint64_t seed, int max_iterations) {
  const Eigen::Index n = data.rows();
  if (k < 2) throw ConfigError("kmeans: k must be >= 2");
  if (k > n) throw ConfigError("kmeans: k = " + std::to_string(k) + " exceeds the row count " + std::to_string(n));
  if (data.cols() == 0) throw ConfigError("kmeans: no feature columns");

  std::mt19937_64 rng(seed);
  ClusterResult r;
  r.centroids = seed_centroids(data, k, rng);
  r.assignments.assign(static_cast<std::size_t>(n), -1);
  std::vector<double> column(static_cast<std::size_t>(n));

  for (r.iterations = 1; r.iterations <= max_iterations; ++r.iterations) {
    bool changed = false;
    std::vector<int> sizes(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = cityblock(data.row(i), r.centroids.row(0));
      for (int c = 1; c < k; ++c) {
        const double d = cityblock(data.row(i), r.centroids.row(c));
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      auto& a = r.assignments[static_cast<std::size_t>(i)];
      changed |= a != best;
      a = best;
      ++sizes[static_cast<std::size_t>(best)];
    }

    for (int c = 0; c < k; ++c) {
      if (sizes[static_cast<std::size_t>(c)] > 0) continue;
      // Reseed an empty cluster with the point lying farthest from its centroid.
      Eigen::Index far = -1;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const int a = r.assignments[static_cast<std::size_t>(i)];
        if (sizes[static_cast<std::size_t>(a)] < 2) continue;
        const double d = cityblock(data.row(i), r.centroids.row(a));
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far < 0) break;
      --sizes[static_cast<std::size_t>(r.assignments[static_cast<std::size_t>(far)])];
      r.assignments[static_cast<std::size_t>(far)] = c;
      sizes[static_cast<std::size_t>(c)] = 1;
      r.centroids.row(c) = data.row(far);
      changed = true;
    }

    if (!changed) {
      --r.iterations;
      break;
    }

    for (int c = 0; c < k; ++c) {
      if (sizes[static_cast<std::size_t>(c)] == 0) continue;
      for (Eigen::Index d = 0; d < data.cols(); ++d) {
        column.clear();
        for (Eigen::Index i = 0; i < n; ++i)
          if (r.assignments[static_cast<std::size_t>(i)] == c) column.push_back(data(i, d));
        r.centroids(c, d) = median(column);
      }
    }
    r.iteration_costs.push_back(total_cost(data, r.centroids, r.assignments));
  }
  r.iterations = std::min(r.iterations, max_iterations);
  r.cost = total_cost(data, r.centroids, r.assignments);
  return r;
}

ClusterResult kmeans(const Eigen::MatrixXd& data, int k, std::uint64_t seed, const KMeansOptions& opt) {
  if (opt.restarts < 1) throw ConfigError("kmeans: restarts must be >= 1");
  ClusterResult best;
  for (int r = 0; r < opt.restarts; ++r) {
    ClusterResult run = kmeans_once(data, k, seed + static_cast<std::uint64_t>(r), opt.max_iterations);
    if (r == 0 || run.cost < best.cost) best = std::move(run);
  }
  best.avg_silhouette = silhouette(data, best.assignments);
  return best;
}

SweepResult cluster_evaluator_sweep(const Eigen::MatrixXd& data, int k_min, int k_max, std::uint64_t seed,
                                    const KMeansOptions& opt) {
  if (k_min < 2 || k_min > k_max) throw ConfigError("sweep: need 2 <= k_min <= k_max");
  if (k_max > data.rows()) throw ConfigError("sweep: k_max exceeds the row count");
  SweepResult out;
  double best = -std::numeric_limits<double>::infinity();
  for (int k = k_min; k <= k_max; ++k) {
    const double s = kmeans(data, k, seed, opt).avg_silhouette;
    out.entries.emplace_back(k, s);
    if (s > best) {
      best = s;
      out.best_k = k;
    }
  }
  return out;
}

}  // namespace eegfs
