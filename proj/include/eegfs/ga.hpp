#pragma once

#include "eegfs/learners.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace eegfs {

enum class LearnerMode { supervised, unsupervised };
enum class FitnessFamily { poff, vmff, nff };
enum class CrossoverKind { midpoint, uniform };
enum class StopReason { max_generations, time_budget, stagnation, saturation };

std::string to_string(LearnerMode m);
std::string to_string(FitnessFamily f);
std::string to_string(CrossoverKind c);
std::string to_string(StopReason r);
LearnerMode learner_mode_from_string(const std::string& s);
FitnessFamily fitness_family_from_string(const std::string& s);
CrossoverKind crossover_kind_from_string(const std::string& s);
StopReason stop_reason_from_string(const std::string& s);

using Rng = std::mt19937_64;

/// Binary feature mask; gene j selects column j.
struct Chromosome {
  std::vector<bool> genes;

  Chromosome() = default;
  explicit Chromosome(std::vector<bool> g) : genes(std::move(g)) {}
  /// From a '0'/'1' string.
  static Chromosome parse(const std::string& bits);

  std::size_t size() const { return genes.size(); }
  std::size_t popcount() const;
  bool empty_mask() const { return popcount() == 0; }
  std::string to_string() const;

  friend bool operator==(const Chromosome&, const Chromosome&) = default;
};

using Population = std::vector<Chromosome>;

struct GaConfig {
  int population_size = 8;
  int mating_pool = 4;
  int mutations = 3;
  double lambda = 0.88;
  int max_generations = 200;
  double max_minutes = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
  LearnerMode mode = LearnerMode::supervised;
  FitnessFamily fitness_family = FitnessFamily::poff;
  int k = 2;
  int folds = 10;
  CrossoverKind crossover = CrossoverKind::midpoint;

  /// Throws ConfigError listing the first broken invariant.
  void validate(std::size_t n_if) const;
};

/// POFF: perf. VMFF: lambda (1 - perf) + (1 - lambda)(1 - n_sf / n_if).
/// NFF: perf (1 - n_sf / n_if).
double combine_fitness(FitnessFamily family, double performance, std::size_t selected, std::size_t total,
                       double lambda);

struct EvalContext {
  int generation = 0;  // 1-based
  int index = 0;       // chromosome index within the population
  int max_generations = 0;
  std::uint64_t seed = 0;  // model seed for this evaluation
};

/// Performance of the wrapped learner on the columns selected by a chromosome.
using PerformanceFn = std::function<double(const Chromosome&, const EvalContext&)>;

/// Cross-validated SVM accuracy (supervised) or k-means average silhouette.
PerformanceFn wrapper_performance(const LabeledData& data, const GaConfig& cfg);

/// Fitness of one chromosome on `data` under `cfg` with the given model seed.
double fitness(const Chromosome& c, const LabeledData& data, const GaConfig& cfg, std::uint64_t model_seed);

// Operators. All randomness comes from the caller's stream.

Population init_population(const GaConfig& cfg, std::size_t n_if, Rng& rng);

/// Indices of the `mating_pool` fittest chromosomes, best first. Ties favour
/// the lower index, then the lower popcount.
std::vector<std::size_t> select_parents(const Population& pop, const std::vector<double>& fitnesses, int mating_pool);

/// Pairs parents[0]/parents[1], parents[2]/parents[3], ... Each pair yields two
/// children: the first ceil(N/2) genes of one parent followed by the rest of
/// the other, and the mirror.
Population crossover(const Population& parents, CrossoverKind kind, Rng& rng);

/// Flips `n_m` distinct genes; an all-zero result gets one random gene set.
void mutate(Chromosome& c, int n_m, Rng& rng);

struct TraceStatistics {
  double mean = 0.0;
  double std = 0.0;  // n - 1 denominator, 0 for a single entry
  double max = 0.0;
  double final_value = 0.0;  // max of the entries within [mean - std, mean + std]
  std::size_t final_index = 0;
};

TraceStatistics trace_statistics(const std::vector<double>& trace);

struct RunReport {
  std::vector<double> trace;                  // best fitness of each generation
  std::vector<Chromosome> trace_chromosomes;  // the chromosome behind each entry
  Chromosome global_best;
  double global_best_fitness = 0.0;
  TraceStatistics stats;
  Chromosome final_chromosome;
  StopReason stop_reason = StopReason::max_generations;
  double elapsed_minutes = 0.0;
  int generations_run = 0;
  std::vector<int> max_generation_history;  // every value max_generations took
};

struct GenerationView {
  int generation;
  const Population& population;
  const std::vector<double>& fitnesses;
  double global_best;
  int max_generations;
};

struct RunOptions {
  /// Minutes since an arbitrary origin; defaults to the steady clock.
  std::function<double()> clock_minutes;
  std::function<void(const GenerationView&)> observer;
};

RunReport run(const PerformanceFn& performance, std::size_t n_if, const GaConfig& cfg, const RunOptions& opt = {});
RunReport run(const LabeledData& data, const GaConfig& cfg, const RunOptions& opt = {});

}  // namespace eegfs
