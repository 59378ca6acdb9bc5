#include "eegfs/ga.hpp"

#include "eegfs/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace eegfs {

std::string to_string(LearnerMode m) { return m == LearnerMode::supervised ? "supervised" : "unsupervised"; }

std::string to_string(FitnessFamily f) {
  switch (f) {
    case FitnessFamily::poff: return "POFF";
    case FitnessFamily::vmff: return "VMFF";
    case FitnessFamily::nff: return "NFF";
  }
  return "?";
}

std::string to_string(CrossoverKind c) { return c == CrossoverKind::midpoint ? "midpoint" : "uniform"; }

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::max_generations: return "max_generations";
    case StopReason::time_budget: return "time_budget";
    case StopReason::stagnation: return "stagnation";
    case StopReason::saturation: return "saturation";
  }
  return "?";
}

LearnerMode learner_mode_from_string(const std::string& s) {
  if (s == "supervised") return LearnerMode::supervised;
  if (s == "unsupervised") return LearnerMode::unsupervised;
  throw ConfigError("unknown mode '" + s + "' (expected supervised or unsupervised)");
}

FitnessFamily fitness_family_from_string(const std::string& s) {
  if (s == "POFF") return FitnessFamily::poff;
  if (s == "VMFF") return FitnessFamily::vmff;
  if (s == "NFF") return FitnessFamily::nff;
  throw ConfigError("unknown fitness family '" + s + "' (expected POFF, VMFF or NFF)");
}

CrossoverKind crossover_kind_from_string(const std::string& s) {
  if (s == "midpoint") return CrossoverKind::midpoint;
  if (s == "uniform") return CrossoverKind::uniform;
  throw ConfigError("unknown crossover '" + s + "' (expected midpoint or uniform)");
}

StopReason stop_reason_from_string(const std::string& s) {
  for (auto r : {StopReason::max_generations, StopReason::time_budget, StopReason::stagnation, StopReason::saturation})
    if (to_string(r) == s) return r;
  throw ParseError("unknown stop reason '" + s + "'");
}

Chromosome Chromosome::parse(const std::string& bits) {
  Chromosome c;
  c.genes.reserve(bits.size());
  for (char b : bits) {
    if (b != '0' && b != '1') throw ParseError("chromosome: expected only '0' and '1'");
    c.genes.push_back(b == '1');
  }
  return c;
}

std::size_t Chromosome::popcount() const { return static_cast<std::size_t>(std::count(genes.begin(), genes.end(), true)); }

std::string Chromosome::to_string() const {
  std::string s(genes.size(), '0');
  for (std::size_t i = 0; i < genes.size(); ++i)
    if (genes[i]) s[i] = '1';
  return s;
}

void GaConfig::validate(std::size_t n_if) const {
  if (n_if < 1) throw ConfigError("ga: the feature matrix has no columns");
  if (mating_pool < 2 || mating_pool % 2 != 0) throw ConfigError("ga.mating_pool: must be even and >= 2");
  if (mating_pool > population_size) throw ConfigError("ga.mating_pool: must not exceed population_size");
  if (population_size != 2 * mating_pool)
    throw ConfigError("ga.population_size: must equal mating_pool + offspring (2 * mating_pool)");
  if (mutations < 0 || static_cast<std::size_t>(mutations) > n_if)
    throw ConfigError("ga.mutations: must lie in [0, " + std::to_string(n_if) + "]");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("ga.lambda: must lie in [0, 1]");
  if (max_generations < 1) throw ConfigError("ga.max_generations: must be >= 1");
  if (!(max_minutes > 0.0)) throw ConfigError("ga.max_minutes: must be > 0");
  if (mode == LearnerMode::unsupervised && k < 2) throw ConfigError("ga.k: must be >= 2");
  if (mode == LearnerMode::supervised && folds < 2) throw ConfigError("ga.folds: must be >= 2");
}

double combine_fitness(FitnessFamily family, double performance, std::size_t selected, std::size_t total,
                       double lambda) {
  if (selected == 0) throw ConfigError("fitness: empty feature mask");
  if (total == 0 || selected > total) throw ConfigError("fitness: selected count exceeds feature count");
  const double kept = 1.0 - static_cast<double>(selected) / static_cast<double>(total);
  switch (family) {
    case FitnessFamily::poff: return performance;
    case FitnessFamily::vmff: return lambda * (1.0 - performance) + (1.0 - lambda) * kept;
    case FitnessFamily::nff: return performance * kept;
  }
  return performance;
}

PerformanceFn wrapper_performance(const LabeledData& data, const GaConfig& cfg) {
  if (cfg.mode == LearnerMode::supervised) {
    data.validate(true);
    return [&data, folds = cfg.folds](const Chromosome& c, const EvalContext& ctx) {
      return svm_cv_accuracy(data.masked(c.genes), folds, ctx.seed);
    };
  }
  data.validate(false);
  if (cfg.k > data.row_count()) throw ConfigError("ga.k: exceeds the row count");
  return [&data, k = cfg.k](const Chromosome& c, const EvalContext& ctx) {
    return kmeans(data.masked(c.genes).features, k, ctx.seed).avg_silhouette;
  };
}

double fitness(const Chromosome& c, const LabeledData& data, const GaConfig& cfg, std::uint64_t model_seed) {
  if (c.empty_mask()) throw ConfigError("fitness: empty feature mask");
  const auto perf = wrapper_performance(data, cfg);
  EvalContext ctx;
  ctx.seed = model_seed;
  return combine_fitness(cfg.fitness_family, perf(c, ctx), c.popcount(), c.size(), cfg.lambda);
}

Population init_population(const GaConfig& cfg, std::size_t n_if, Rng& rng) {
  std::bernoulli_distribution coin(0.5);
  Population pop(static_cast<std::size_t>(cfg.population_size));
  for (auto& c : pop) {
    c.genes.assign(n_if, false);
    do {
      for (std::size_t j = 0; j < n_if; ++j) c.genes[j] = coin(rng);
    } while (c.empty_mask());
  }
  return pop;
}

std::vector<std::size_t> select_parents(const Population& pop, const std::vector<double>& fitnesses, int mating_pool) {
  if (fitnesses.size() != pop.size()) throw ConfigError("select_parents: one fitness per chromosome required");
  if (mating_pool < 0 || static_cast<std::size_t>(mating_pool) > pop.size())
    throw ConfigError("select_parents: mating pool larger than the population");
  std::vector<std::size_t> order(pop.size());
  std::iota(order.begin(), order.end(), 0);
  // Index order already resolves every tie, so popcount never decides.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (fitnesses[a] != fitnesses[b]) return fitnesses[a] > fitnesses[b];
    if (a != b) return a < b;
    return pop[a].popcount() < pop[b].popcount();
  });
  order.resize(static_cast<std::size_t>(mating_pool));
  return order;
}

Population crossover(const Population& parents, CrossoverKind kind, Rng& rng) {
  if (parents.size() % 2 != 0) throw ConfigError("crossover: need an even number of parents");
  Population out;
  std::bernoulli_distribution coin(0.5);
  for (std::size_t p = 0; p + 1 < parents.size(); p += 2) {
    const auto& x = parents[p].genes;
    const auto& y = parents[p + 1].genes;
    if (x.size() != y.size()) throw ConfigError("crossover: parents differ in length");
    const std::size_t n = x.size();
    Chromosome a, b;
    a.genes.resize(n);
    b.genes.resize(n);
    const std::size_t split = (n + 1) / 2;
    for (std::size_t j = 0; j < n; ++j) {
      const bool from_x = kind == CrossoverKind::midpoint ? j < split : coin(rng);
      a.genes[j] = from_x ? x[j] : y[j];
      b.genes[j] = from_x ? y[j] : x[j];
    }
    out.push_back(std::move(a));
    out.push_back(std::move(b));
  }
  return out;
}

void mutate(Chromosome& c, int n_m, Rng& rng) {
  const std::size_t n = c.size();
  if (n_m < 0 || static_cast<std::size_t>(n_m) > n) throw ConfigError("mutate: n_m must lie in [0, N]");
  std::vector<std::size_t> positions(n);
  std::iota(positions.begin(), positions.end(), 0);
  for (std::size_t i = 0; i < static_cast<std::size_t>(n_m); ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(positions[i], positions[pick(rng)]);
    c.genes[positions[i]] = !c.genes[positions[i]];
  }
  if (n > 0 && c.empty_mask()) {
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    c.genes[pick(rng)] = true;
  }
}

TraceStatistics trace_statistics(const std::vector<double>& trace) {
  if (trace.empty()) throw InputError("trace statistics: empty trace");
  TraceStatistics s;
  const double n = static_cast<double>(trace.size());
  s.mean = std::accumulate(trace.begin(), trace.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : trace) ss += (v - s.mean) * (v - s.mean);
  s.std = trace.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  s.max = *std::max_element(trace.begin(), trace.end());
  const double slack = 1e-12 * std::max(1.0, std::abs(s.mean));
  const double lo = s.mean - s.std - slack;
  const double hi = s.mean + s.std + slack;
  bool found = false;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace[i] < lo || trace[i] > hi) continue;
    if (!found || trace[i] > s.final_value) {
      s.final_value = trace[i];
      s.final_index = i;
      found = true;
    }
  }
  return s;
}

namespace {

double minutes_since_epoch() {
  using namespace std::chrono;
  return duration<double, std::ratio<60>>(steady_clock::now().time_since_epoch()).count();
}

int ceil_fraction(double fraction, int value) {
  return static_cast<int>(std::ceil(fraction * static_cast<double>(value) - 1e-9));
}

}  // namespace

RunReport run(const PerformanceFn& performance, std::size_t n_if, const GaConfig& cfg, const RunOptions& opt) {
  cfg.validate(n_if);
  const auto clock = opt.clock_minutes ? opt.clock_minutes : minutes_since_epoch;
  const double start = clock();
  Rng rng(derive_seed({cfg.seed, 0x6761ULL}));

  RunReport report;
  int max_generations = cfg.max_generations;
  report.max_generation_history.push_back(max_generations);
  double global_best = -std::numeric_limits<double>::infinity();
  int last_improvement = 0;
  bool check_recorded = false;
  double fitness_check = 0.0;

  Population pop = init_population(cfg, n_if, rng);
  std::vector<double> fit(pop.size());
  for (int generation = 1;; ++generation) {
    std::unordered_map<std::string, double> memo;
    for (std::size_t i = 0; i < pop.size(); ++i) {
      const Chromosome& c = pop[i];
      if (c.empty_mask()) throw RuntimeAbort("ga: all-zero chromosome reached evaluation");
      const std::string key = c.to_string();
      if (auto it = memo.find(key); it != memo.end()) {
        fit[i] = it->second;
        continue;
      }
      EvalContext ctx{generation, static_cast<int>(i), max_generations,
                      derive_seed({cfg.seed, static_cast<std::uint64_t>(generation), static_cast<std::uint64_t>(i)})};
      const double perf = with_context("generation " + std::to_string(generation) + ", chromosome " + std::to_string(i),
                                       [&] { return performance(c, ctx); });
      fit[i] = combine_fitness(cfg.fitness_family, perf, c.popcount(), n_if, cfg.lambda);
      memo.emplace(key, fit[i]);
    }

    const auto best = static_cast<std::size_t>(std::max_element(fit.begin(), fit.end()) - fit.begin());
    report.trace.push_back(fit[best]);
    report.trace_chromosomes.push_back(pop[best]);
    if (fit[best] > global_best) {
      global_best = fit[best];
      report.global_best = pop[best];
      last_improvement = generation;
    }
    if (opt.observer) opt.observer(GenerationView{generation, pop, fit, global_best, max_generations});

    if (!check_recorded) {
      if (generation >= ceil_fraction(0.5, max_generations)) {
        fitness_check = global_best;
        check_recorded = true;
      }
    } else if (global_best > fitness_check + 0.02) {
      max_generations = ceil_fraction(1.5, max_generations);
      report.max_generation_history.push_back(max_generations);
      check_recorded = false;
    }

    const double elapsed = clock() - start;
    bool stop = true;
    if (max_generations > 1000 && global_best >= 1.0) {
      report.stop_reason = StopReason::saturation;
    } else if (generation >= max_generations) {
      report.stop_reason = StopReason::max_generations;
    } else if (generation - last_improvement >= ceil_fraction(0.8, max_generations)) {
      report.stop_reason = StopReason::stagnation;
    } else if (elapsed > cfg.max_minutes) {
      report.stop_reason = StopReason::time_budget;
    } else {
      stop = false;
    }
    if (stop) {
      report.generations_run = generation;
      report.elapsed_minutes = elapsed;
      break;
    }

    const auto parent_idx = select_parents(pop, fit, cfg.mating_pool);
    Population next;
    for (auto i : parent_idx) next.push_back(pop[i]);
    Population children = crossover(next, cfg.crossover, rng);
    for (auto& child : children) {
      mutate(child, cfg.mutations, rng);
      next.push_back(std::move(child));
    }
    pop = std::move(next);
  }

  report.global_best_fitness = global_best;
  report.stats = trace_statistics(report.trace);
  report.final_chromosome = report.trace_chromosomes[report.stats.final_index];
  return report;
}

RunReport run(const LabeledData& data, const GaConfig& cfg, const RunOptions& opt) {
  const auto n_if = static_cast<std::size_t>(data.column_count());
  if (data.column_count() == 0) throw ConfigError("ga: the feature matrix has no columns");
  return run(wrapper_performance(data, cfg), n_if, cfg, opt);
}

}  // namespace eegfs
