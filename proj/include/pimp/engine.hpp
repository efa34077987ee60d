#pragma once

// Generational GP loop and the metrics recorded along the way.
//
// Each generation forms couples_per_generation() couples in index order; couple
// c fills offspring slots 2c (chooser-based) and 2c+1 (courter-based), or slot
// c alone with one offspring per couple. There is no elitism.
//
// Every random draw comes from a named substream of the run seed:
//   "fitness-cases", "init-solutions", "init-preferences", and
//   "breed"(generation, couple) for each couple.
// The log is therefore a pure function of RunConfig.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "pimp/benchmarks.hpp"
#include "pimp/individual.hpp"
#include "pimp/primitives.hpp"
#include "pimp/random.hpp"
#include "pimp/selection.hpp"
#include "pimp/variation.hpp"

namespace pimp {

/// Success threshold on MSE (strict).
inline constexpr double kSuccessThreshold = 1e-4;

struct RunConfig {
    Approach approach = Approach::pimp;
    Problem problem = Problem::koza1;
    double mutation_prob = 0.05;
    double crossover_prob = 0.9;
    std::size_t population_size = 100;
    int generations = 1500;
    std::size_t tournament_size = 5;
    std::size_t candidate_set_size = 5;
    int max_depth = 17;
    int init_depth_low = 2;
    int init_depth_high = 6;
    std::uint64_t run_seed = 0;
    int metrics_interval = 100;
    CrossoverMode crossover = CrossoverMode::subtree;
    int offspring_per_couple = 2;

    std::size_t couples_per_generation() const noexcept {
        const auto k = static_cast<std::size_t>(offspring_per_couple);
        return (population_size + k - 1) / k;
    }

    VariationConfig variation() const {
        VariationConfig v;
        v.crossover_prob = crossover_prob;
        v.mutation_prob = mutation_prob;
        v.max_depth = max_depth;
        v.mutation_depth_low = init_depth_low;
        v.mutation_depth_high = init_depth_high;
        v.input_arity = input_arity(problem);
        v.crossover = crossover;
        return v;
    }

    SelectionConfig selection() const { return {approach, tournament_size, candidate_set_size}; }

    void validate() const {
        if (population_size < 1) throw ConfigError("population size must be positive");
        if (generations < 0) throw ConfigError("generations must be non-negative");
        if (metrics_interval < 1) throw ConfigError("metrics interval must be positive");
        if (offspring_per_couple != 1 && offspring_per_couple != 2)
            throw ConfigError("offspring per couple must be 1 or 2");
        if (init_depth_low < 1 || init_depth_low > init_depth_high)
            throw ConfigError("initial depth range is empty");
        if (init_depth_high > max_depth) throw ConfigError("initial depth exceeds max depth");
        variation().validate();
        selection().validate(population_size);
    }

    /// Names of the fields that differ from the published defaults (approach,
    /// problem, mutation rate and seed are per-run choices, not overrides).
    std::vector<std::string> overrides() const {
        const RunConfig d;
        std::vector<std::string> out;
        if (crossover_prob != d.crossover_prob) out.emplace_back("crossover_prob");
        if (population_size != d.population_size) out.emplace_back("population_size");
        if (generations != d.generations) out.emplace_back("generations");
        if (tournament_size != d.tournament_size) out.emplace_back("tournament_size");
        if (candidate_set_size != d.candidate_set_size) out.emplace_back("candidate_set_size");
        if (max_depth != d.max_depth) out.emplace_back("max_depth");
        if (init_depth_low != d.init_depth_low || init_depth_high != d.init_depth_high)
            out.emplace_back("init_depth_range");
        if (metrics_interval != d.metrics_interval) out.emplace_back("metrics_interval");
        if (crossover != d.crossover) out.emplace_back("crossover");
        if (offspring_per_couple != d.offspring_per_couple) out.emplace_back("offspring_per_couple");
        return out;
    }
};

using RootCensus = std::array<std::size_t, kSymbolCount>;

struct RoleTally {
    int generation = 0;
    std::size_t choosers_only = 0;
    std::size_t courters_only = 0;
    std::size_t both = 0;
    // Best (minimum) and mean MSE within each role group; empty groups have none.
    std::optional<double> best_choosers, best_courters, best_both;
    std::optional<double> mean_choosers, mean_courters, mean_both;

    std::size_t selected() const noexcept { return choosers_only + courters_only + both; }
};

struct GenerationRecord {
    int generation = 0;
    double best_fitness = 0.0;
    RootCensus roots{};
    std::optional<std::size_t> unique;  // set on metrics-interval generations and the last one
};

struct MetricsLog {
    RunConfig config;
    std::vector<GenerationRecord> generations;
    std::vector<RoleTally> roles;  // one per breeding step, keyed by the parent generation
    Population initial;
    Population final_population;
    double best_ever = 0.0;
    int best_ever_generation = 0;
    ExprTree best_ever_tree;
    std::size_t root_violations = 0;
};

inline std::size_t unique_solutions(const Population& pop) {
    std::unordered_set<std::string> seen;
    seen.reserve(pop.size() * 2);
    for (const auto& ind : pop) seen.insert(serialize(ind.solution));
    return seen.size();
}

inline bool root_converged(const Population& pop) {
    if (pop.empty()) throw ConfigError("root convergence of an empty population");
    const Symbol r = pop.front().solution.root();
    return std::all_of(pop.begin(), pop.end(),
                       [r](const Individual& ind) { return ind.solution.root() == r; });
}

inline RootCensus root_census(const Population& pop) {
    RootCensus c{};
    for (const auto& ind : pop) ++c[static_cast<std::size_t>(ind.solution.root())];
    return c;
}

/// True when every symbol present in `next` is also present in `prev`.
inline bool census_subset(const RootCensus& next, const RootCensus& prev) noexcept {
    for (std::size_t s = 0; s < kSymbolCount; ++s)
        if (next[s] > 0 && prev[s] == 0) return false;
    return true;
}

/// Partitions the distinct individuals selected in one generation into
/// chooser-only, courter-only and both.
inline RoleTally tally_roles(std::span<const CoupleRecord> couples, std::span<const double> fitness,
                             int generation) {
    RoleTally t;
    t.generation = generation;
    constexpr unsigned kChooser = 1, kCourter = 2;
    std::vector<unsigned> role(fitness.size(), 0);
    for (const auto& c : couples) {
        if (c.generation != generation)
            throw ConfigError("couple from generation " + std::to_string(c.generation) +
                              " tallied as generation " + std::to_string(generation));
        if (c.chooser >= fitness.size() || c.courter >= fitness.size())
            throw ConfigError("couple index out of range");
        role[c.chooser] |= kChooser;
        role[c.courter] |= kCourter;
    }
    struct Acc {
        std::size_t n = 0;
        double best = 0.0, sum = 0.0;
        void add(double f) {
            best = n == 0 ? f : std::min(best, f);
            sum += f;
            ++n;
        }
    } ch, co, bo;
    for (std::size_t i = 0; i < role.size(); ++i) {
        if (role[i] == kChooser) ch.add(fitness[i]);
        else if (role[i] == kCourter) co.add(fitness[i]);
        else if (role[i] == (kChooser | kCourter)) bo.add(fitness[i]);
    }
    auto fill = [](const Acc& a, std::size_t& n, std::optional<double>& best,
                   std::optional<double>& mean) {
        n = a.n;
        if (a.n == 0) return;
        best = a.best;
        mean = a.sum / static_cast<double>(a.n);
    };
    fill(ch, t.choosers_only, t.best_choosers, t.mean_choosers);
    fill(co, t.courters_only, t.best_courters, t.mean_courters);
    fill(bo, t.both, t.best_both, t.mean_both);
    return t;
}

inline RoleTally tally_roles(std::span<const CoupleRecord> couples, const Population& pop,
                             int generation) {
    return tally_roles(couples, fitness_values(pop), generation);
}

struct BestOfRun {
    double final_best = 0.0;  // best of the final population (MBF contribution)
    ExprTree final_best_tree;
    double best_ever = 0.0;  // best over all generations (success test)
    ExprTree best_ever_tree;
    int best_ever_generation = 0;
    bool success = false;
};

inline BestOfRun best_of_run(const MetricsLog& log) {
    if (log.final_population.empty()) throw ConfigError("best_of_run on an incomplete log");
    BestOfRun b;
    const auto it = std::min_element(
        log.final_population.begin(), log.final_population.end(),
        [](const Individual& x, const Individual& y) { return *x.fitness < *y.fitness; });
    b.final_best = *it->fitness;
    b.final_best_tree = it->solution;
    b.best_ever = log.best_ever;
    b.best_ever_tree = log.best_ever_tree;
    b.best_ever_generation = log.best_ever_generation;
    b.success = log.best_ever < kSuccessThreshold;
    return b;
}

/// Optional observers; both are called synchronously from run().
struct RunHooks {
    std::function<void(const CoupleRecord&)> on_couple;
    /// Called with each evaluated population, generation 0 first.
    std::function<void(int, const Population&, const FitnessCases&)> on_generation;
};

inline FitnessCases run_cases(const RunConfig& cfg) {
    Rng rng = stream(cfg.run_seed, "fitness-cases");
    return make_cases(cfg.problem, rng);
}

inline Population initial_population(const RunConfig& cfg) {
    Rng sol = stream(cfg.run_seed, "init-solutions");
    Rng pref = stream(cfg.run_seed, "init-preferences");
    return init_population(cfg.population_size, cfg.init_depth_low, cfg.init_depth_high,
                           input_arity(cfg.problem), sol, pref);
}

inline MetricsLog run(const RunConfig& cfg, const RunHooks& hooks = {}) {
    cfg.validate();
    const FitnessCases cases = run_cases(cfg);
    const VariationConfig var = cfg.variation();
    const SelectionConfig sel = cfg.selection();
    const std::size_t n = cfg.population_size;

    MetricsLog log;
    log.config = cfg;

    Population pop = initial_population(cfg);
    // Solution outputs on the fitness cases, one row per member.
    std::vector<std::vector<double>> outputs(n);
    std::vector<double> scratch;
    for (std::size_t i = 0; i < n; ++i) {
        eval_columns(pop[i].solution, cases.columns, outputs[i], scratch);
        pop[i].fitness = mean_squared_error(outputs[i], cases.targets);
    }

    auto record = [&](int g) {
        GenerationRecord r;
        r.generation = g;
        const auto best = std::min_element(pop.begin(), pop.end(), [](const auto& a, const auto& b) {
            return *a.fitness < *b.fitness;
        });
        r.best_fitness = *best->fitness;
        r.roots = root_census(pop);
        if (g % cfg.metrics_interval == 0 || g == cfg.generations) r.unique = unique_solutions(pop);
        if (g == 0 || r.best_fitness < log.best_ever) {
            log.best_ever = r.best_fitness;
            log.best_ever_generation = g;
            log.best_ever_tree = best->solution;
        }
        if (!log.generations.empty() && !census_subset(r.roots, log.generations.back().roots))
            ++log.root_violations;
        log.generations.push_back(r);
        if (hooks.on_generation) hooks.on_generation(g, pop, cases);
    };

    record(0);
    log.initial = pop;

    std::vector<double> fitness(n);
    std::vector<std::vector<double>> preference_outputs(n);
    std::vector<bool> have_preference(n);
    std::vector<CoupleRecord> couples(cfg.couples_per_generation());

    for (int g = 1; g <= cfg.generations; ++g) {
        for (std::size_t i = 0; i < n; ++i) fitness[i] = *pop[i].fitness;
        std::fill(have_preference.begin(), have_preference.end(), false);
        auto distance = [&](std::size_t chooser, std::size_t candidate) {
            if (!have_preference[chooser]) {
                eval_columns(pop[chooser].preference, cases.columns, preference_outputs[chooser],
                             scratch);
                have_preference[chooser] = true;
            }
            return mean_squared_error(outputs[candidate], preference_outputs[chooser]);
        };

        Population next(n);
        std::vector<std::vector<double>> next_outputs(n);
        auto place = [&](std::size_t slot, Individual child, std::size_t base) {
            if (child.solution == pop[base].solution) {
                next_outputs[slot] = outputs[base];
            } else {
                eval_columns(child.solution, cases.columns, next_outputs[slot], scratch);
            }
            child.fitness = mean_squared_error(next_outputs[slot], cases.targets);
            next[slot] = std::move(child);
        };
        const auto brood = static_cast<std::size_t>(cfg.offspring_per_couple);
        for (std::size_t c = 0; c < couples.size(); ++c) {
            Rng rng = stream(cfg.run_seed, "breed", static_cast<std::uint64_t>(g), c);
            const auto [chooser, courter] = select_couple(fitness, sel, rng, distance);
            couples[c] = CoupleRecord{g - 1, chooser, courter};
            if (hooks.on_couple) hooks.on_couple(couples[c]);
            auto [first, second] = crossover_pair(pop[chooser], pop[courter], var, rng);
            first = subtree_mutation(first, var, rng);
            place(c * brood, std::move(first), chooser);
            if (brood == 2 && c * brood + 1 < n) {
                second = subtree_mutation(second, var, rng);
                place(c * brood + 1, std::move(second), courter);
            }
        }
        log.roles.push_back(tally_roles(couples, fitness, g - 1));
        pop = std::move(next);
        outputs = std::move(next_outputs);
        record(g);
    }
    log.final_population = std::move(pop);
    return log;
}

}  // namespace pimp
