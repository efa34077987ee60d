#pragma once

// Parent selection for the three regimes:
//   PIMP        chooser by tournament, courter = candidate closest to the
//               chooser's preference among a random candidate set
//   RandomMate  chooser by tournament, courter uniformly at random
//   Standard    both parents by independent tournaments
//
// Sampling is without replacement and ties go to the earliest sampled index.

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pimp/benchmarks.hpp"
#include "pimp/individual.hpp"
#include "pimp/primitives.hpp"
#include "pimp/random.hpp"

namespace pimp {

enum class Approach { pimp, random_mate, standard };

inline constexpr std::string_view name(Approach a) noexcept {
    switch (a) {
        case Approach::pimp: return "pimp";
        case Approach::random_mate: return "random";
        default: return "standard";
    }
}

inline constexpr std::string_view display_name(Approach a) noexcept {
    switch (a) {
        case Approach::pimp: return "PIMP";
        case Approach::random_mate: return "RandomMate";
        default: return "Standard";
    }
}

inline Approach approach_from_name(std::string_view text) {
    for (Approach a : {Approach::pimp, Approach::random_mate, Approach::standard})
        if (name(a) == text || display_name(a) == text) return a;
    throw ConfigError("unknown approach '" + std::string(text) + "'");
}

struct SelectionConfig {
    Approach approach = Approach::pimp;
    std::size_t tournament_size = 5;
    std::size_t candidate_set_size = 5;

    void validate(std::size_t population_size) const {
        if (tournament_size < 1 || tournament_size > population_size)
            throw ConfigError("tournament size must lie in [1, population size]");
        if (approach == Approach::standard) return;
        if (population_size < 2) throw ConfigError("mate choice needs at least two individuals");
        if (approach == Approach::pimp &&
            (candidate_set_size < 1 || candidate_set_size > population_size - 1))
            throw ConfigError("candidate set size must lie in [1, population size - 1]");
    }
};

struct CoupleRecord {
    int generation = 0;
    std::size_t chooser = 0;
    std::size_t courter = 0;

    friend bool operator==(const CoupleRecord&, const CoupleRecord&) = default;
};

inline constexpr std::size_t kNoIndex = static_cast<std::size_t>(-1);

/// k distinct indices from [0, n) minus `exclude`, in draw order.
inline std::vector<std::size_t> sample_distinct(std::size_t n, std::size_t k, Rng& rng,
                                                std::size_t exclude = kNoIndex) {
    const std::size_t available = n - (exclude < n ? 1 : 0);
    if (k > available) throw ConfigError("cannot sample more distinct indices than available");
    std::vector<std::size_t> picked;
    picked.reserve(k);
    std::vector<bool> taken(n, false);
    if (exclude < n) taken[exclude] = true;
    while (picked.size() < k) {
        const auto i = static_cast<std::size_t>(uniform_index(rng, n));
        if (taken[i]) continue;
        taken[i] = true;
        picked.push_back(i);
    }
    return picked;
}

/// Index of the lowest-MSE individual among k sampled without replacement.
inline std::size_t tournament(std::span<const double> fitness, std::size_t k, Rng& rng) {
    const auto sampled = sample_distinct(fitness.size(), k, rng);
    std::size_t best = sampled.front();
    for (std::size_t i : sampled)
        if (fitness[i] < fitness[best]) best = i;
    return best;
}

inline std::vector<double> fitness_values(const Population& pop) {
    std::vector<double> f;
    f.reserve(pop.size());
    for (const auto& ind : pop) {
        if (!ind.fitness) throw ConfigError("selection requires an evaluated population");
        f.push_back(*ind.fitness);
    }
    return f;
}

inline std::size_t tournament(const Population& pop, std::size_t k, Rng& rng) {
    return tournament(fitness_values(pop), k, rng);
}

/// MSE between the candidate's solution outputs and the chooser's preference
/// outputs over the case points; the preference plays the part of the target.
inline double preference_distance(const Individual& chooser, const Individual& candidate,
                                  const FitnessCases& cases) {
    if (cases.count() == 0) throw ConfigError("no fitness cases");
    const auto wanted = eval_columns(chooser.preference, cases.columns);
    const auto offered = eval_columns(candidate.solution, cases.columns);
    return mean_squared_error(offered, wanted);
}

/// Courter for an already chosen chooser under a mate-choice regime.
/// `distance(chooser, candidate)` is consulted only by PIMP.
template <class Distance>
std::size_t choose_mate(std::size_t population_size, std::size_t chooser,
                        const SelectionConfig& cfg, Rng& rng, Distance&& distance) {
    if (cfg.approach == Approach::random_mate) {
        auto j = static_cast<std::size_t>(uniform_index(rng, population_size - 1));
        return j >= chooser ? j + 1 : j;
    }
    const auto candidates = sample_distinct(population_size, cfg.candidate_set_size, rng, chooser);
    std::size_t best = candidates.front();
    double best_distance = distance(chooser, best);
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        const double d = distance(chooser, candidates[i]);
        if (d < best_distance) {
            best = candidates[i];
            best_distance = d;
        }
    }
    return best;
}

/// (chooser, courter) for one couple.
template <class Distance>
std::pair<std::size_t, std::size_t> select_couple(std::span<const double> fitness,
                                                  const SelectionConfig& cfg, Rng& rng,
                                                  Distance&& distance) {
    const std::size_t chooser = tournament(fitness, cfg.tournament_size, rng);
    if (cfg.approach == Approach::standard)
        return {chooser, tournament(fitness, cfg.tournament_size, rng)};
    return {chooser, choose_mate(fitness.size(), chooser, cfg, rng, distance)};
}

inline std::pair<std::size_t, std::size_t> select_couple(const Population& pop,
                                                         const SelectionConfig& cfg,
                                                         const FitnessCases& cases, Rng& rng) {
    const auto fitness = fitness_values(pop);
    return select_couple(fitness, cfg, rng, [&](std::size_t c, std::size_t j) {
        return preference_distance(pop[c], pop[j], cases);
    });
}

}  // namespace pimp
