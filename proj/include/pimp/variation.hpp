#pragma once

// Crossover and subtree mutation for both chromosomes. The root is never an
// operator point, so every offspring chromosome keeps its base parent's root.
//
// Two crossover modes are available:
//   subtree        independent non-root points in each parent (default)
//   common_region  Poli & Langdon one-point crossover: a shared non-root
//                  point inside the parents' common upper structure

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "pimp/individual.hpp"
#include "pimp/primitives.hpp"
#include "pimp/random.hpp"

namespace pimp {

enum class CrossoverMode { subtree, common_region };

inline constexpr std::string_view name(CrossoverMode m) noexcept {
    return m == CrossoverMode::subtree ? "subtree" : "common-region";
}

inline CrossoverMode crossover_mode_from_name(std::string_view text) {
    if (text == "subtree") return CrossoverMode::subtree;
    if (text == "common-region") return CrossoverMode::common_region;
    throw ConfigError("unknown crossover mode '" + std::string(text) + "'");
}

struct VariationConfig {
    CrossoverMode crossover = CrossoverMode::subtree;
    double crossover_prob = 0.9;
    double mutation_prob = 0.05;
    int max_depth = 17;
    int mutation_depth_low = 2;
    int mutation_depth_high = 6;
    std::size_t input_arity = 1;

    void validate() const {
        if (!(crossover_prob >= 0.0 && crossover_prob <= 1.0))
            throw ConfigError("crossover probability must lie in [0, 1]");
        if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0))
            throw ConfigError("mutation probability must lie in [0, 1]");
        if (max_depth < 1) throw ConfigError("max depth must be at least 1");
        if (mutation_depth_low < 1 || mutation_depth_low > mutation_depth_high)
            throw ConfigError("mutation subtree depth range is empty");
        terminals_for(input_arity);
    }
};

/// Node pairs (address in a, address in b) of the common region, in preorder.
/// The roots always pair up; children of a pair are included iff both nodes
/// have the same arity.
inline std::vector<std::pair<std::size_t, std::size_t>> common_region(const ExprTree& a,
                                                                      const ExprTree& b) {
    std::vector<std::pair<std::size_t, std::size_t>> region;
    std::vector<std::pair<std::size_t, std::size_t>> todo{{0, 0}};
    while (!todo.empty()) {
        const auto [ia, ib] = todo.back();
        todo.pop_back();
        region.emplace_back(ia, ib);
        const int n = arity(a.at(ia));
        if (n == 0 || n != arity(b.at(ib))) continue;
        // Push children right-to-left so they pop in preorder.
        std::vector<std::pair<std::size_t, std::size_t>> kids;
        std::size_t ca = ia + 1, cb = ib + 1;
        for (int c = 0; c < n; ++c) {
            kids.emplace_back(ca, cb);
            ca = a.subtree_end(ca);
            cb = b.subtree_end(cb);
        }
        todo.insert(todo.end(), kids.rbegin(), kids.rend());
    }
    return region;
}

/// Matching operator points (address in a, address in b), neither of them a
/// root, or nothing when no such pair exists.
inline std::optional<std::pair<std::size_t, std::size_t>> crossover_points(const ExprTree& a,
                                                                           const ExprTree& b,
                                                                           CrossoverMode mode,
                                                                           Rng& rng) {
    if (mode == CrossoverMode::common_region) {
        const auto region = common_region(a, b);
        if (region.size() <= 1) return std::nullopt;
        return region[1 + uniform_index(rng, region.size() - 1)];
    }
    if (a.size() <= 1 || b.size() <= 1) return std::nullopt;
    const auto pa = 1 + uniform_index(rng, a.size() - 1);
    const auto pb = 1 + uniform_index(rng, b.size() - 1);
    return std::pair<std::size_t, std::size_t>{pa, pb};
}

/// Exchanges the subtrees at one pair of points. Each child falls back to its
/// own base parent when it would exceed `max_depth`.
inline std::pair<ExprTree, ExprTree> crossover_chromosomes(const ExprTree& a, const ExprTree& b,
                                                           CrossoverMode mode, int max_depth,
                                                           Rng& rng) {
    const auto points = crossover_points(a, b, mode, rng);
    if (!points) return {a, b};
    const auto [pa, pb] = *points;
    ExprTree first = a.replace_subtree(pa, b, pb);
    ExprTree second = b.replace_subtree(pb, a, pa);
    if (first.depth() > max_depth) first = a;
    if (second.depth() > max_depth) second = b;
    return {std::move(first), std::move(second)};
}

/// `tree` with one non-root subtree regrown by the grow method. Single-node
/// trees and depth-cap violations return `tree` unchanged.
inline ExprTree mutate_chromosome(const ExprTree& tree, const VariationConfig& cfg, Rng& rng) {
    if (tree.size() <= 1) return tree;
    const auto point = 1 + uniform_index(rng, tree.size() - 1);
    const int limit = uniform_int(rng, cfg.mutation_depth_low, cfg.mutation_depth_high);
    const ExprTree fresh = random_tree(TreeMethod::grow, limit, terminals_for(cfg.input_arity), rng);
    ExprTree child = tree.replace_subtree(point, fresh);
    if (child.depth() > cfg.max_depth) return tree;
    return child;
}

/// Both offspring of a couple: the first is based on parent 1 (the chooser),
/// the second on parent 2. A single Bernoulli draw decides whether crossover
/// happens; when it does, each chromosome recombines at its own points.
inline std::pair<Individual, Individual> crossover_pair(const Individual& parent1,
                                                        const Individual& parent2,
                                                        const VariationConfig& cfg, Rng& rng) {
    std::pair<Individual, Individual> out{
        Individual{parent1.solution, parent1.preference, std::nullopt},
        Individual{parent2.solution, parent2.preference, std::nullopt}};
    if (!bernoulli(rng, cfg.crossover_prob)) return out;
    std::tie(out.first.solution, out.second.solution) = crossover_chromosomes(
        parent1.solution, parent2.solution, cfg.crossover, cfg.max_depth, rng);
    std::tie(out.first.preference, out.second.preference) = crossover_chromosomes(
        parent1.preference, parent2.preference, cfg.crossover, cfg.max_depth, rng);
    return out;
}

/// The parent-1-based offspring of crossover_pair().
inline Individual one_point_crossover(const Individual& parent1, const Individual& parent2,
                                      const VariationConfig& cfg, Rng& rng) {
    return crossover_pair(parent1, parent2, cfg, rng).first;
}

inline Individual subtree_mutation(const Individual& ind, const VariationConfig& cfg, Rng& rng) {
    Individual child{ind.solution, ind.preference, std::nullopt};
    if (!bernoulli(rng, cfg.mutation_prob)) return child;
    child.solution = mutate_chromosome(ind.solution, cfg, rng);
    child.preference = mutate_chromosome(ind.preference, cfg, rng);
    return child;
}

}  // namespace pimp
