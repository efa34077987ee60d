#pragma once

// Dual-chromosome individuals and ramped half-and-half construction.

#include <charconv>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <system_error>
#include <vector>

#include "pimp/benchmarks.hpp"
#include "pimp/format.hpp"
#include "pimp/primitives.hpp"
#include "pimp/random.hpp"

namespace pimp {

/// A solution chromosome scored by the fitness cases and a preference
/// chromosome describing the ideal mate. Fitness is a function of the
/// solution alone.
struct Individual {
    ExprTree solution;
    ExprTree preference;
    std::optional<double> fitness;

    bool evaluated() const noexcept { return fitness.has_value(); }
};

using Population = std::vector<Individual>;

enum class TreeMethod { grow, full };

namespace detail {

inline void generate(std::vector<Symbol>& out, int node_depth, int max_depth, TreeMethod method,
                     std::span<const Symbol> terminals, Rng& rng) {
    Symbol s;
    if (node_depth >= max_depth) {
        s = terminals[uniform_index(rng, terminals.size())];
    } else if (method == TreeMethod::full || node_depth == 1) {
        s = kFunctions[uniform_index(rng, kFunctions.size())];
    } else {
        // Uniform over the union: a terminal with probability |T| / (|T| + |F|).
        const auto k = uniform_index(rng, terminals.size() + kFunctions.size());
        s = k < terminals.size() ? terminals[k] : kFunctions[k - terminals.size()];
    }
    out.push_back(s);
    for (int c = 0; c < arity(s); ++c) generate(out, node_depth + 1, max_depth, method, terminals, rng);
}

}  // namespace detail

/// Random tree of depth at most `max_depth`. Full trees reach `max_depth` on
/// every branch; grow trees start with a function whenever `max_depth` > 1.
inline ExprTree random_tree(TreeMethod method, int max_depth, std::span<const Symbol> terminals,
                            Rng& rng) {
    if (max_depth < 1) throw ConfigError("tree depth must be at least 1");
    std::vector<Symbol> nodes;
    detail::generate(nodes, 1, max_depth, method, terminals, rng);
    return ExprTree(std::move(nodes));
}

/// `count` trees; tree i draws its depth limit from [depth_low, depth_high] and
/// uses full when i is even, grow when odd.
inline std::vector<ExprTree> ramped_half_and_half(std::size_t count, int depth_low, int depth_high,
                                                  std::span<const Symbol> terminals, Rng& rng) {
    if (depth_low < 1 || depth_low > depth_high)
        throw ConfigError("ramped half-and-half needs 1 <= depth_low <= depth_high");
    std::vector<ExprTree> trees;
    trees.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const int limit = uniform_int(rng, depth_low, depth_high);
        trees.push_back(random_tree(i % 2 == 0 ? TreeMethod::full : TreeMethod::grow, limit,
                                    terminals, rng));
    }
    return trees;
}

/// Solutions come only from `rng_solutions` and preferences only from
/// `rng_preferences`, so generation-0 solutions do not depend on whether the
/// preferences are ever used.
inline Population init_population(std::size_t size, int depth_low, int depth_high,
                                  std::size_t input_arity, Rng& rng_solutions,
                                  Rng& rng_preferences) {
    const auto terminals = terminals_for(input_arity);
    auto solutions = ramped_half_and_half(size, depth_low, depth_high, terminals, rng_solutions);
    auto preferences = ramped_half_and_half(size, depth_low, depth_high, terminals, rng_preferences);
    Population pop;
    pop.reserve(size);
    for (std::size_t i = 0; i < size; ++i)
        pop.push_back(Individual{std::move(solutions[i]), std::move(preferences[i]), std::nullopt});
    return pop;
}

/// MSE of the solution chromosome over the cases; cached on the individual.
inline double evaluate(Individual& ind, const FitnessCases& cases) {
    if (cases.count() == 0) throw ConfigError("no fitness cases");
    const auto outputs = eval_columns(ind.solution, cases.columns);
    ind.fitness = mean_squared_error(outputs, cases.targets);
    return *ind.fitness;
}

// Snapshot format: one individual per line,
// "<solution>\t<preference>\t<fitness>", fitness "na" when unevaluated.

inline void write_snapshot(std::ostream& os, const Population& pop) {
    for (const auto& ind : pop) {
        os << serialize(ind.solution) << '\t' << serialize(ind.preference) << '\t'
           << (ind.fitness ? format_double(*ind.fitness) : std::string("na")) << '\n';
    }
}

inline Population read_snapshot(std::istream& is) {
    Population pop;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto t1 = line.find('\t');
        const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
        if (t2 == std::string::npos)
            throw ConfigError("snapshot line " + std::to_string(line_no) + ": expected 3 fields");
        Individual ind{parse(std::string_view(line).substr(0, t1)),
                       parse(std::string_view(line).substr(t1 + 1, t2 - t1 - 1)), std::nullopt};
        const std::string fit = line.substr(t2 + 1);
        if (fit != "na") {
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(fit.data(), fit.data() + fit.size(), v);
            if (ec != std::errc{} || ptr != fit.data() + fit.size())
                throw ConfigError("snapshot line " + std::to_string(line_no) + ": bad fitness");
            ind.fitness = v;
        }
        pop.push_back(std::move(ind));
    }
    return pop;
}

}  // namespace pimp
