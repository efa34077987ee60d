#pragma once

// Symbolic-regression benchmark instances: Koza-1, Nguyen-6 and Pagie-1.

#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pimp/format.hpp"
#include "pimp/primitives.hpp"
#include "pimp/random.hpp"

namespace pimp {

enum class Problem { koza1, nguyen6, pagie1 };

inline constexpr std::string_view name(Problem p) noexcept {
    switch (p) {
        case Problem::koza1: return "koza1";
        case Problem::nguyen6: return "nguyen6";
        default: return "pagie1";
    }
}

inline Problem problem_from_name(std::string_view text) {
    for (Problem p : {Problem::koza1, Problem::nguyen6, Problem::pagie1})
        if (name(p) == text) return p;
    throw ConfigError("unknown problem '" + std::string(text) + "'");
}

inline constexpr std::size_t input_arity(Problem p) noexcept { return p == Problem::pagie1 ? 2 : 1; }

/// x^4 + x^3 + x^2 + x
inline double koza1(double x) noexcept { return x * x * x * x + x * x * x + x * x + x; }

/// sin(x) + sin(x + x^2)
inline double nguyen6(double x) noexcept { return std::sin(x) + std::sin(x + x * x); }

/// 1/(1 + x^-4) + 1/(1 + y^-4); undefined on either axis.
inline double pagie1(double x, double y) {
    if (x == 0.0 || y == 0.0) throw std::domain_error("pagie1 is undefined for a zero coordinate");
    return 1.0 / (1.0 + std::pow(x, -4.0)) + 1.0 / (1.0 + std::pow(y, -4.0));
}

/// Input points stored column-major (`columns[v][i]` is variable v of case i).
struct FitnessCases {
    std::vector<std::vector<double>> columns;
    std::vector<double> targets;

    std::size_t arity() const noexcept { return columns.size(); }
    std::size_t count() const noexcept { return targets.size(); }

    std::vector<double> point(std::size_t i) const {
        std::vector<double> p;
        p.reserve(columns.size());
        for (const auto& c : columns) p.push_back(c[i]);
        return p;
    }

    friend bool operator==(const FitnessCases&, const FitnessCases&) = default;
};

inline double ground_truth(Problem p, std::span<const double> point) {
    switch (p) {
        case Problem::koza1: return koza1(point[0]);
        case Problem::nguyen6: return nguyen6(point[0]);
        default: return pagie1(point[0], point[1]);
    }
}

/// Koza-1 and Nguyen-6: 20 points uniform in [-1, 1]. Pagie-1: the full
/// -5:0.4:5 grid in both variables (676 points, none on an axis).
inline FitnessCases make_cases(Problem problem, Rng& rng) {
    FitnessCases cases;
    if (problem == Problem::pagie1) {
        constexpr int steps = 26;
        cases.columns.assign(2, {});
        for (int i = 0; i < steps; ++i) {
            for (int j = 0; j < steps; ++j) {
                // Integer-derived coordinates avoid accumulated step error.
                cases.columns[0].push_back((-50 + 4 * i) / 10.0);
                cases.columns[1].push_back((-50 + 4 * j) / 10.0);
            }
        }
    } else {
        cases.columns.assign(1, {});
        for (int i = 0; i < 20; ++i) cases.columns[0].push_back(uniform_real(rng, -1.0, 1.0));
    }
    cases.targets.reserve(cases.columns[0].size());
    for (std::size_t i = 0; i < cases.columns[0].size(); ++i)
        cases.targets.push_back(ground_truth(problem, cases.point(i)));
    return cases;
}

/// CSV with header x[,y],target.
inline void write_cases_csv(std::ostream& os, const FitnessCases& cases) {
    static constexpr std::string_view vars[] = {"x", "y"};
    for (std::size_t v = 0; v < cases.arity(); ++v) os << vars[v] << ',';
    os << "target\n";
    for (std::size_t i = 0; i < cases.count(); ++i) {
        for (const auto& c : cases.columns) os << format_double(c[i]) << ',';
        os << format_double(cases.targets[i]) << '\n';
    }
}

}  // namespace pimp
