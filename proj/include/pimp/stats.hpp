#pragma once

// Nonparametric tests for comparing approaches over paired runs.
//
// Matrices are row-major: rows are runs (blocks), columns are approaches
// (treatments).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pimp::stats {

struct TestResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

using Matrix = std::vector<std::vector<double>>;
using BoolMatrix = std::vector<std::vector<bool>>;

namespace detail {

// Regularized lower incomplete gamma P(a, x) by its power series; x < a + 1.
inline double gamma_p_series(double a, double x) {
    double term = 1.0 / a, sum = term;
    for (int n = 1; n < 10000; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a, x) by modified Lentz continued
// fraction; x >= a + 1.
inline double gamma_q_fraction(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

inline void check_matrix(std::size_t rows, std::size_t cols, const auto& m) {
    if (rows < 2 || cols < 2) throw std::invalid_argument("need at least 2 rows and 2 columns");
    for (const auto& r : m)
        if (r.size() != cols) throw std::invalid_argument("ragged sample matrix");
}

}  // namespace detail

/// Q(a, x) = Gamma(a, x) / Gamma(a).
inline double regularized_gamma_q(double a, double x) {
    if (a <= 0.0 || x < 0.0) throw std::domain_error("regularized_gamma_q: a > 0, x >= 0 required");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
    return detail::gamma_q_fraction(a, x);
}

/// Upper tail of the chi-square distribution.
inline double chi_square_sf(double x, int df) {
    if (df < 1) throw std::domain_error("chi_square_sf: df >= 1 required");
    if (x <= 0.0) return 1.0;
    return std::clamp(regularized_gamma_q(0.5 * df, 0.5 * x), 0.0, 1.0);
}

inline double bonferroni(double p, int comparisons) {
    if (comparisons < 1) throw std::domain_error("bonferroni: at least one comparison");
    return std::min(1.0, p * comparisons);
}

/// 1-based ranks with ties sharing their average rank.
inline std::vector<double> average_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(values.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

/// Sum of t^3 - t over tie groups.
inline double tie_term(std::span<const double> values) {
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size();) {
        std::size_t j = i;
        while (j < v.size() && v[j] == v[i]) ++j;
        const auto t = static_cast<double>(j - i);
        sum += t * t * t - t;
        i = j;
    }
    return sum;
}

/// Friedman chi-square with tie correction; k - 1 degrees of freedom.
inline TestResult friedman_test(const Matrix& samples) {
    const std::size_t n = samples.size();
    const std::size_t k = n ? samples.front().size() : 0;
    detail::check_matrix(n, k, samples);
    std::vector<double> column_rank_sums(k, 0.0);
    double ties = 0.0;
    for (const auto& row : samples) {
        const auto r = average_ranks(row);
        for (std::size_t j = 0; j < k; ++j) column_rank_sums[j] += r[j];
        ties += tie_term(row);
    }
    const double nd = static_cast<double>(n), kd = static_cast<double>(k);
    const double correction = 1.0 - ties / (nd * (kd * kd * kd - kd));
    if (correction <= 0.0) return {0.0, 1.0};
    double sum_sq = 0.0;
    for (double r : column_rank_sums) sum_sq += r * r;
    const double raw = 12.0 / (nd * kd * (kd + 1.0)) * sum_sq - 3.0 * nd * (kd + 1.0);
    const double stat = std::max(0.0, raw / correction);
    return {stat, chi_square_sf(stat, static_cast<int>(k) - 1)};
}

/// Two-sided Wilcoxon signed-rank test. Zero differences are dropped; the
/// statistic is min(W+, W-). The p-value is exact (enumeration of the null
/// distribution) for up to `exact_threshold` non-zero differences and
/// otherwise uses the normal approximation with tie and continuity correction.
inline TestResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                       std::size_t exact_threshold = 12) {
    if (a.size() != b.size() || a.size() < 2)
        throw std::invalid_argument("wilcoxon: equal lengths >= 2 required");
    std::vector<double> diffs;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) diffs.push_back(a[i] - b[i]);
    const std::size_t n = diffs.size();
    if (n == 0) return {0.0, 1.0};

    std::vector<double> magnitudes(n);
    for (std::size_t i = 0; i < n; ++i) magnitudes[i] = std::fabs(diffs[i]);
    const auto ranks = average_ranks(magnitudes);
    double w_plus = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        total += ranks[i];
        if (diffs[i] > 0) w_plus += ranks[i];
    }
    const double w = std::min(w_plus, total - w_plus);

    if (n <= exact_threshold) {
        // Average ranks are multiples of 1/2, so doubled ranks are integers and
        // the null distribution of 2 W+ is a subset-sum count.
        std::vector<std::size_t> doubled(n);
        std::size_t doubled_total = 0;
        for (std::size_t i = 0; i < n; ++i) {
            doubled[i] = static_cast<std::size_t>(std::llround(2.0 * ranks[i]));
            doubled_total += doubled[i];
        }
        std::vector<double> ways(doubled_total + 1, 0.0);
        ways[0] = 1.0;
        for (std::size_t r : doubled)
            for (std::size_t s = doubled_total; s >= r; --s) {
                ways[s] += ways[s - r];
                if (s == r) break;
            }
        const auto observed = static_cast<std::size_t>(std::llround(2.0 * w));
        double tail = 0.0;
        for (std::size_t s = 0; s <= observed; ++s) tail += ways[s];
        const double p = 2.0 * tail / std::ldexp(1.0, static_cast<int>(n));
        return {w, std::min(1.0, p)};
    }

    const double nd = static_cast<double>(n);
    const double mean = nd * (nd + 1.0) / 4.0;
    const double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term(magnitudes) / 48.0;
    if (var <= 0.0) return {w, 1.0};
    const double z = std::max(0.0, std::fabs(w_plus - mean) - 0.5) / std::sqrt(var);
    return {w, std::min(1.0, std::erfc(z / std::sqrt(2.0)))};
}

/// Cochran's Q for k related binary samples; k - 1 degrees of freedom.
inline TestResult cochran_q(const BoolMatrix& outcomes) {
    const std::size_t n = outcomes.size();
    const std::size_t k = n ? outcomes.front().size() : 0;
    detail::check_matrix(n, k, outcomes);
    std::vector<double> col(k, 0.0);
    double sum_row = 0.0, sum_row_sq = 0.0;
    for (const auto& row : outcomes) {
        double r = 0.0;
        for (std::size_t j = 0; j < k; ++j)
            if (row[j]) {
                col[j] += 1.0;
                r += 1.0;
            }
        sum_row += r;
        sum_row_sq += r * r;
    }
    const double kd = static_cast<double>(k);
    const double denom = kd * sum_row - sum_row_sq;
    if (denom == 0.0) return {0.0, 1.0};
    const double expected = sum_row / kd;
    double dev = 0.0;
    for (double c : col) dev += (c - expected) * (c - expected);
    const double q = kd * (kd - 1.0) * dev / denom;
    return {q, chi_square_sf(q, static_cast<int>(k) - 1)};
}

/// McNemar's test with continuity correction on two paired binary samples.
inline TestResult mcnemar(const std::vector<bool>& a, const std::vector<bool>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("mcnemar: equal lengths required");
    double only_a = 0.0, only_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] && !b[i]) only_a += 1.0;
        if (!a[i] && b[i]) only_b += 1.0;
    }
    const double discordant = only_a + only_b;
    if (discordant == 0.0) return {0.0, 1.0};
    const double d = std::fabs(only_a - only_b) - 1.0;
    const double stat = std::max(0.0, d * d / discordant);
    return {stat, chi_square_sf(stat, 1)};
}

/// Bartlett's test for equal variances across the columns; k - 1 degrees of
/// freedom. Throws std::domain_error when a column has zero variance.
inline TestResult bartlett_test(const Matrix& samples) {
    const std::size_t n = samples.size();
    const std::size_t k = n ? samples.front().size() : 0;
    detail::check_matrix(n, k, samples);
    const double ni = static_cast<double>(n), kd = static_cast<double>(k);
    const double big_n = ni * kd;
    double pooled = 0.0, log_sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        double mean = 0.0;
        for (const auto& row : samples) mean += row[j];
        mean /= ni;
        double ss = 0.0;
        for (const auto& row : samples) ss += (row[j] - mean) * (row[j] - mean);
        const double var = ss / (ni - 1.0);
        if (!(var > 0.0)) throw std::domain_error("bartlett: a group has zero variance");
        pooled += ss;
        log_sum += (ni - 1.0) * std::log(var);
    }
    pooled /= big_n - kd;
    const double numerator = (big_n - kd) * std::log(pooled) - log_sum;
    const double c = 1.0 + (kd / (ni - 1.0) - 1.0 / (big_n - kd)) / (3.0 * (kd - 1.0));
    const double stat = std::max(0.0, numerator / c);
    return {stat, chi_square_sf(stat, static_cast<int>(k) - 1)};
}

}  // namespace pimp::stats
