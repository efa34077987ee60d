#pragma once

// Experiment orchestration: plan files, the run matrix, aggregation into
// per-cell summaries, the test cascade and report emission.
//
// Output layout under the experiment directory:
//   plan.txt
//   <problem>/<rate>/<approach>/run_<r>.jsonl        run log
//   <problem>/<rate>/<approach>/run_<r>.gen0.tsv     generation-0 snapshot
//   <problem>/<rate>/<approach>/run_<r>.final.tsv    final snapshot
//   <problem>/<rate>/summary.csv, stats.json         per (problem, rate)
//   summary.csv, stats.json, tables/*.csv            whole experiment

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pimp/engine.hpp"
#include "pimp/format.hpp"
#include "pimp/metrics_io.hpp"
#include "pimp/stats.hpp"

namespace pimp {

namespace fs = std::filesystem;

inline constexpr double kAlpha = 0.05;

struct ExperimentPlan {
    std::vector<Problem> problems{Problem::koza1, Problem::nguyen6, Problem::pagie1};
    std::vector<double> mutation_rates{0.05, 0.10};
    std::vector<Approach> approaches{Approach::pimp, Approach::random_mate, Approach::standard};
    int runs_per_cell = 30;
    std::uint64_t master_seed = 0;
    std::optional<int> generations;
    std::optional<std::size_t> population_size;
};

inline std::uint64_t rate_tag(double rate) {
    return static_cast<std::uint64_t>(std::llround(rate * 1000.0));
}

inline std::string rate_dir(double rate) { return format_double(rate); }

/// Shared by every approach of a cell: the approach is not part of the mix.
inline std::uint64_t run_seed(std::uint64_t master_seed, Problem problem, double rate, int run) {
    return mix({master_seed, tag_hash(name(problem)), rate_tag(rate), static_cast<std::uint64_t>(run)});
}

inline RunConfig cell_config(const ExperimentPlan& plan, Problem problem, double rate,
                             Approach approach, int run) {
    RunConfig c;
    c.approach = approach;
    c.problem = problem;
    c.mutation_prob = rate;
    c.run_seed = run_seed(plan.master_seed, problem, rate, run);
    if (plan.generations) c.generations = *plan.generations;
    if (plan.population_size) c.population_size = *plan.population_size;
    return c;
}

namespace detail {

inline std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size())
        throw ConfigError("plan: bad value for '" + key + "': " + value);
    return out;
}

}  // namespace detail

/// Flat key=value format; '#' starts a comment. Lists are comma separated.
///   problems=koza1,nguyen6,pagie1
///   rates=0.05,0.1
///   approaches=pimp,random,standard
///   runs=30
///   master_seed=42
///   generations=200        (optional override)
///   population=100         (optional override)
inline ExperimentPlan parse_plan(std::istream& is) {
    ExperimentPlan plan;
    bool have_seed = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("plan line " + std::to_string(line_no) + ": expected key=value");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "problems") {
            plan.problems.clear();
            for (const auto& p : detail::split_list(value)) plan.problems.push_back(problem_from_name(p));
        } else if (key == "rates" || key == "mutation_rates") {
            plan.mutation_rates.clear();
            for (const auto& r : detail::split_list(value))
                plan.mutation_rates.push_back(detail::parse_number<double>(key, r));
        } else if (key == "approaches") {
            plan.approaches.clear();
            for (const auto& a : detail::split_list(value)) plan.approaches.push_back(approach_from_name(a));
        } else if (key == "runs") {
            plan.runs_per_cell = detail::parse_number<int>(key, value);
        } else if (key == "master_seed") {
            plan.master_seed = detail::parse_number<std::uint64_t>(key, value);
            have_seed = true;
        } else if (key == "generations") {
            plan.generations = detail::parse_number<int>(key, value);
        } else if (key == "population") {
            plan.population_size = detail::parse_number<std::size_t>(key, value);
        } else {
            throw ConfigError("plan line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }
    if (!have_seed) throw ConfigError("plan: master_seed is required");
    if (plan.runs_per_cell < 1) throw ConfigError("plan: runs must be positive");
    if (plan.problems.empty() || plan.mutation_rates.empty() || plan.approaches.empty())
        throw ConfigError("plan: problems, rates and approaches must be non-empty");
    return plan;
}

inline void write_plan(std::ostream& os, const ExperimentPlan& plan) {
    auto join = [](const auto& items, auto fn) {
        std::string out;
        for (const auto& i : items) out += (out.empty() ? "" : ",") + fn(i);
        return out;
    };
    os << "problems=" << join(plan.problems, [](Problem p) { return std::string(name(p)); }) << '\n'
       << "rates=" << join(plan.mutation_rates, [](double r) { return format_double(r); }) << '\n'
       << "approaches=" << join(plan.approaches, [](Approach a) { return std::string(name(a)); }) << '\n'
       << "runs=" << plan.runs_per_cell << '\n'
       << "master_seed=" << plan.master_seed << '\n';
    if (plan.generations) os << "generations=" << *plan.generations << '\n';
    if (plan.population_size) os << "population=" << *plan.population_size << '\n';
}

inline fs::path cell_dir(const fs::path& root, Problem p, double rate) {
    return root / std::string(name(p)) / rate_dir(rate);
}

inline fs::path run_path(const fs::path& root, Problem p, double rate, Approach a, int run,
                         std::string_view suffix = ".jsonl") {
    return cell_dir(root, p, rate) / std::string(name(a)) /
           ("run_" + std::to_string(run) + std::string(suffix));
}

namespace detail {

inline void write_atomically(const fs::path& path, const std::function<void(std::ostream&)>& body) {
    fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot write " + tmp.string());
        body(os);
        if (!os) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

}  // namespace detail

struct RunTask {
    Problem problem;
    double rate;
    Approach approach;
    int run;
};

inline std::vector<RunTask> plan_tasks(const ExperimentPlan& plan) {
    std::vector<RunTask> tasks;
    for (Problem p : plan.problems)
        for (double r : plan.mutation_rates)
            for (int run = 0; run < plan.runs_per_cell; ++run)
                for (Approach a : plan.approaches) tasks.push_back({p, r, a, run});
    return tasks;
}

/// Executes one run and persists its log and snapshots. The log is renamed
/// into place last, so its presence marks a completed run.
inline void execute_run(const ExperimentPlan& plan, const fs::path& root, const RunTask& t) {
    const RunConfig cfg = cell_config(plan, t.problem, t.rate, t.approach, t.run);
    const MetricsLog log = run(cfg);
    detail::write_atomically(run_path(root, t.problem, t.rate, t.approach, t.run, ".gen0.tsv"),
                             [&](std::ostream& os) { write_snapshot(os, log.initial); });
    detail::write_atomically(run_path(root, t.problem, t.rate, t.approach, t.run, ".final.tsv"),
                             [&](std::ostream& os) { write_snapshot(os, log.final_population); });
    detail::write_atomically(run_path(root, t.problem, t.rate, t.approach, t.run),
                             [&](std::ostream& os) { write_run_log(os, log); });
}

struct ExperimentProgress {
    std::size_t total = 0;
    std::size_t skipped = 0;
    std::size_t executed = 0;
};

/// Runs every missing (problem, rate, approach, run) with up to `jobs` worker
/// threads. Completed runs found on disk are skipped.
inline ExperimentProgress run_experiment(const ExperimentPlan& plan, const fs::path& root,
                                         unsigned jobs,
                                         const std::function<void(const RunTask&)>& on_done = {}) {
    fs::create_directories(root);
    detail::write_atomically(root / "plan.txt", [&](std::ostream& os) { write_plan(os, plan); });

    ExperimentProgress progress;
    std::vector<RunTask> pending;
    for (const auto& t : plan_tasks(plan)) {
        ++progress.total;
        if (fs::exists(run_path(root, t.problem, t.rate, t.approach, t.run))) {
            ++progress.skipped;
            continue;
        }
        pending.push_back(t);
    }

    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::exception_ptr failure;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= pending.size()) return;
            try {
                execute_run(plan, root, pending[i]);
            } catch (...) {
                std::lock_guard lock(mu);
                if (!failure) failure = std::current_exception();
                next = pending.size();
                return;
            }
            std::lock_guard lock(mu);
            ++progress.executed;
            if (on_done) on_done(pending[i]);
        }
    };
    const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(pending.size())));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
    return progress;
}

// ---------------------------------------------------------------------------
// Aggregation

struct CellSummary {
    Problem problem{};
    double rate = 0.0;
    Approach approach{};
    int expected_runs = 0;
    std::vector<RunSummary> runs;  // ordered by run index; complete runs only

    bool complete() const noexcept { return static_cast<int>(runs.size()) == expected_runs; }
    std::size_t population_size() const { return runs.empty() ? 0 : runs.front().config.population_size; }

    std::vector<double> final_best() const {
        std::vector<double> v;
        for (const auto& r : runs) v.push_back(r.final_best);
        return v;
    }
    std::vector<double> final_unique() const {
        std::vector<double> v;
        for (const auto& r : runs) v.push_back(static_cast<double>(r.final_unique));
        return v;
    }
    std::vector<bool> successes() const {
        std::vector<bool> v;
        for (const auto& r : runs) v.push_back(r.success);
        return v;
    }
    std::vector<bool> root_avoided() const {
        std::vector<bool> v;
        for (const auto& r : runs) v.push_back(!r.root_converged);
        return v;
    }

    double mbf_mean() const {
        const auto v = final_best();
        return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    }
    /// Sample standard deviation (n - 1).
    double mbf_stdev() const {
        const auto v = final_best();
        if (v.size() < 2) return 0.0;
        const double m = mbf_mean();
        double ss = 0.0;
        for (double x : v) ss += (x - m) * (x - m);
        return std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    double mbf_median() const {
        auto v = final_best();
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    }
    std::size_t success_count() const {
        const auto v = successes();
        return static_cast<std::size_t>(std::count(v.begin(), v.end(), true));
    }
    double success_pct() const {
        return 100.0 * static_cast<double>(success_count()) / static_cast<double>(runs.size());
    }
    double unique_pct_mean() const {
        double sum = 0.0;
        for (const auto& r : runs)
            sum += 100.0 * static_cast<double>(r.final_unique) / static_cast<double>(r.config.population_size);
        return sum / static_cast<double>(runs.size());
    }
    std::size_t root_avoided_count() const {
        const auto v = root_avoided();
        return static_cast<std::size_t>(std::count(v.begin(), v.end(), true));
    }
    std::size_t root_violations() const {
        std::size_t n = 0;
        for (const auto& r : runs) n += r.root_violations;
        return n;
    }
};

struct ExperimentResults {
    ExperimentPlan plan;
    std::vector<CellSummary> cells;  // plan order: problem, rate, approach
    std::size_t seed_sharing_violations = 0;

    bool complete() const {
        return std::all_of(cells.begin(), cells.end(), [](const auto& c) { return c.complete(); });
    }

    const CellSummary* find(Problem p, double rate, Approach a) const {
        for (const auto& c : cells)
            if (c.problem == p && rate_tag(c.rate) == rate_tag(rate) && c.approach == a) return &c;
        return nullptr;
    }
};

inline ExperimentPlan read_plan_file(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot read " + path.string());
    return parse_plan(is);
}

/// Loads every completed run under `root` and re-checks that generation 0 is
/// identical across approaches for each run seed.
inline ExperimentResults load_results(const fs::path& root) {
    ExperimentResults res;
    res.plan = read_plan_file(root / "plan.txt");
    for (Problem p : res.plan.problems)
        for (double r : res.plan.mutation_rates) {
            for (Approach a : res.plan.approaches) {
                CellSummary cell;
                cell.problem = p;
                cell.rate = r;
                cell.approach = a;
                cell.expected_runs = res.plan.runs_per_cell;
                for (int run = 0; run < res.plan.runs_per_cell; ++run) {
                    const auto path = run_path(root, p, r, a, run);
                    if (!fs::exists(path)) continue;
                    std::ifstream is(path);
                    cell.runs.push_back(read_run_log(is));
                }
                res.cells.push_back(std::move(cell));
            }
            for (int run = 0; run < res.plan.runs_per_cell; ++run) {
                std::optional<std::vector<std::string>> reference;
                for (Approach a : res.plan.approaches) {
                    const auto path = run_path(root, p, r, a, run, ".gen0.tsv");
                    if (!fs::exists(path)) continue;
                    std::ifstream is(path);
                    std::vector<std::string> solutions;
                    for (const auto& ind : read_snapshot(is)) solutions.push_back(serialize(ind.solution));
                    std::sort(solutions.begin(), solutions.end());
                    if (!reference) reference = std::move(solutions);
                    else if (*reference != solutions) ++res.seed_sharing_violations;
                }
            }
        }
    return res;
}

// ---------------------------------------------------------------------------
// Statistics

struct TestReport {
    std::string test;
    std::string measure;
    std::string comparison;  // "all" or "A vs B"
    std::optional<double> statistic;
    std::optional<double> p_value;
    std::optional<double> corrected_p;
    std::string decision;  // "significant", "not significant", or "undefined: <reason>"
};

inline Json to_json(const TestReport& t) {
    Json j;
    j["test"] = t.test;
    j["measure"] = t.measure;
    j["comparison"] = t.comparison;
    j["statistic"] = detail::optional_number(t.statistic);
    j["p"] = detail::optional_number(t.p_value);
    j["alpha"] = kAlpha;
    j["corrected_p"] = detail::optional_number(t.corrected_p);
    j["decision"] = t.decision;
    return j;
}

namespace detail {

inline TestReport make_report(std::string test, std::string measure, std::string comparison,
                              const std::function<stats::TestResult()>& fn, int comparisons = 1) {
    TestReport r{std::move(test), std::move(measure), std::move(comparison), {}, {}, {}, {}};
    try {
        const auto res = fn();
        r.statistic = res.statistic;
        r.p_value = res.p_value;
        r.corrected_p = comparisons > 1 ? stats::bonferroni(res.p_value, comparisons) : res.p_value;
        r.decision = *r.corrected_p < kAlpha ? "significant" : "not significant";
    } catch (const std::exception& e) {
        r.decision = std::string("undefined: ") + e.what();
    }
    return r;
}

}  // namespace detail

/// Omnibus and pairwise tests for one (problem, rate) over the approaches'
/// paired runs. Quantitative measures (final best MSE, final unique count):
/// Bartlett, Friedman, then pairwise Wilcoxon with Bonferroni. Binary measures
/// (success, root convergence avoided): Cochran's Q, then pairwise McNemar
/// with Bonferroni. Needs at least two approaches with equal, complete runs.
inline std::vector<TestReport> cell_tests(const std::vector<const CellSummary*>& group) {
    std::vector<TestReport> out;
    if (group.size() < 2) return out;
    const std::size_t runs = group.front()->runs.size();
    for (const auto* c : group)
        if (!c->complete() || c->runs.size() != runs) return out;
    if (runs < 2) return out;
    const int pairs = static_cast<int>(group.size() * (group.size() - 1) / 2);

    auto quantitative = [&](const std::string& measure, auto column) {
        stats::Matrix m(runs, std::vector<double>(group.size()));
        for (std::size_t j = 0; j < group.size(); ++j) {
            const auto v = column(*group[j]);
            for (std::size_t i = 0; i < runs; ++i) m[i][j] = v[i];
        }
        out.push_back(detail::make_report("bartlett", measure, "all", [&] { return stats::bartlett_test(m); }));
        out.push_back(detail::make_report("friedman", measure, "all", [&] { return stats::friedman_test(m); }));
        for (std::size_t a = 0; a < group.size(); ++a)
            for (std::size_t b = a + 1; b < group.size(); ++b) {
                const auto va = column(*group[a]), vb = column(*group[b]);
                out.push_back(detail::make_report(
                    "wilcoxon", measure,
                    std::string(display_name(group[a]->approach)) + " vs " +
                        std::string(display_name(group[b]->approach)),
                    [&] { return stats::wilcoxon_signed_rank(va, vb); }, pairs));
            }
    };
    auto binary = [&](const std::string& measure, auto column) {
        stats::BoolMatrix m(runs, std::vector<bool>(group.size()));
        for (std::size_t j = 0; j < group.size(); ++j) {
            const auto v = column(*group[j]);
            for (std::size_t i = 0; i < runs; ++i) m[i][j] = v[i];
        }
        out.push_back(detail::make_report("cochran_q", measure, "all", [&] { return stats::cochran_q(m); }));
        for (std::size_t a = 0; a < group.size(); ++a)
            for (std::size_t b = a + 1; b < group.size(); ++b) {
                const auto va = column(*group[a]), vb = column(*group[b]);
                out.push_back(detail::make_report(
                    "mcnemar", measure,
                    std::string(display_name(group[a]->approach)) + " vs " +
                        std::string(display_name(group[b]->approach)),
                    [&] { return stats::mcnemar(va, vb); }, pairs));
            }
    };
    quantitative("mbf", [](const CellSummary& c) { return c.final_best(); });
    quantitative("unique_solutions", [](const CellSummary& c) { return c.final_unique(); });
    binary("success", [](const CellSummary& c) { return c.successes(); });
    binary("root_convergence_avoided", [](const CellSummary& c) { return c.root_avoided(); });
    return out;
}

inline const TestReport* find_test(const std::vector<TestReport>& reports, std::string_view test,
                                   std::string_view measure, std::string_view comparison) {
    for (const auto& r : reports)
        if (r.test == test && r.measure == measure && r.comparison == comparison) return &r;
    return nullptr;
}

// ---------------------------------------------------------------------------
// Tables

inline constexpr std::string_view kGap = "NA";

inline std::string summary_csv_header() {
    return "problem,mutation,approach,runs,mbf_mean,mbf_stdev,mbf_median,success_count,success_pct,"
           "unique_pct_mean,root_avoided,root_violations\n";
}

inline std::string summary_csv_row(const CellSummary& c) {
    std::string row = std::string(name(c.problem)) + ',' + format_double(c.rate) + ',' +
                      std::string(display_name(c.approach)) + ',' + std::to_string(c.runs.size()) + '/' +
                      std::to_string(c.expected_runs);
    if (!c.complete()) {
        for (int i = 0; i < 8; ++i) row += ',' + std::string(kGap);
        return row + '\n';
    }
    row += ',' + format_double(c.mbf_mean()) + ',' + format_double(c.mbf_stdev()) + ',' +
           format_double(c.mbf_median()) + ',' + std::to_string(c.success_count()) + ',' +
           format_double(c.success_pct()) + ',' + format_double(c.unique_pct_mean()) + ',' +
           std::to_string(c.root_avoided_count()) + ',' + std::to_string(c.root_violations());
    return row + '\n';
}

/// Paper-style tables keyed by display name; any incomplete cell prints as NA.
inline std::map<std::string, std::string> results_tables(const ExperimentResults& res) {
    std::map<std::string, std::string> tables;
    std::string header = "problem,measure";
    for (Approach a : res.plan.approaches) header += ',' + std::string(display_name(a));
    header += '\n';
    auto cell_text = [&](Problem p, double rate, Approach a, auto fn) -> std::string {
        const auto* c = res.find(p, rate, a);
        if (!c || !c->complete()) return std::string(kGap);
        return fn(*c);
    };
    for (double rate : res.plan.mutation_rates) {
        std::string t = header;
        for (Problem p : res.plan.problems) {
            t += std::string(name(p)) + ",MBF";
            for (Approach a : res.plan.approaches)
                t += ',' + cell_text(p, rate, a, [](const CellSummary& c) { return format_scientific(c.mbf_mean(), 2); });
            t += '\n' + std::string(name(p)) + ",StDev";
            for (Approach a : res.plan.approaches)
                t += ',' + cell_text(p, rate, a, [](const CellSummary& c) { return format_scientific(c.mbf_stdev(), 2); });
            t += '\n';
        }
        tables["mbf_mutation_" + std::to_string(std::llround(rate * 100)) + ".csv"] = t;
    }
    auto per_rate = [&](const std::string& file, auto fn) {
        std::string t = "problem,mutation";
        for (Approach a : res.plan.approaches) t += ',' + std::string(display_name(a));
        t += '\n';
        for (Problem p : res.plan.problems)
            for (double rate : res.plan.mutation_rates) {
                t += std::string(name(p)) + ',' + format_double(rate);
                for (Approach a : res.plan.approaches) t += ',' + cell_text(p, rate, a, fn);
                t += '\n';
            }
        tables[file] = t;
    };
    per_rate("success_rate.csv", [](const CellSummary& c) { return format_double(c.success_pct()); });
    per_rate("unique_solutions.csv", [](const CellSummary& c) { return format_double(c.unique_pct_mean()); });
    per_rate("root_convergence_avoided.csv", [](const CellSummary& c) {
        return std::to_string(c.root_avoided_count()) + '/' + std::to_string(c.runs.size());
    });
    return tables;
}

struct AnalysisOutput {
    bool complete = false;
    std::size_t files_written = 0;
};

/// Writes summaries, statistics and tables for a loaded experiment. Returns
/// without writing anything when no run has completed.
inline AnalysisOutput write_analysis(const ExperimentResults& res, const fs::path& root) {
    AnalysisOutput out;
    out.complete = res.complete();
    const bool any = std::any_of(res.cells.begin(), res.cells.end(), [](const auto& c) { return !c.runs.empty(); });
    if (!any) return out;

    auto emit = [&](const fs::path& path, const std::string& text) {
        detail::write_atomically(path, [&](std::ostream& os) { os << text; });
        ++out.files_written;
    };

    std::string all = summary_csv_header();
    Json all_stats;
    all_stats["seed_sharing_violations"] = res.seed_sharing_violations;
    all_stats["complete"] = out.complete;
    all_stats["cells"] = Json::array();
    for (Problem p : res.plan.problems)
        for (double rate : res.plan.mutation_rates) {
            std::string local = summary_csv_header();
            std::vector<const CellSummary*> group;
            for (Approach a : res.plan.approaches) {
                const auto* c = res.find(p, rate, a);
                local += summary_csv_row(*c);
                group.push_back(c);
            }
            all += local.substr(summary_csv_header().size());
            Json cell;
            cell["problem"] = std::string(name(p));
            cell["mutation"] = rate;
            cell["tests"] = Json::array();
            for (const auto& t : cell_tests(group)) cell["tests"].push_back(to_json(t));
            emit(cell_dir(root, p, rate) / "summary.csv", local);
            emit(cell_dir(root, p, rate) / "stats.json", cell.dump(2) + '\n');
            all_stats["cells"].push_back(cell);
        }
    emit(root / "summary.csv", all);
    emit(root / "stats.json", all_stats.dump(2) + '\n');
    for (const auto& [file, text] : results_tables(res)) emit(root / "tables" / file, text);
    return out;
}

// ---------------------------------------------------------------------------
// Plots

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

/// Minimal SVG line chart.
inline std::string svg_line_chart(const std::string& title, const std::string& x_label,
                                  const std::string& y_label, const std::vector<Series>& series,
                                  bool log_y = false) {
    constexpr double width = 720, height = 440, left = 70, right = 160, top = 40, bottom = 50;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    bool first = true;
    auto ty = [&](double y) { return log_y ? std::log10(std::max(y, 1e-300)) : y; };
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) {
            const double v = ty(y);
            if (first) {
                x0 = x1 = x;
                y0 = y1 = v;
                first = false;
            }
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, v);
            y1 = std::max(y1, v);
        }
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    const double pw = width - left - right, ph = height - top - bottom;
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return top + ph - (ty(y) - y0) / (y1 - y0) * ph; };
    static constexpr const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n"
       << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
       << "\" stroke=\"black\"/>\n"
       << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph
       << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = x0 + (x1 - x0) * i / 5.0, yv = y0 + (y1 - y0) * i / 5.0;
        os << "<text x=\"" << px(xv) << "\" y=\"" << top + ph + 16 << "\" text-anchor=\"middle\">"
           << format_fixed(xv, 0) << "</text>\n";
        os << "<text x=\"" << left - 6 << "\" y=\"" << top + ph - ph * i / 5.0 + 4 << "\" text-anchor=\"end\">"
           << (log_y ? "1e" + format_fixed(yv, 1) : format_fixed(yv, 2)) << "</text>\n";
    }
    os << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">" << x_label
       << "</text>\n"
       << "<text transform=\"translate(16," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">" << y_label
       << "</text>\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        const char* color = colors[i % std::size(colors)];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : series[i].points) os << format_fixed(px(x), 2) << ',' << format_fixed(py(y), 2) << ' ';
        os << "\"/>\n";
        const double ly = top + 14 + 18.0 * static_cast<double>(i);
        os << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << left + pw + 32 << "\" y2=\""
           << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
           << "<text x=\"" << left + pw + 38 << "\" y=\"" << ly << "\">" << series[i].label << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

/// Mean unique-solution percentage per recorded generation, over the cell's runs.
inline Series unique_curve(const CellSummary& c) {
    Series s{std::string(display_name(c.approach)), {}};
    if (c.runs.empty()) return s;
    for (const auto& [g, _] : c.runs.front().unique) {
        double sum = 0.0;
        for (const auto& r : c.runs) sum += 100.0 * static_cast<double>(r.unique.at(g)) /
                                            static_cast<double>(r.config.population_size);
        s.points.emplace_back(g, sum / static_cast<double>(c.runs.size()));
    }
    return s;
}

/// Role counts (or per-role best MSE) averaged over runs, per generation.
inline std::vector<Series> role_curves(const CellSummary& c, bool fitness) {
    std::vector<Series> out{{"Choosers", {}}, {"Courters", {}}, {"Both", {}}};
    if (c.runs.empty()) return out;
    const std::size_t gens = c.runs.front().roles.size();
    for (std::size_t g = 0; g < gens; ++g) {
        double sum[3] = {0, 0, 0};
        int n[3] = {0, 0, 0};
        for (const auto& r : c.runs) {
            const auto& t = r.roles.at(g);
            if (fitness) {
                const std::optional<double> v[3] = {t.best_choosers, t.best_courters, t.best_both};
                for (int k = 0; k < 3; ++k)
                    if (v[k]) sum[k] += *v[k], ++n[k];
            } else {
                const std::size_t v[3] = {t.choosers_only, t.courters_only, t.both};
                for (int k = 0; k < 3; ++k) sum[k] += static_cast<double>(v[k]), ++n[k];
            }
        }
        for (int k = 0; k < 3; ++k)
            if (n[k] > 0) out[static_cast<std::size_t>(k)].points.emplace_back(static_cast<double>(g), sum[k] / n[k]);
    }
    return out;
}

/// Writes the charts for every (problem, rate); returns the number of files.
inline std::size_t write_plots(const ExperimentResults& res, const fs::path& out_dir) {
    std::size_t written = 0;
    auto emit = [&](const fs::path& path, const std::string& text) {
        detail::write_atomically(path, [&](std::ostream& os) { os << text; });
        ++written;
    };
    for (Problem p : res.plan.problems)
        for (double rate : res.plan.mutation_rates) {
            const std::string tag = std::string(name(p)) + "_" + rate_dir(rate);
            std::vector<Series> unique;
            for (Approach a : res.plan.approaches) {
                const auto* c = res.find(p, rate, a);
                if (!c || c->runs.empty()) continue;
                unique.push_back(unique_curve(*c));
                const std::string who = std::string(name(a));
                emit(out_dir / ("roles_" + tag + "_" + who + ".svg"),
                     svg_line_chart("Role segregation: " + std::string(name(p)) + ", mutation " + rate_dir(rate) +
                                        ", " + std::string(display_name(a)),
                                    "generation", "individuals (mean over runs)", role_curves(*c, false)));
                emit(out_dir / ("role_mbf_" + tag + "_" + who + ".svg"),
                     svg_line_chart("Best MSE per role: " + std::string(name(p)) + ", mutation " + rate_dir(rate) +
                                        ", " + std::string(display_name(a)),
                                    "generation", "log10 best MSE (mean over runs)", role_curves(*c, true), true));
            }
            if (!unique.empty())
                emit(out_dir / ("unique_" + tag + ".svg"),
                     svg_line_chart("Unique solutions: " + std::string(name(p)) + ", mutation " + rate_dir(rate),
                                    "generation", "% unique (mean over runs)", unique));
        }
    return written;
}

}  // namespace pimp
