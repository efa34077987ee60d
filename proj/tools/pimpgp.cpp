// pimpgp: single runs, the experiment matrix, analysis and plots.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 incomplete data.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "pimp/harness.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitIncomplete = 2;

struct RunOptions {
    std::string approach = "pimp";
    std::string problem = "koza1";
    double mutation = 0.05;
    std::uint64_t seed = 0;
    std::optional<int> generations;
    std::optional<std::size_t> population;
    std::string crossover = "subtree";
    int offspring = 2;
    std::string out;
    std::string couples;
    std::string snapshots;
};

int command_run(const RunOptions& o) {
    pimp::RunConfig cfg;
    cfg.approach = pimp::approach_from_name(o.approach);
    cfg.problem = pimp::problem_from_name(o.problem);
    cfg.mutation_prob = o.mutation;
    cfg.run_seed = o.seed;
    if (o.generations) cfg.generations = *o.generations;
    if (o.population) cfg.population_size = *o.population;
    cfg.crossover = pimp::crossover_mode_from_name(o.crossover);
    cfg.offspring_per_couple = o.offspring;
    cfg.validate();

    pimp::RunHooks hooks;
    std::ofstream couple_log;
    if (!o.couples.empty()) {
        couple_log.open(o.couples);
        if (!couple_log) throw pimp::ConfigError("cannot write " + o.couples);
        hooks.on_couple = [&](const pimp::CoupleRecord& c) { pimp::write_couple(couple_log, c); };
    }
    const pimp::MetricsLog log = pimp::run(cfg, hooks);

    if (!o.snapshots.empty()) {
        std::filesystem::create_directories(o.snapshots);
        std::ofstream gen0(std::filesystem::path(o.snapshots) / "gen0.tsv");
        pimp::write_snapshot(gen0, log.initial);
        std::ofstream last(std::filesystem::path(o.snapshots) / "final.tsv");
        pimp::write_snapshot(last, log.final_population);
    }
    if (o.out.empty()) {
        pimp::write_run_log(std::cout, log);
    } else {
        std::ofstream os(o.out);
        if (!os) throw pimp::ConfigError("cannot write " + o.out);
        pimp::write_run_log(os, log);
    }
    return 0;
}

int command_experiment(const std::string& plan_file, unsigned jobs, const std::string& out) {
    const pimp::ExperimentPlan plan = pimp::read_plan_file(plan_file);
    const auto progress = pimp::run_experiment(plan, out, jobs, [](const pimp::RunTask& t) {
        std::cerr << "done " << pimp::name(t.problem) << ' ' << pimp::rate_dir(t.rate) << ' '
                  << pimp::name(t.approach) << " run " << t.run << '\n';
    });
    std::cerr << progress.executed << " runs executed, " << progress.skipped << " already complete, "
              << progress.total << " total\n";
    const auto results = pimp::load_results(out);
    pimp::write_analysis(results, out);
    return results.complete() ? 0 : kExitIncomplete;
}

int command_analyze(const std::string& in) {
    if (!std::filesystem::exists(std::filesystem::path(in) / "plan.txt")) {
        std::cerr << "no experiment found in " << in << '\n';
        return kExitIncomplete;
    }
    const auto results = pimp::load_results(in);
    const auto written = pimp::write_analysis(results, in);
    if (written.files_written == 0) {
        std::cerr << "no completed runs in " << in << '\n';
        return kExitIncomplete;
    }
    if (results.seed_sharing_violations > 0)
        std::cerr << "warning: " << results.seed_sharing_violations
                  << " runs have generation-0 populations that differ across approaches\n";
    if (!written.complete) {
        std::cerr << "incomplete experiment: missing cells are marked NA\n";
        return kExitIncomplete;
    }
    return 0;
}

int command_plot(const std::string& in, const std::string& out) {
    if (!std::filesystem::exists(std::filesystem::path(in) / "plan.txt")) {
        std::cerr << "no experiment found in " << in << '\n';
        return kExitIncomplete;
    }
    const auto results = pimp::load_results(in);
    const bool any = std::any_of(results.cells.begin(), results.cells.end(),
                                 [](const auto& c) { return !c.runs.empty(); });
    if (!any) {
        std::cerr << "no completed runs in " << in << '\n';
        return kExitIncomplete;
    }
    pimp::write_plots(results, out);
    return results.complete() ? 0 : kExitIncomplete;
}

int command_cases(const std::string& problem, std::uint64_t seed) {
    pimp::RunConfig cfg;
    cfg.problem = pimp::problem_from_name(problem);
    cfg.run_seed = seed;
    pimp::write_cases_csv(std::cout, pimp::run_cases(cfg));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Genetic programming with preference-based mate choice"};
    app.require_subcommand(1);

    RunOptions run_opts;
    auto* run = app.add_subcommand("run", "Execute a single run and emit its JSON-lines log");
    run->add_option("--approach", run_opts.approach, "pimp | random | standard")->required();
    run->add_option("--problem", run_opts.problem, "koza1 | nguyen6 | pagie1")->required();
    run->add_option("--mutation", run_opts.mutation, "Mutation probability")->required();
    run->add_option("--seed", run_opts.seed, "Run seed")->required();
    run->add_option("--generations", run_opts.generations, "Override the number of generations");
    run->add_option("--pop", run_opts.population, "Override the population size");
    run->add_option("--crossover", run_opts.crossover, "subtree | common-region");
    run->add_option("--offspring", run_opts.offspring, "Offspring per couple (1 or 2)");
    run->add_option("--out", run_opts.out, "Write the log to this file instead of stdout");
    run->add_option("--couples", run_opts.couples, "Write every selected couple to this file");
    run->add_option("--snapshots", run_opts.snapshots, "Directory for generation-0 and final snapshots");

    std::string plan_file, out_dir, in_dir, plot_dir;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    auto* experiment = app.add_subcommand("experiment", "Execute (or resume) an experiment plan");
    experiment->add_option("--plan", plan_file, "Plan file (key=value lines)")->required()->check(CLI::ExistingFile);
    experiment->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
    experiment->add_option("--out", out_dir, "Output directory")->required();

    auto* analyze = app.add_subcommand("analyze", "Aggregate runs into summaries, tables and statistics");
    analyze->add_option("--in", in_dir, "Experiment directory")->required();

    auto* plot = app.add_subcommand("plot", "Render SVG charts for an experiment");
    plot->add_option("--in", in_dir, "Experiment directory")->required();
    plot->add_option("--out", plot_dir, "Chart directory")->required();

    std::string cases_problem = "koza1";
    std::uint64_t cases_seed = 0;
    auto* cases = app.add_subcommand("cases", "Print a run's fitness cases as CSV");
    cases->add_option("--problem", cases_problem, "koza1 | nguyen6 | pagie1")->required();
    cases->add_option("--seed", cases_seed, "Run seed")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*run) return command_run(run_opts);
        if (*experiment) return command_experiment(plan_file, jobs, out_dir);
        if (*analyze) return command_analyze(in_dir);
        if (*plot) return command_plot(in_dir, plot_dir);
        if (*cases) return command_cases(cases_problem, cases_seed);
    } catch (const pimp::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIncomplete;
    }
    return kExitUsage;
}
