#pragma once

// JSON-lines persistence of run logs and couple logs.
//
// A run log is:
//   {"type":"config", ...}                 one line
//   {"type":"generation","gen":g, ...}     one line per generation
//   {"type":"summary", ...}                one line
// Role tallies ride on the generation record of the population they were
// selected from.

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pimp/engine.hpp"

namespace pimp {

using Json = nlohmann::ordered_json;

inline Json to_json(const RunConfig& c) {
    Json j;
    j["approach"] = std::string(name(c.approach));
    j["problem"] = std::string(name(c.problem));
    j["mutation_prob"] = c.mutation_prob;
    j["crossover_prob"] = c.crossover_prob;
    j["population_size"] = c.population_size;
    j["generations"] = c.generations;
    j["tournament_size"] = c.tournament_size;
    j["candidate_set_size"] = c.candidate_set_size;
    j["max_depth"] = c.max_depth;
    j["init_depth_range"] = {c.init_depth_low, c.init_depth_high};
    j["run_seed"] = c.run_seed;
    j["metrics_interval"] = c.metrics_interval;
    j["crossover"] = std::string(name(c.crossover));
    j["offspring_per_couple"] = c.offspring_per_couple;
    j["overrides"] = c.overrides();
    return j;
}

inline RunConfig run_config_from_json(const Json& j) {
    RunConfig c;
    c.approach = approach_from_name(j.at("approach").get<std::string>());
    c.problem = problem_from_name(j.at("problem").get<std::string>());
    c.mutation_prob = j.at("mutation_prob").get<double>();
    c.crossover_prob = j.at("crossover_prob").get<double>();
    c.population_size = j.at("population_size").get<std::size_t>();
    c.generations = j.at("generations").get<int>();
    c.tournament_size = j.at("tournament_size").get<std::size_t>();
    c.candidate_set_size = j.at("candidate_set_size").get<std::size_t>();
    c.max_depth = j.at("max_depth").get<int>();
    c.init_depth_low = j.at("init_depth_range").at(0).get<int>();
    c.init_depth_high = j.at("init_depth_range").at(1).get<int>();
    c.run_seed = j.at("run_seed").get<std::uint64_t>();
    c.metrics_interval = j.at("metrics_interval").get<int>();
    c.crossover = crossover_mode_from_name(j.at("crossover").get<std::string>());
    c.offspring_per_couple = j.at("offspring_per_couple").get<int>();
    return c;
}

namespace detail {

inline Json optional_number(const std::optional<double>& v) {
    return v ? Json(*v) : Json(nullptr);
}

inline std::optional<double> number_or_null(const Json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<double>();
}

}  // namespace detail

inline Json to_json(const RoleTally& t) {
    Json j;
    j["choosers"] = t.choosers_only;
    j["courters"] = t.courters_only;
    j["both"] = t.both;
    j["best"] = {{"choosers", detail::optional_number(t.best_choosers)},
                 {"courters", detail::optional_number(t.best_courters)},
                 {"both", detail::optional_number(t.best_both)}};
    j["mean"] = {{"choosers", detail::optional_number(t.mean_choosers)},
                 {"courters", detail::optional_number(t.mean_courters)},
                 {"both", detail::optional_number(t.mean_both)}};
    return j;
}

inline RoleTally role_tally_from_json(const Json& j, int generation) {
    RoleTally t;
    t.generation = generation;
    t.choosers_only = j.at("choosers").get<std::size_t>();
    t.courters_only = j.at("courters").get<std::size_t>();
    t.both = j.at("both").get<std::size_t>();
    t.best_choosers = detail::number_or_null(j.at("best").at("choosers"));
    t.best_courters = detail::number_or_null(j.at("best").at("courters"));
    t.best_both = detail::number_or_null(j.at("best").at("both"));
    t.mean_choosers = detail::number_or_null(j.at("mean").at("choosers"));
    t.mean_courters = detail::number_or_null(j.at("mean").at("courters"));
    t.mean_both = detail::number_or_null(j.at("mean").at("both"));
    return t;
}

inline Json census_to_json(const RootCensus& census) {
    Json j = Json::object();
    for (std::size_t s = 0; s < kSymbolCount; ++s)
        if (census[s] > 0) j[std::string(name(static_cast<Symbol>(s)))] = census[s];
    return j;
}

inline RootCensus census_from_json(const Json& j) {
    RootCensus c{};
    for (const auto& [key, value] : j.items()) {
        Symbol s{};
        if (!symbol_from_name(key, s)) throw ConfigError("unknown root symbol '" + key + "'");
        c[static_cast<std::size_t>(s)] = value.get<std::size_t>();
    }
    return c;
}

/// Everything the harness needs from one finished run.
struct RunSummary {
    RunConfig config;
    double final_best = 0.0;
    std::string final_best_tree;
    double best_ever = 0.0;
    int best_ever_generation = 0;
    std::string best_ever_tree;
    bool success = false;
    bool root_converged = false;
    std::size_t final_unique = 0;
    std::size_t root_violations = 0;
    std::map<int, std::size_t> unique;  // generation -> unique solutions
    std::vector<double> best_per_generation;
    std::vector<RootCensus> roots_per_generation;
    std::vector<RoleTally> roles;
};

inline Json summary_json(const MetricsLog& log) {
    const auto best = best_of_run(log);
    Json j;
    j["type"] = "summary";
    j["final_best"] = best.final_best;
    j["final_best_tree"] = serialize(best.final_best_tree);
    j["best_ever"] = best.best_ever;
    j["best_ever_gen"] = best.best_ever_generation;
    j["best_ever_tree"] = serialize(best.best_ever_tree);
    j["success"] = best.success;
    j["root_converged"] = root_converged(log.final_population);
    j["final_unique"] = unique_solutions(log.final_population);
    j["root_violations"] = log.root_violations;
    return j;
}

inline void write_run_log(std::ostream& os, const MetricsLog& log) {
    Json header = to_json(log.config);
    Json typed;
    typed["type"] = "config";
    typed.update(header);
    os << typed.dump() << '\n';
    for (const auto& r : log.generations) {
        Json j;
        j["type"] = "generation";
        j["gen"] = r.generation;
        j["best"] = r.best_fitness;
        j["roots"] = census_to_json(r.roots);
        if (r.unique) j["unique"] = *r.unique;
        if (static_cast<std::size_t>(r.generation) < log.roles.size())
            j["roles"] = to_json(log.roles[static_cast<std::size_t>(r.generation)]);
        os << j.dump() << '\n';
    }
    os << summary_json(log).dump() << '\n';
}

/// Parses a run log; throws ConfigError when the summary line is missing.
inline RunSummary read_run_log(std::istream& is) {
    RunSummary s;
    bool have_config = false, have_summary = false;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const Json j = Json::parse(line);
        const auto type = j.at("type").get<std::string>();
        if (type == "config") {
            s.config = run_config_from_json(j);
            have_config = true;
        } else if (type == "generation") {
            const int g = j.at("gen").get<int>();
            s.best_per_generation.push_back(j.at("best").get<double>());
            s.roots_per_generation.push_back(census_from_json(j.at("roots")));
            if (j.contains("unique")) s.unique[g] = j.at("unique").get<std::size_t>();
            if (j.contains("roles")) s.roles.push_back(role_tally_from_json(j.at("roles"), g));
        } else if (type == "summary") {
            s.final_best = j.at("final_best").get<double>();
            s.final_best_tree = j.at("final_best_tree").get<std::string>();
            s.best_ever = j.at("best_ever").get<double>();
            s.best_ever_generation = j.at("best_ever_gen").get<int>();
            s.best_ever_tree = j.at("best_ever_tree").get<std::string>();
            s.success = j.at("success").get<bool>();
            s.root_converged = j.at("root_converged").get<bool>();
            s.final_unique = j.at("final_unique").get<std::size_t>();
            s.root_violations = j.at("root_violations").get<std::size_t>();
            have_summary = true;
        }
    }
    if (!have_config || !have_summary) throw ConfigError("incomplete run log");
    return s;
}

inline void write_couple(std::ostream& os, const CoupleRecord& c) {
    os << "{\"gen\": " << c.generation << ", \"chooser\": " << c.chooser
       << ", \"courter\": " << c.courter << "}\n";
}

}  // namespace pimp
