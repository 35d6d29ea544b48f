// Command line for the active causal-quantity estimation toolkit:
//   activecq datagen  — write a synthetic dataset CSV (+ metadata sidecar)
//   activecq run      — execute an experiment config, write metric CSVs
//   activecq report   — merge aggregate CSVs into a wide strategy table
// Exit codes: 0 ok, 2 usage/config, 3 io, 4 partial trial failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "activecq/config.hpp"
#include "activecq/csv.hpp"
#include "activecq/errors.hpp"
#include "activecq/harness.hpp"

namespace fs = std::filesystem;
using namespace activecq;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitPartial = 4;

std::string default_out_dir() {
    if (const char* env = std::getenv("ACTIVECQ_OUT")) return env;
    return "out";
}

int cmd_datagen(const std::string& gen_name, int n, const std::string& mode_name,
                std::uint64_t seed, double noise_sd, const std::string& covariates,
                const std::string& out_path) {
    Generator gen;
    TreatmentMode mode;
    try {
        gen = generator_from_string(gen_name);
        mode = treatment_mode_from_string(mode_name);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    try {
        Dataset data;
        GenSpec spec{gen, n, mode, seed, noise_sd};
        switch (gen) {
            case Generator::Visualization: data = gen_visualization(spec); break;
            case Generator::Simulation: data = gen_simulation(spec); break;
            case Generator::ShiftTarget: data = gen_shift_target(spec); break;
            case Generator::SemiSynthetic: {
                if (covariates.empty()) {
                    std::cerr << "error: semisynthetic needs --covariates\n";
                    return kExitUsage;
                }
                data = semisynthetic_outcomes(load_covariates_csv(covariates), mode, seed,
                                              noise_sd);
                break;
            }
        }
        write_dataset_csv(data, out_path);
    } catch (const SchemaError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitOk;
}

std::string per_trial_csv(const std::vector<TrialsResult>& all, const RunConfig& config) {
    std::ostringstream out;
    out << "strategy,cq_kind,seed,round,labeled,sqrt_amse,trace_q,logdet_q,wall_time_s,aborted\n";
    for (const auto& tr : all)
        for (const auto& trial : tr.trials)
            for (const auto& rec : trial.records) {
                out << tr.strategy << ',' << to_string(config.trial.cq_kind) << ',' << trial.seed
                    << ',' << rec.round << ',' << rec.labeled << ','
                    << format_double(std::sqrt(rec.amse)) << ',' << format_double(rec.trace_q)
                    << ',' << format_double(rec.logdet_q) << ','
                    << format_double(config.trial.record_wall_time ? rec.wall_time_s : 0.0) << ','
                    << (trial.aborted ? 1 : 0) << "\n";
            }
    return out.str();
}

std::string aggregate_csv(const std::vector<TrialsResult>& all) {
    std::ostringstream out;
    out << "strategy,round,labeled,mean_sqrt_amse,se_sqrt_amse,n_trials\n";
    for (const auto& tr : all)
        for (const auto& row : tr.aggregate)
            out << row.strategy << ',' << row.round << ',' << row.labeled << ','
                << format_double(row.mean_sqrt_amse) << ',' << format_double(row.se_sqrt_amse)
                << ',' << row.n_trials << "\n";
    return out.str();
}

int cmd_run(const std::string& config_path, const std::string& out_dir, int parallel, bool force) {
    RunConfig config;
    try {
        config = parse_config(config_path);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitUsage;
    }

    const fs::path dir(out_dir);
    if (fs::exists(dir / "trials.csv") && !force) {
        std::cerr << "error: " << (dir / "trials.csv").string()
                  << " exists; pass --force to overwrite\n";
        return kExitUsage;
    }

    try {
        write_file_atomic((dir / "effective_config.json").string(),
                          effective_config_text(config));
        std::vector<TrialsResult> all;
        for (const auto& strategy : config.strategies) {
            TrialConfig trial = config.trial;
            trial.strategy = strategy;
            std::cerr << "running " << strategy << " over " << config.seeds.size()
                      << " seeds...\n";
            all.push_back(run_trials(trial, config.seeds, parallel));
        }
        write_file_atomic((dir / "trials.csv").string(), per_trial_csv(all, config));
        write_file_atomic((dir / "aggregate.csv").string(), aggregate_csv(all));
        int aborted = 0;
        for (const auto& tr : all) {
            aborted += tr.aborted;
            for (const auto& trial : tr.trials)
                if (trial.aborted)
                    std::cerr << "aborted: " << tr.strategy << " seed " << trial.seed << ": "
                              << trial.abort_reason << "\n";
        }
        if (aborted > 0) {
            std::cerr << aborted << " trial(s) aborted\n";
            return kExitPartial;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitOk;
}

struct AggregateFile {
    // (round, labeled) -> strategy -> mean value
    std::map<std::pair<int, int>, std::map<std::string, double>> cells;
    std::vector<std::string> strategies;  // in first-seen order
};

int read_aggregate(const std::string& path, AggregateFile& merged) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "error: cannot open " << path << "\n";
        return kExitIo;
    }
    std::string line;
    if (!std::getline(in, line)) {
        std::cerr << "error: empty file " << path << "\n";
        return kExitUsage;
    }
    if (line != "strategy,round,labeled,mean_sqrt_amse,se_sqrt_amse,n_trials") {
        std::cerr << "error: " << path << ": unexpected columns: " << line << "\n";
        return kExitUsage;
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string strategy, cell;
        std::getline(ss, strategy, ',');
        std::getline(ss, cell, ',');
        const int round = std::stoi(cell);
        std::getline(ss, cell, ',');
        const int labeled = std::stoi(cell);
        std::getline(ss, cell, ',');
        const double mean = std::stod(cell);
        if (std::find(merged.strategies.begin(), merged.strategies.end(), strategy) ==
            merged.strategies.end())
            merged.strategies.push_back(strategy);
        merged.cells[{round, labeled}][strategy] = mean;
    }
    return kExitOk;
}

int cmd_report(const std::vector<std::string>& paths, const std::string& out_path) {
    AggregateFile merged;
    for (const auto& path : paths) {
        const int rc = read_aggregate(path, merged);
        if (rc != kExitOk) return rc;
    }
    // Every strategy must cover the same round grid.
    for (const auto& [key, by_strategy] : merged.cells)
        for (const auto& strategy : merged.strategies)
            if (!by_strategy.count(strategy)) {
                std::cerr << "error: strategy " << strategy << " missing round " << key.first
                          << "\n";
                return kExitUsage;
            }
    std::ostringstream out;
    out << "round,labeled";
    for (const auto& strategy : merged.strategies) out << ',' << strategy;
    out << "\n";
    for (const auto& [key, by_strategy] : merged.cells) {
        out << key.first << ',' << key.second;
        for (const auto& strategy : merged.strategies)
            out << ',' << format_double(by_strategy.at(strategy));
        out << "\n";
    }
    std::cout << out.str();
    if (!out_path.empty()) {
        try {
            write_file_atomic(out_path, out.str());
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return kExitIo;
        }
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Active estimation of causal quantities"};
    app.require_subcommand(1);

    auto* datagen = app.add_subcommand("datagen", "Generate a dataset CSV");
    std::string gen_name = "visualization", mode_name = "continuous", covariates;
    std::string datagen_out = "dataset.csv";
    int n = 500;
    std::uint64_t seed = 0;
    double noise_sd = 0.4;
    datagen->add_option("--gen", gen_name,
                        "visualization | simulation | shift_target | semisynthetic");
    datagen->add_option("--n", n, "rows to generate");
    datagen->add_option("--mode", mode_name, "binary | discrete | continuous");
    datagen->add_option("--seed", seed, "generator seed");
    datagen->add_option("--noise-sd", noise_sd, "outcome noise standard deviation");
    datagen->add_option("--covariates", covariates, "covariate CSV (semisynthetic)");
    datagen->add_option("--out", datagen_out, "output CSV path");

    auto* run = app.add_subcommand("run", "Run an experiment config");
    std::string config_path, run_out = default_out_dir();
    int parallel = 1;
    bool force = false;
    run->add_option("--config", config_path, "JSON experiment config")->required();
    run->add_option("--out", run_out, "output directory (default $ACTIVECQ_OUT or ./out)");
    run->add_option("--parallel", parallel, "concurrent trials");
    run->add_flag("--force", force, "overwrite an existing output directory");

    auto* report = app.add_subcommand("report", "Merge aggregate CSVs into a wide table");
    std::vector<std::string> report_inputs;
    std::string report_out;
    report->add_option("csvs", report_inputs, "aggregate.csv files")->required();
    report->add_option("--out", report_out, "also write the table here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    if (datagen->parsed())
        return cmd_datagen(gen_name, n, mode_name, seed, noise_sd, covariates, datagen_out);
    if (run->parsed()) return cmd_run(config_path, run_out, parallel, force);
    if (report->parsed()) return cmd_report(report_inputs, report_out);
    return kExitUsage;
}
