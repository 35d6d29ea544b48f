#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "activecq/acquisition.hpp"
#include "activecq/datagen.hpp"

namespace activecq {

// Acquisition strategy names as they appear in configs and CSVs:
// random, pool_variance, mu_bald, coreset, ig_cme, tvr_cme, ig_mc, tvr_mc,
// with _g (greedy) or _s (softmax) suffixes where the base supports them.
struct StrategySpec {
    enum class Method { Random, PoolVariance, MuBald, Coreset, Ig, Tvr };
    Method method = Method::Tvr;
    CqSource source = CqSource::CmeClosedForm;
    SelectionRule selection = SelectionRule::TopB;
    std::string name;

    bool uses_cq_selection() const { return method == Method::Ig || method == Method::Tvr; }
};

StrategySpec parse_strategy(const std::string& name);

struct TrialConfig {
    CqKind cq_kind = CqKind::Cate;
    Generator generator = Generator::Visualization;
    TreatmentMode treatment_mode = TreatmentMode::Continuous;
    std::string strategy = "tvr_cme";

    int warm_start = 20;
    int batch_size = 5;
    int budget = 100;
    int pool_size = 480;

    bool all_treatments = true;      // false: one fixed treatment per trial
    bool fixed_conditioning = true;  // CATE: fixed-z vs random-z
    int n_interest = 10;             // sampled points where the grid does not decide

    int mc_samples = 200;     // n_s for the sampling route
    int oracle_draws = 100000;

    std::string kernel_family = "rbf";
    // Explicit kernel for the continuous blocks; when absent, lengthscales
    // start at the median heuristic and the output scale at var(y).
    std::optional<KernelSpec> gp_kernel;
    int gp_opt_iterations = 500;
    int gp_refit_iterations = 100;
    double gp_step = 0.05;
    bool freeze_hyperparameters = false;

    double cme_lambda = 0.01;
    bool scale_lambda_by_n = true;

    double noise_sd = 0.4;
    int target_samples = 500;        // ATEDS target-population draws
    double softmax_temperature = 0.0;
    std::string covariates_csv;      // semisynthetic input
    bool record_wall_time = false;

    void validate() const;
};

struct RoundRecord {
    int round = 0;
    int labeled = 0;
    double amse = 0.0;
    double trace_q = 0.0;
    double logdet_q = 0.0;
    double wall_time_s = 0.0;
    std::vector<Eigen::Index> selected;  // rows acquired entering this round (global ids)
};

struct TrialResult {
    std::uint64_t seed = 0;
    std::vector<RoundRecord> records;
    bool aborted = false;
    std::string abort_reason;
};

/// (1/n_I) sum (estimate - truth)^2.
double amse(const Eigen::VectorXd& estimated, const Eigen::VectorXd& truth);

/// Interest grid per the config's kind and modes; capped at 64 points.
InterestSet build_interest_set(const TrialConfig& config, const Dataset& train_range,
                               RandomStream& rng);

/// One full warm-start-to-budget run; partial records survive an abort.
TrialResult run_active_loop(const TrialConfig& config, std::uint64_t seed);

struct AggregateRow {
    std::string strategy;
    int round = 0;
    int labeled = 0;
    double mean_sqrt_amse = 0.0;
    double se_sqrt_amse = 0.0;
    int n_trials = 0;
};

struct TrialsResult {
    std::string strategy;
    std::vector<TrialResult> trials;
    std::vector<AggregateRow> aggregate;
    int aborted = 0;
};

/// One trial per seed (optionally across threads), aborted trials excluded
/// from the aggregate rows.
TrialsResult run_trials(const TrialConfig& config, const std::vector<std::uint64_t>& seeds,
                        int parallel = 1);

}  // namespace activecq
