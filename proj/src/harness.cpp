#include "activecq/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <mutex>
#include <thread>

#include "activecq/csv.hpp"
#include "activecq/errors.hpp"

namespace activecq {

namespace {

// Substream tags; every consumer of trial randomness forks through one of
// these so draw counts in one stage cannot shift another.
enum : std::uint64_t {
    kTagData = 1,
    kTagWarm = 2,
    kTagInterest = 3,
    kTagOracle = 4,
    kTagTarget = 5,
    kTagSelectBase = 1000,
    kTagMcBase = 2000,
};

}  // namespace

StrategySpec parse_strategy(const std::string& name) {
    StrategySpec spec;
    spec.name = name;
    std::string base = name;
    if (base.size() > 2 && base.compare(base.size() - 2, 2, "_g") == 0) {
        spec.selection = SelectionRule::Greedy;
        base = base.substr(0, base.size() - 2);
    } else if (base.size() > 2 && base.compare(base.size() - 2, 2, "_s") == 0) {
        spec.selection = SelectionRule::Softmax;
        base = base.substr(0, base.size() - 2);
    }

    using Method = StrategySpec::Method;
    if (base == "random") spec.method = Method::Random;
    else if (base == "pool_variance") spec.method = Method::PoolVariance;
    else if (base == "mu_bald") spec.method = Method::MuBald;
    else if (base == "coreset") spec.method = Method::Coreset;
    else if (base == "ig_cme") spec.method = Method::Ig, spec.source = CqSource::CmeClosedForm;
    else if (base == "tvr_cme") spec.method = Method::Tvr, spec.source = CqSource::CmeClosedForm;
    else if (base == "ig_mc") spec.method = Method::Ig, spec.source = CqSource::McSampling;
    else if (base == "tvr_mc") spec.method = Method::Tvr, spec.source = CqSource::McSampling;
    else throw SchemaError("unknown strategy: " + name);

    const bool suffixed = spec.selection != SelectionRule::TopB;
    if (suffixed && (spec.method == Method::Random || spec.method == Method::Coreset))
        throw SchemaError("strategy " + name + ": no selection suffixes");
    if (spec.selection == SelectionRule::Greedy && spec.method == Method::MuBald)
        throw SchemaError("strategy " + name + ": greedy undefined for pointwise scores");
    return spec;
}

void TrialConfig::validate() const {
    if (warm_start < 1) throw SchemaError("warm_start");
    if (batch_size < 1) throw SchemaError("batch_size");
    if (budget < 0 || budget % batch_size != 0) throw SchemaError("budget");
    if (budget > pool_size) throw SchemaError("budget");
    if (n_interest < 1) throw SchemaError("n_interest");
    if (mc_samples < 1) throw SchemaError("mc.samples");
    if (oracle_draws < 1) throw SchemaError("mc.oracle_draws");
    if (!(cme_lambda > 0.0)) throw SchemaError("cme.lambda");
    if (!(gp_step > 0.0)) throw SchemaError("gp.step");
    if (gp_opt_iterations < 0 || gp_refit_iterations < 0) throw SchemaError("gp.opt_iterations");
    if (cq_kind == CqKind::Ateds && generator != Generator::Simulation &&
        generator != Generator::SemiSynthetic)
        throw SchemaError("cq_kind: ateds pairs with the simulation generator");
    if (generator == Generator::SemiSynthetic && covariates_csv.empty())
        throw SchemaError("covariates_csv");
    kernel_family_from_string(kernel_family);
    if (gp_kernel) {
        try {
            gp_kernel->validate();
        } catch (const Error& e) {
            throw SchemaError(std::string("gp.kernel: ") + e.what());
        }
        if (gp_kernel->family == KernelFamily::Delta)
            throw SchemaError("gp.kernel: delta is reserved for binary treatments");
    }
    parse_strategy(strategy);
}

double amse(const Eigen::VectorXd& estimated, const Eigen::VectorXd& truth) {
    if (estimated.size() != truth.size())
        throw LengthMismatchError("amse: " + std::to_string(estimated.size()) + " vs " +
                                  std::to_string(truth.size()));
    return (estimated - truth).squaredNorm() / static_cast<double>(estimated.size());
}

namespace {

constexpr Eigen::Index kInterestCap = 64;  // IG log-det cost ceiling

std::vector<Eigen::Index> stride_cap(Eigen::Index n, Eigen::Index cap) {
    std::vector<Eigen::Index> keep;
    if (n <= cap) {
        for (Eigen::Index i = 0; i < n; ++i) keep.push_back(i);
        return keep;
    }
    for (Eigen::Index i = 0; i < cap; ++i) keep.push_back(i * n / cap);
    return keep;
}

InterestSet capped(InterestSet set) {
    if (set.size() <= kInterestCap) return set;
    const std::vector<Eigen::Index> keep = stride_cap(set.size(), kInterestCap);
    InterestSet out;
    out.kind = set.kind;
    const auto k = static_cast<Eigen::Index>(keep.size());
    out.a.resize(k);
    if (set.z.rows() > 0) out.z.resize(k, set.z.cols());
    if (set.a_tilde.size() > 0) out.a_tilde.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        out.a[i] = set.a[keep[static_cast<std::size_t>(i)]];
        if (set.z.rows() > 0) out.z.row(i) = set.z.row(keep[static_cast<std::size_t>(i)]);
        if (set.a_tilde.size() > 0) out.a_tilde[i] = set.a_tilde[keep[static_cast<std::size_t>(i)]];
    }
    return out;
}

}  // namespace

InterestSet build_interest_set(const TrialConfig& config, const Dataset& train_range,
                               RandomStream& rng) {
    const Eigen::VectorXd grid = treatment_grid(config.treatment_mode);
    InterestSet set;
    set.kind = config.cq_kind;

    const auto draw_fixed_treatment = [&] {
        return grid[static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(grid.size())))];
    };

    switch (config.cq_kind) {
        case CqKind::Cate: {
            if (!train_range.has_conditioning())
                throw InconsistentKindError("cate interest: data has no conditioning block");
            const double z_lo = train_range.z.col(0).minCoeff();
            const double z_hi = train_range.z.col(0).maxCoeff();
            Eigen::MatrixXd z_points;
            if (config.fixed_conditioning) {
                z_points.resize(1, 1);
                z_points(0, 0) = rng.uniform(z_lo, z_hi);
            } else {
                z_points.resize(config.n_interest, 1);
                for (Eigen::Index i = 0; i < z_points.rows(); ++i)
                    z_points(i, 0) = rng.uniform(z_lo, z_hi);
            }
            const Eigen::VectorXd a_points =
                config.all_treatments ? grid : Eigen::VectorXd::Constant(1, draw_fixed_treatment());
            const Eigen::Index count = a_points.size() * z_points.rows();
            set.a.resize(count);
            set.z.resize(count, 1);
            Eigen::Index at = 0;
            for (Eigen::Index zi = 0; zi < z_points.rows(); ++zi)
                for (Eigen::Index ai = 0; ai < a_points.size(); ++ai) {
                    set.a[at] = a_points[ai];
                    set.z(at, 0) = z_points(zi, 0);
                    ++at;
                }
            break;
        }
        case CqKind::Ate:
        case CqKind::Ateds: {
            set.a = config.all_treatments ? grid
                                          : Eigen::VectorXd::Constant(1, draw_fixed_treatment());
            break;
        }
        case CqKind::Att: {
            const Eigen::VectorXd a_points =
                config.all_treatments ? grid : Eigen::VectorXd::Constant(1, draw_fixed_treatment());
            const Eigen::Index count = a_points.size() * grid.size();
            set.a.resize(count);
            set.a_tilde.resize(count);
            Eigen::Index at = 0;
            for (Eigen::Index ai = 0; ai < a_points.size(); ++ai)
                for (Eigen::Index ti = 0; ti < grid.size(); ++ti) {
                    set.a[at] = a_points[ai];
                    set.a_tilde[at] = grid[ti];
                    ++at;
                }
            break;
        }
    }
    set = capped(std::move(set));
    set.validate();
    return set;
}

namespace {

Dataset generate_trial_data(const TrialConfig& config, std::uint64_t data_seed) {
    const auto n = static_cast<Eigen::Index>(config.warm_start + config.pool_size);
    GenSpec gspec{config.generator, n, config.treatment_mode, data_seed, config.noise_sd};
    switch (config.generator) {
        case Generator::Visualization: return gen_visualization(gspec);
        case Generator::Simulation: return gen_simulation(gspec);
        case Generator::SemiSynthetic: {
            const CovariateTable table = load_covariates_csv(config.covariates_csv);
            Dataset d = semisynthetic_outcomes(table, config.treatment_mode, data_seed,
                                               config.noise_sd);
            if (d.rows() < n)
                throw SchemaError("pool_size: covariate file has only " +
                                  std::to_string(d.rows()) + " rows");
            std::vector<Eigen::Index> head(static_cast<std::size_t>(n));
            for (Eigen::Index i = 0; i < n; ++i) head[static_cast<std::size_t>(i)] = i;
            return d.select(head);
        }
        case Generator::ShiftTarget:
            throw SchemaError("generator: shift_target only provides ATEDS target samples");
    }
    throw SchemaError("generator");
}

// ATE-family quantities treat z as one more adjustment covariate; the
// simulation mechanism additionally drops its pure-noise fourth covariate.
Dataset prepare_for_kind(const TrialConfig& config, const Dataset& raw) {
    if (config.cq_kind == CqKind::Cate || !raw.has_conditioning()) return raw;
    const Eigen::Index keep = config.generator == Generator::Simulation ? 3 : -1;
    return fold_conditioning_into_adjustment(raw, keep);
}

double sample_variance(const Eigen::VectorXd& y) {
    if (y.size() < 2) return 1.0;
    const double mean = y.mean();
    return (y.array() - mean).square().sum() / static_cast<double>(y.size() - 1);
}

KernelSpec continuous_kernel(const TrialConfig& config, const Eigen::MatrixXd& points) {
    KernelSpec k;
    k.family = kernel_family_from_string(config.kernel_family);
    k.lengthscale = points.rows() >= 2 ? median_heuristic(points) : 1.0;
    k.variance = 1.0;
    return k;
}

GpModel default_model(const TrialConfig& config, const Dataset& warm) {
    GpModel model;
    auto block_kernel = [&](const Eigen::MatrixXd& points) {
        if (!config.gp_kernel) return continuous_kernel(config, points);
        KernelSpec k = *config.gp_kernel;
        k.variance = 1.0;
        return k;
    };
    if (config.treatment_mode == TreatmentMode::Binary) {
        model.kernel.treatment = KernelSpec{KernelFamily::Delta, 1.0, 1.0, 1.0};
    } else {
        model.kernel.treatment = block_kernel(Eigen::MatrixXd(warm.a));
    }
    if (config.cq_kind == CqKind::Cate) model.kernel.conditioning = block_kernel(warm.z);
    model.kernel.adjustment = block_kernel(warm.s);
    model.kernel.adjustment.variance =
        config.gp_kernel ? config.gp_kernel->variance
                         : std::clamp(sample_variance(warm.y), 1e-3, 1e6);
    model.noise_variance = std::clamp(0.1 * sample_variance(warm.y), 1e-4, 1e4);
    return model;
}

struct TrialSetup {
    Dataset prepared;
    InterestSet interest;
    Eigen::VectorXd truth;
    EmbeddingContext context;
    ConditionalSampler sampler;  // only for the sampling-route strategies
    bool sampler_ready = false;
};

TrialSetup make_setup(const TrialConfig& config, const StrategySpec& strategy,
                      RandomStream& rng) {
    TrialSetup setup;
    const Dataset raw = generate_trial_data(config, rng.fork(kTagData).seed());
    if (config.treatment_mode == TreatmentMode::Binary && !check_positivity(raw))
        std::cerr << "warning: binary treatment arms below 5% frequency (seed "
                  << rng.seed() << ")\n";
    setup.prepared = prepare_for_kind(config, raw);

    RandomStream interest_rng = rng.fork(kTagInterest);
    setup.interest = build_interest_set(config, setup.prepared, interest_rng);

    // Frozen ground truth, one draw per trial.
    RandomStream oracle_rng = rng.fork(kTagOracle);
    if (config.generator == Generator::SemiSynthetic) {
        const CovariateTable table = load_covariates_csv(config.covariates_csv);
        setup.truth = semisynthetic_cq_oracle(table, config.treatment_mode, setup.interest);
    } else {
        GenSpec gspec{config.generator, 0, config.treatment_mode, 0, config.noise_sd};
        setup.truth = true_cq_oracle(gspec, setup.interest,
                                     static_cast<Eigen::Index>(config.oracle_draws), oracle_rng);
    }

    Dataset target;
    const Dataset* target_ptr = nullptr;
    if (config.cq_kind == CqKind::Ateds) {
        GenSpec tspec{Generator::ShiftTarget, static_cast<Eigen::Index>(config.target_samples),
                      config.treatment_mode, rng.fork(kTagTarget).seed(), 0.0};
        target = gen_shift_target(tspec);
        target_ptr = &target;
    }

    KernelSpec conditioning_kernel;
    if (config.cq_kind == CqKind::Cate) {
        conditioning_kernel = continuous_kernel(config, setup.prepared.z);
        conditioning_kernel.family = KernelFamily::Rbf;  // CME kernel stays RBF
    } else if (config.cq_kind == CqKind::Att) {
        if (config.treatment_mode == TreatmentMode::Binary)
            conditioning_kernel = KernelSpec{KernelFamily::Delta, 1.0, 1.0, 1.0};
        else {
            conditioning_kernel = continuous_kernel(config, Eigen::MatrixXd(setup.prepared.a));
            conditioning_kernel.family = KernelFamily::Rbf;
        }
    }
    setup.context = build_embedding_context(config.cq_kind, setup.prepared, conditioning_kernel,
                                            config.cme_lambda, config.scale_lambda_by_n,
                                            target_ptr);

    if (strategy.uses_cq_selection() && strategy.source == CqSource::McSampling) {
        switch (config.cq_kind) {
            case CqKind::Cate:
                setup.sampler = fit_conditional_sampler(
                    setup.prepared.z, setup.prepared.s,
                    setup.prepared.z.rows() >= 2 ? median_heuristic(setup.prepared.z) : 1.0);
                break;
            case CqKind::Att:
                setup.sampler = fit_conditional_sampler(
                    Eigen::MatrixXd(setup.prepared.a), setup.prepared.s,
                    config.treatment_mode == TreatmentMode::Binary
                        ? 0.25
                        : median_heuristic(Eigen::MatrixXd(setup.prepared.a)));
                break;
            case CqKind::Ate:
                setup.sampler = marginal_sampler(setup.prepared.s);
                break;
            case CqKind::Ateds:
                setup.sampler = marginal_sampler(*setup.context.anchors);
                break;
        }
        setup.sampler_ready = true;
    }
    return setup;
}

std::vector<Eigen::Index> select_for_strategy(const TrialConfig& config,
                                              const StrategySpec& strategy,
                                              const GpPosterior& post, const CqPosterior& cq,
                                              const Dataset& pool, RandomStream& rng) {
    using Method = StrategySpec::Method;
    switch (strategy.method) {
        case Method::Random:
        case Method::Coreset: {
            const BaselineKind kind = strategy.method == Method::Random ? BaselineKind::Random
                                                                        : BaselineKind::Coreset;
            return baseline_scores(kind, post, pool, config.batch_size, rng).indices;
        }
        case Method::MuBald: {
            const BaselineResult res =
                baseline_scores(BaselineKind::MuBald, post, pool, config.batch_size, rng);
            return pick_from_scores(res.scores, config.batch_size, strategy.selection,
                                    config.softmax_temperature, rng);
        }
        case Method::PoolVariance: {
            if (strategy.selection == SelectionRule::Greedy) {
                // TVR with the pool standing in as its own target set.
                const Eigen::MatrixXd pool_train = product_gram(post.model.kernel, pool, post.train);
                Eigen::MatrixXd cov = product_gram(post.model.kernel, pool) -
                                      pool_train * psd_solve(post.factor, pool_train.transpose());
                cov = ((cov + cov.transpose()) / 2.0).eval();
                PoolContext ctx;
                ctx.cross = cov;
                ctx.pool_cov = cov;
                ctx.pool_var = cov.diagonal().cwiseMax(0.0);
                ctx.noise_variance = post.model.noise_variance + post.factor.jitter_used;
                UtilitySpec spec{UtilityKind::TotalVarianceReduction, SelectionRule::Greedy,
                                 config.batch_size, config.softmax_temperature};
                return select_batch(spec, FantasyState{cov, 0}, std::move(ctx), rng);
            }
            const BaselineResult res =
                baseline_scores(BaselineKind::PoolVariance, post, pool, config.batch_size, rng);
            return pick_from_scores(res.scores, config.batch_size, strategy.selection,
                                    config.softmax_temperature, rng);
        }
        case Method::Ig:
        case Method::Tvr: {
            UtilitySpec spec{strategy.method == Method::Ig
                                 ? UtilityKind::InformationGain
                                 : UtilityKind::TotalVarianceReduction,
                             strategy.selection, config.batch_size, config.softmax_temperature};
            return select_batch(spec, post, cq, pool, rng);
        }
    }
    throw SchemaError("strategy");
}

}  // namespace

TrialResult run_active_loop(const TrialConfig& config, std::uint64_t seed) {
    config.validate();
    const StrategySpec strategy = parse_strategy(config.strategy);
    TrialResult result;
    result.seed = seed;

    RandomStream rng(seed);
    try {
        const TrialSetup setup = make_setup(config, strategy, rng);
        const Eigen::Index n = setup.prepared.rows();

        RandomStream warm_rng = rng.fork(kTagWarm);
        std::vector<Eigen::Index> labeled =
            sample_without_replacement(warm_rng, n, config.warm_start);
        std::sort(labeled.begin(), labeled.end());
        std::vector<bool> is_labeled(static_cast<std::size_t>(n), false);
        for (auto i : labeled) is_labeled[static_cast<std::size_t>(i)] = true;
        std::vector<Eigen::Index> pool_ids;
        for (Eigen::Index i = 0; i < n; ++i)
            if (!is_labeled[static_cast<std::size_t>(i)]) pool_ids.push_back(i);

        GpModel model = default_model(config, setup.prepared.select(labeled));
        const int rounds = config.budget / config.batch_size;
        std::vector<Eigen::Index> pending_batch;

        for (int r = 0; r <= rounds; ++r) {
            const auto t0 = std::chrono::steady_clock::now();
            const Dataset train = setup.prepared.select(labeled);
            const int iters = r == 0 ? config.gp_opt_iterations
                                     : (config.freeze_hyperparameters ? 0
                                                                      : config.gp_refit_iterations);
            model = optimize_hyperparameters(model, train, iters, config.gp_step);
            const GpPosterior post = fit(model, train);

            CqPosterior cq;
            if (strategy.uses_cq_selection() && strategy.source == CqSource::McSampling) {
                RandomStream mc_rng = rng.fork(kTagMcBase + static_cast<std::uint64_t>(r));
                cq = cq_posterior_mc(post, setup.interest, setup.sampler,
                                     static_cast<Eigen::Index>(config.mc_samples), mc_rng);
            } else {
                cq = cq_posterior_cme(post, setup.interest, setup.context);
            }

            RoundRecord rec;
            rec.round = r;
            rec.labeled = static_cast<int>(labeled.size());
            rec.amse = amse(cq.nu, setup.truth);
            rec.trace_q = cq.q.trace();
            rec.logdet_q = psd_logdet(jittered_cholesky(cq.q, 1e-8));
            rec.selected = pending_batch;
            pending_batch.clear();

            if (r < rounds) {
                const Dataset pool = setup.prepared.select(pool_ids);
                RandomStream select_rng = rng.fork(kTagSelectBase + static_cast<std::uint64_t>(r));
                const std::vector<Eigen::Index> batch_local =
                    select_for_strategy(config, strategy, post, cq, pool, select_rng);
                for (auto local : batch_local)
                    pending_batch.push_back(pool_ids[static_cast<std::size_t>(local)]);
                std::vector<bool> take(pool_ids.size(), false);
                for (auto local : batch_local) take[static_cast<std::size_t>(local)] = true;
                std::vector<Eigen::Index> next_pool;
                next_pool.reserve(pool_ids.size() - batch_local.size());
                for (std::size_t i = 0; i < pool_ids.size(); ++i)
                    (take[i] ? labeled : next_pool).push_back(pool_ids[i]);
                pool_ids = std::move(next_pool);
                std::sort(labeled.begin(), labeled.end());
            }

            rec.wall_time_s =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            result.records.push_back(std::move(rec));
        }
    } catch (const std::exception& e) {
        result.aborted = true;
        result.abort_reason = e.what();
    }
    return result;
}

TrialsResult run_trials(const TrialConfig& config, const std::vector<std::uint64_t>& seeds,
                        int parallel) {
    if (seeds.empty()) throw SchemaError("seeds");
    TrialsResult out;
    out.strategy = config.strategy;
    out.trials.resize(seeds.size());

    const int workers = std::max(1, std::min<int>(parallel, static_cast<int>(seeds.size())));
    if (workers == 1) {
        for (std::size_t i = 0; i < seeds.size(); ++i)
            out.trials[i] = run_active_loop(config, seeds[i]);
    } else {
        std::mutex mu;
        std::size_t next = 0;
        auto worker = [&] {
            for (;;) {
                std::size_t i;
                {
                    std::lock_guard<std::mutex> lock(mu);
                    if (next >= seeds.size()) return;
                    i = next++;
                }
                out.trials[i] = run_active_loop(config, seeds[i]);
            }
        };
        std::vector<std::thread> threads;
        for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
        for (auto& t : threads) t.join();
    }

    for (const auto& t : out.trials)
        if (t.aborted) ++out.aborted;

    // Per-round aggregate over completed trials.
    std::size_t max_rounds = 0;
    for (const auto& t : out.trials)
        if (!t.aborted) max_rounds = std::max(max_rounds, t.records.size());
    for (std::size_t r = 0; r < max_rounds; ++r) {
        std::vector<double> values;
        int labeled = 0;
        for (const auto& t : out.trials) {
            if (t.aborted || r >= t.records.size()) continue;
            values.push_back(std::sqrt(t.records[r].amse));
            labeled = t.records[r].labeled;
        }
        if (values.empty()) continue;
        AggregateRow row;
        row.strategy = config.strategy;
        row.round = static_cast<int>(r);
        row.labeled = labeled;
        row.n_trials = static_cast<int>(values.size());
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        row.mean_sqrt_amse = mean;
        if (values.size() >= 2) {
            double ss = 0.0;
            for (double v : values) ss += (v - mean) * (v - mean);
            const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
            row.se_sqrt_amse = sd / std::sqrt(static_cast<double>(values.size()));
        }
        out.aggregate.push_back(row);
    }
    return out;
}

}  // namespace activecq
