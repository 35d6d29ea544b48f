#include "activecq/datagen.hpp"

#include <cmath>

#include "activecq/errors.hpp"
#include "activecq/numerics.hpp"

namespace activecq {

std::string to_string(Generator g) {
    switch (g) {
        case Generator::Visualization: return "visualization";
        case Generator::Simulation: return "simulation";
        case Generator::ShiftTarget: return "shift_target";
        case Generator::SemiSynthetic: return "semisynthetic";
    }
    return "visualization";
}

Generator generator_from_string(const std::string& name) {
    if (name == "visualization") return Generator::Visualization;
    if (name == "simulation") return Generator::Simulation;
    if (name == "shift_target") return Generator::ShiftTarget;
    if (name == "semisynthetic") return Generator::SemiSynthetic;
    throw SchemaError("unknown generator: " + name);
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double squash_treatment(double a_org, TreatmentMode mode) {
    switch (mode) {
        case TreatmentMode::Binary: return a_org > 0.0 ? 1.0 : 0.0;
        case TreatmentMode::Continuous: return sigmoid(a_org);
        case TreatmentMode::Discrete: return snap_to_grid(sigmoid(a_org));
    }
    return sigmoid(a_org);
}

struct VisualizationRow {
    double z, s1, s2, a, y_clean;
};

// One observation of the visualization mechanism; draw order is fixed so the
// stream stays reproducible.
VisualizationRow draw_visualization_row(RandomStream& rng, TreatmentMode mode) {
    VisualizationRow r;
    r.z = rng.uniform(-2.0, 2.0);
    const double x = 2.5 * r.z;
    const double xi = 0.1 * x;
    const double omega = 0.1 * std::abs(x) + 0.05;
    const double alpha = -8.0 + 8.0 * sigmoid(x);
    r.s1 = skew_normal_sample(rng, xi, omega, alpha);
    const double eps1 = rng.normal();
    const double eps2 = rng.normal();
    r.s2 = std::exp(2.0 * eps1) + eps2;
    static const Eigen::VectorXd beta = inverse_square_weights(2);
    const double xb = r.z * beta[0] + r.s1 * beta[1];
    const double a_org = standard_normal_cdf(3.0 * xb) + 1.5 * rng.normal() - 0.5;
    r.a = squash_treatment(a_org, mode);
    r.y_clean = visualization_outcome(r.a, r.z, r.s1);
    return r;
}

struct SimulationRow {
    double z, s1, s2, s3, s4, a, y_clean;
};

SimulationRow draw_simulation_row(RandomStream& rng, TreatmentMode mode) {
    SimulationRow r;
    r.z = rng.uniform(-2.0, 2.0);
    r.s1 = std::cos(r.z) + r.z + rng.normal();
    r.s2 = -1.0 + 0.25 * r.z * r.z + rng.normal();
    const double sz = std::sin(r.z);
    r.s3 = sz * sz + rng.normal();
    r.s4 = std::exp(2.0 * rng.normal()) + rng.normal();
    static const Eigen::VectorXd beta = inverse_square_weights(4);
    const double xb = r.z * beta[0] + r.s1 * beta[1] + r.s2 * beta[2] + r.s3 * beta[3];
    const double a_org = standard_normal_cdf(3.0 * xb) + 1.5 * rng.normal() - 0.5;
    r.a = squash_treatment(a_org, mode);
    r.y_clean = simulation_outcome(r.a, r.z, r.s1, r.s2, r.s3);
    return r;
}

}  // namespace

double snap_to_grid(double a) { return std::round(a / 0.1) * 0.1; }

Eigen::VectorXd inverse_square_weights(Eigen::Index count) {
    Eigen::VectorXd beta(count);
    for (Eigen::Index j = 0; j < count; ++j)
        beta[j] = 1.0 / static_cast<double>((j + 1) * (j + 1));
    return beta;
}

Eigen::VectorXd treatment_grid(TreatmentMode mode) {
    if (mode == TreatmentMode::Binary) {
        Eigen::VectorXd g(2);
        g << 0.0, 1.0;
        return g;
    }
    Eigen::VectorXd g(11);
    for (int i = 0; i <= 10; ++i) g[i] = snap_to_grid(0.1 * i);
    return g;
}

double visualization_outcome(double a, double z, double s1) { return a * z * s1 + 2.0 * z + s1; }

double simulation_outcome(double a, double z, double s1, double s2, double s3) {
    return a * z + a * s1 + s2 + std::sin(s3);
}

Dataset gen_visualization(const GenSpec& spec) {
    if (spec.treatment_mode == TreatmentMode::Binary)
        throw SchemaError("visualization generator: continuous or discrete treatments only");
    RandomStream rng(spec.seed);
    Dataset d;
    d.a.resize(spec.n);
    d.z.resize(spec.n, 1);
    d.s.resize(spec.n, 2);
    d.y.resize(spec.n);
    for (Eigen::Index i = 0; i < spec.n; ++i) {
        const VisualizationRow r = draw_visualization_row(rng, spec.treatment_mode);
        d.a[i] = r.a;
        d.z(i, 0) = r.z;
        d.s(i, 0) = r.s1;
        d.s(i, 1) = r.s2;
        d.y[i] = r.y_clean + spec.noise_sd * rng.normal();
    }
    d.meta = {"visualization", spec.seed, spec.treatment_mode, spec.noise_sd,
              std::string(RandomStream::kVersion), ""};
    return d;
}

Dataset gen_simulation(const GenSpec& spec) {
    RandomStream rng(spec.seed);
    Dataset d;
    d.a.resize(spec.n);
    d.z.resize(spec.n, 1);
    d.s.resize(spec.n, 4);
    d.y.resize(spec.n);
    for (Eigen::Index i = 0; i < spec.n; ++i) {
        const SimulationRow r = draw_simulation_row(rng, spec.treatment_mode);
        d.a[i] = r.a;
        d.z(i, 0) = r.z;
        d.s(i, 0) = r.s1;
        d.s(i, 1) = r.s2;
        d.s(i, 2) = r.s3;
        d.s(i, 3) = r.s4;
        d.y[i] = r.y_clean + spec.noise_sd * rng.normal();
    }
    d.meta = {"simulation", spec.seed, spec.treatment_mode, spec.noise_sd,
              std::string(RandomStream::kVersion), "spec_v1"};
    return d;
}

Dataset gen_shift_target(const GenSpec& spec) {
    RandomStream rng(spec.seed);
    Dataset d;
    d.s.resize(spec.n, 4);
    for (Eigen::Index i = 0; i < spec.n; ++i) {
        d.s(i, 0) = rng.uniform(-1.0, 1.0);  // z column of the folded layout
        d.s(i, 1) = rng.uniform(-1.0, 1.0);
        d.s(i, 2) = rng.uniform(-0.5, 0.0);
        d.s(i, 3) = rng.uniform(0.0, 0.5);
    }
    d.meta = {"shift_target", spec.seed, spec.treatment_mode, 0.0,
              std::string(RandomStream::kVersion), ""};
    return d;
}

Eigen::MatrixXd CovariateTable::continuous_columns() const {
    Eigen::Index count = 0;
    for (bool c : is_continuous) count += c ? 1 : 0;
    Eigen::MatrixXd out(values.rows(), count);
    Eigen::Index at = 0;
    for (Eigen::Index j = 0; j < values.cols(); ++j)
        if (is_continuous[static_cast<std::size_t>(j)]) out.col(at++) = values.col(j);
    return out;
}

namespace {

Eigen::VectorXd one_over_j_weights(Eigen::Index count) {
    Eigen::VectorXd beta(count);
    for (Eigen::Index j = 0; j < count; ++j) beta[j] = 1.0 / static_cast<double>(j + 1);
    return beta;
}

// y(t=0) = 1.2 x'b + 1; y(t=1) adds the exponential lift and the 3*bw term.
double semisynthetic_binary_outcome(const Eigen::VectorXd& x, const Eigen::VectorXd& beta,
                                    double t) {
    const double base = 1.2 * x.dot(beta) + 1.0;
    if (t == 0.0) return base;
    return base + (x.array() + 0.5).exp().matrix().dot(beta) + 3.0 * x[0];
}

double semisynthetic_continuous_outcome(const Eigen::VectorXd& x, const Eigen::VectorXd& beta,
                                        double t) {
    const double bw = x.size() > 0 ? x[0] : 0.0;
    return 1.2 * x.dot(beta) + 1.2 * t + bw * bw + t * bw;
}

Eigen::Index find_treatment_column(const CovariateTable& table) {
    for (Eigen::Index j = 0; j < table.cols(); ++j)
        if (table.names[static_cast<std::size_t>(j)] == "b_treatment") return j;
    return -1;
}

}  // namespace

Dataset semisynthetic_outcomes(const CovariateTable& covariates, TreatmentMode mode,
                               std::uint64_t seed, double noise_sd) {
    const Eigen::MatrixXd x = covariates.continuous_columns();
    if (x.cols() == 0)
        throw NoContinuousColumnsError("semisynthetic_outcomes: no continuous covariates");
    const Eigen::Index n = covariates.rows();
    const Eigen::VectorXd beta = one_over_j_weights(x.cols());
    const Eigen::Index treat_col = mode == TreatmentMode::Binary
                                       ? find_treatment_column(covariates)
                                       : Eigen::Index{-1};

    RandomStream rng(seed);
    Dataset d;
    d.a.resize(n);
    d.y.resize(n);
    d.s.resize(n, covariates.cols() - (treat_col >= 0 ? 1 : 0));
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd xi = x.row(i).transpose();
        double a;
        if (treat_col >= 0) {
            a = covariates.values(i, treat_col) != 0.0 ? 1.0 : 0.0;
        } else {
            const double a_org =
                standard_normal_cdf(3.0 * xi.dot(beta)) + 1.5 * rng.normal() - 0.5;
            a = squash_treatment(a_org, mode);
        }
        d.a[i] = a;
        const double clean = mode == TreatmentMode::Binary
                                 ? semisynthetic_binary_outcome(xi, beta, a)
                                 : semisynthetic_continuous_outcome(xi, beta, a);
        d.y[i] = clean + noise_sd * rng.normal();
        Eigen::Index at = 0;
        for (Eigen::Index j = 0; j < covariates.cols(); ++j)
            if (j != treat_col) d.s(i, at++) = covariates.values(i, j);
    }
    d.meta = {"semisynthetic", seed, mode, noise_sd, std::string(RandomStream::kVersion), ""};
    return d;
}

namespace {

bool treatment_matches(double a, double target, TreatmentMode mode) {
    switch (mode) {
        case TreatmentMode::Binary: return a == target;
        case TreatmentMode::Discrete: return std::abs(a - target) < 0.05;
        case TreatmentMode::Continuous: return std::abs(a - target) <= 0.05;
    }
    return false;
}

Eigen::VectorXd oracle_visualization(const GenSpec& spec, const InterestSet& interest,
                                     Eigen::Index mc_n, RandomStream& rng) {
    Eigen::VectorXd truth(interest.size());
    switch (interest.kind) {
        case CqKind::Cate: {
            for (Eigen::Index i = 0; i < interest.size(); ++i) {
                const double z = interest.z(i, 0);
                const double x = 2.5 * z;
                const double xi = 0.1 * x;
                const double omega = 0.1 * std::abs(x) + 0.05;
                const double alpha = -8.0 + 8.0 * sigmoid(x);
                double acc = 0.0;
                for (Eigen::Index m = 0; m < mc_n; ++m)
                    acc += visualization_outcome(interest.a[i], z,
                                                 skew_normal_sample(rng, xi, omega, alpha));
                truth[i] = acc / static_cast<double>(mc_n);
            }
            return truth;
        }
        case CqKind::Ate: {
            for (Eigen::Index i = 0; i < interest.size(); ++i) {
                double acc = 0.0;
                for (Eigen::Index m = 0; m < mc_n; ++m) {
                    const VisualizationRow r = draw_visualization_row(rng, spec.treatment_mode);
                    acc += visualization_outcome(interest.a[i], r.z, r.s1);
                }
                truth[i] = acc / static_cast<double>(mc_n);
            }
            return truth;
        }
        case CqKind::Att: {
            for (Eigen::Index i = 0; i < interest.size(); ++i) {
                double acc = 0.0;
                Eigen::Index accepted = 0;
                for (Eigen::Index m = 0; m < 50 * mc_n && accepted < mc_n; ++m) {
                    const VisualizationRow r = draw_visualization_row(rng, spec.treatment_mode);
                    if (!treatment_matches(r.a, interest.a_tilde[i], spec.treatment_mode))
                        continue;
                    acc += visualization_outcome(interest.a[i], r.z, r.s1);
                    ++accepted;
                }
                if (accepted == 0)
                    throw UnknownMechanismError("att oracle: no draws matched the treatment");
                truth[i] = acc / static_cast<double>(accepted);
            }
            return truth;
        }
        case CqKind::Ateds:
            throw InconsistentKindError("ateds pairs with the simulation generator");
    }
    return truth;
}

Eigen::VectorXd oracle_simulation(const GenSpec& spec, const InterestSet& interest,
                                  Eigen::Index mc_n, RandomStream& rng) {
    Eigen::VectorXd truth(interest.size());
    switch (interest.kind) {
        case CqKind::Cate: {
            for (Eigen::Index i = 0; i < interest.size(); ++i) {
                const double z = interest.z(i, 0);
                double acc = 0.0;
                for (Eigen::Index m = 0; m < mc_n; ++m) {
                    const double s1 = std::cos(z) + z + rng.normal();
                    const double s2 = -1.0 + 0.25 * z * z + rng.normal();
                    const double sz = std::sin(z);
                    const double s3 = sz * sz + rng.normal();
                    acc += simulation_outcome(interest.a[i], z, s1, s2, s3);
                }
                truth[i] = acc / static_cast<double>(mc_n);
            }
            return truth;
        }
        case CqKind::Ate: {
            for (Eigen::Index i = 0; i < interest.size(); ++i) {
                double acc = 0.0;
                for (Eigen::Index m = 0; m < mc_n; ++m) {
                    const SimulationRow r = draw_simulation_row(rng, spec.treatment_mode);
                    acc += simulation_outcome(interest.a[i], r.z, r.s1, r.s2, r.s3);
                }
                truth[i] = acc / static_cast<double>(mc_n);
            }
            return truth;
        }
        case CqKind::Att: {
            for (Eigen::Index i = 0; i < interest.size(); ++i) {
                double acc = 0.0;
                Eigen::Index accepted = 0;
                for (Eigen::Index m = 0; m < 50 * mc_n && accepted < mc_n; ++m) {
                    const SimulationRow r = draw_simulation_row(rng, spec.treatment_mode);
                    if (!treatment_matches(r.a, interest.a_tilde[i], spec.treatment_mode))
                        continue;
                    acc += simulation_outcome(interest.a[i], r.z, r.s1, r.s2, r.s3);
                    ++accepted;
                }
                if (accepted == 0)
                    throw UnknownMechanismError("att oracle: no draws matched the treatment");
                truth[i] = acc / static_cast<double>(accepted);
            }
            return truth;
        }
        case CqKind::Ateds: {
            // Draws come from the shift-target mechanism.
            for (Eigen::Index i = 0; i < interest.size(); ++i) {
                double acc = 0.0;
                for (Eigen::Index m = 0; m < mc_n; ++m) {
                    const double z = rng.uniform(-1.0, 1.0);
                    const double s1 = rng.uniform(-1.0, 1.0);
                    const double s2 = rng.uniform(-0.5, 0.0);
                    const double s3 = rng.uniform(0.0, 0.5);
                    acc += simulation_outcome(interest.a[i], z, s1, s2, s3);
                }
                truth[i] = acc / static_cast<double>(mc_n);
            }
            return truth;
        }
    }
    return truth;
}

}  // namespace

Eigen::VectorXd true_cq_oracle(const GenSpec& spec, const InterestSet& interest, Eigen::Index mc_n,
                               RandomStream& rng) {
    interest.validate();
    if (mc_n < 1) throw ZeroCountError("true_cq_oracle: mc_n must be >= 1");
    switch (spec.generator) {
        case Generator::Visualization: return oracle_visualization(spec, interest, mc_n, rng);
        case Generator::Simulation: return oracle_simulation(spec, interest, mc_n, rng);
        case Generator::ShiftTarget:
            throw UnknownMechanismError("shift_target has no outcome mechanism");
        case Generator::SemiSynthetic:
            throw UnknownMechanismError(
                "semisynthetic truth needs covariates; use semisynthetic_cq_oracle");
    }
    return {};
}

Eigen::VectorXd semisynthetic_cq_oracle(const CovariateTable& covariates, TreatmentMode mode,
                                        const InterestSet& interest) {
    interest.validate();
    if (interest.kind == CqKind::Cate || interest.kind == CqKind::Ateds)
        throw InconsistentKindError("semisynthetic oracle covers ate and att");
    const Eigen::MatrixXd x = covariates.continuous_columns();
    if (x.cols() == 0) throw NoContinuousColumnsError("semisynthetic oracle");
    const Eigen::VectorXd beta = one_over_j_weights(x.cols());
    const Eigen::Index treat_col = find_treatment_column(covariates);

    auto clean = [&](double a, const Eigen::VectorXd& xi) {
        return mode == TreatmentMode::Binary ? semisynthetic_binary_outcome(xi, beta, a)
                                             : semisynthetic_continuous_outcome(xi, beta, a);
    };

    Eigen::VectorXd truth(interest.size());
    for (Eigen::Index i = 0; i < interest.size(); ++i) {
        double acc = 0.0;
        Eigen::Index count = 0;
        for (Eigen::Index r = 0; r < covariates.rows(); ++r) {
            if (interest.kind == CqKind::Att) {
                if (treat_col < 0)
                    throw UnknownMechanismError("att oracle needs a b_treatment column");
                if ((covariates.values(r, treat_col) != 0.0 ? 1.0 : 0.0) != interest.a_tilde[i])
                    continue;
            }
            acc += clean(interest.a[i], x.row(r).transpose());
            ++count;
        }
        if (count == 0) throw UnknownMechanismError("semisynthetic oracle: empty subgroup");
        truth[i] = acc / static_cast<double>(count);
    }
    return truth;
}

bool check_positivity(const Dataset& data) {
    if (data.meta.treatment_mode != TreatmentMode::Binary || data.rows() == 0) return true;
    const double frac = (data.a.array() == 1.0).cast<double>().mean();
    return frac >= 0.05 && frac <= 0.95;
}

}  // namespace activecq
